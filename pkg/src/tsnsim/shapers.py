"""Per-queue transmission selection state: plain FIFO, CBS credit, ATS eligibility, DRR deficit.

Credit and token quantities are kept in *nanobits* (bits x 1e9) so that
``rate_bps * dt_ns`` is an exact integer.
"""

import heapq
from collections import deque
from copy import copy

SCALE = 1_000_000_000  # nanobits per bit
MILLI = 1000  # DRR deficits are kept in millibytes to allow fractional quanta


def ceil_div(a, b):
    return -(-a // b)


class FifoQueue:
    """One of the eight priority queues, without any transmission selection algorithm."""

    def __init__(self, queue_id):
        self.queue_id = queue_id
        self.backlog = deque()
        self.bytes = 0

    def __len__(self):
        return len(self.backlog)

    def enqueue(self, frame, now):
        self.backlog.append(frame)
        self.bytes += frame.size

    def head(self, now):
        """Head frame if the TSA lets it go at ``now``."""
        return self.backlog[0] if self.backlog else None

    def peek(self):
        return self.backlog[0] if self.backlog else None

    def pop(self, now):
        frame = self.backlog.popleft()
        self.bytes -= frame.size
        return frame

    def next_eligible_time(self, now):
        """Earliest future instant the TSA may release the head (None: no TSA wait)."""
        return None

    def on_tx_start(self, now, tx_time):
        pass

    def on_tx_end(self, now):
        pass


class CbsQueueState(FifoQueue):
    """Credit-based shaper queue.

    Credit grows at ``idle_slope`` while frames wait, falls at
    ``send_slope = idle_slope - link_rate`` while this queue transmits,
    recovers towards zero while empty and negative, and is reset to zero when
    the queue is empty with positive credit.
    """

    def __init__(self, queue_id, idle_slope, link_rate, trace=False):
        super().__init__(queue_id)
        if idle_slope <= 0:
            raise ValueError(f"queue {queue_id}: idleSlope must be positive")
        self.idle_slope = int(idle_slope)
        self.send_slope = self.idle_slope - int(link_rate)
        self.credit = 0
        self.last_update = 0
        self.transmitting = False
        self.trace = [] if trace else None

    @property
    def credit_bits(self):
        return self.credit / SCALE

    def advance(self, now):
        dt = now - self.last_update
        if dt:
            if self.transmitting:
                self.credit += self.send_slope * dt
            elif self.backlog:
                self.credit += self.idle_slope * dt
            elif self.credit < 0:
                self.credit = min(0, self.credit + self.idle_slope * dt)
            else:
                self.credit = 0
            self.last_update = now
        if self.trace is not None:
            self.trace.append((now, self.credit))

    def enqueue(self, frame, now):
        self.advance(now)
        super().enqueue(frame, now)

    def head(self, now):
        if not self.backlog:
            return None
        self.advance(now)
        return self.backlog[0] if self.credit >= 0 else None

    def pop(self, now):
        self.advance(now)
        return super().pop(now)

    def next_eligible_time(self, now):
        if not self.backlog or self.transmitting:
            return None
        self.advance(now)
        if self.credit >= 0:
            return None
        return now + ceil_div(-self.credit, self.idle_slope)

    def on_tx_start(self, now, tx_time):
        self.advance(now)
        self.transmitting = True

    def on_tx_end(self, now):
        self.advance(now)
        self.transmitting = False
        if not self.backlog and self.credit > 0:
            self.credit = 0
            if self.trace is not None:
                self.trace.append((now, 0))


def cbs_update_credit(state, start, end, transmitting_self=False):
    """Credit of ``state`` after the interval [start, end), as a new state.

    The slope depends only on whether the queue transmits and whether frames
    wait; whether another queue occupies the link does not change it.
    """
    if end < start:
        raise ValueError("end must not precede start")
    new = copy(state)
    new.backlog = deque(state.backlog)
    new.trace = None
    new.last_update = start
    new.transmitting = transmitting_self
    new.advance(end)
    if not new.backlog and new.credit > 0:
        new.credit = 0
    return new


def cbs_eligible(state):
    return bool(state.backlog) and state.credit >= 0


class AtsFlowState:
    """Token bucket of one flow at one ATS port (tokens in nanobits)."""

    __slots__ = ("flow_id", "cir", "cbs", "tokens", "last_update")

    def __init__(self, flow_id, cir, cbs):
        if cir <= 0 or cbs <= 0:
            raise ValueError(f"flow {flow_id}: ATS cir and cbs must be positive")
        self.flow_id = flow_id
        self.cir = int(cir)
        self.cbs = int(cbs)
        self.tokens = self.cbs * SCALE
        self.last_update = 0

    def tokens_at(self, t):
        """Bucket content at ``t >= last_update`` without debiting."""
        return min(self.cbs * SCALE, self.tokens + self.cir * (t - self.last_update))


def ats_eligibility(flow, frame_len, arrival):
    """Eligibility time of a ``frame_len``-bit frame arriving at ``arrival``; debits the bucket.

    Eligibility is the first integer ns at or after both the arrival and the
    flow's previous eligibility time at which the bucket holds ``frame_len``.
    """
    need = frame_len * SCALE
    cap = flow.cbs * SCALE
    if need > cap:
        raise ValueError(
            f"flow {flow.flow_id}: frame of {frame_len} bits exceeds committed burst size {flow.cbs}"
        )
    t0 = max(arrival, flow.last_update)
    tokens = min(cap, flow.tokens + flow.cir * (t0 - flow.last_update))
    if tokens >= need:
        elig = t0
    else:
        elig = t0 + ceil_div(need - tokens, flow.cir)
        tokens = min(cap, tokens + flow.cir * (elig - t0))
    flow.tokens = tokens - need
    flow.last_update = elig
    return elig


class AtsQueue(FifoQueue):
    """Shared ATS queue ordered by (eligibility time, arrival order)."""

    def __init__(self, queue_id, flow_params):
        self.queue_id = queue_id
        self.bytes = 0
        self.flows = {fid: AtsFlowState(fid, cir, cbs) for fid, (cir, cbs) in flow_params.items()}
        self._heap = []
        self._count = 0

    def __len__(self):
        return len(self._heap)

    def enqueue(self, frame, now):
        try:
            state = self.flows[frame.flow_id]
        except KeyError:
            raise ValueError(f"no ATS parameters for flow {frame.flow_id} at queue {self.queue_id}") from None
        frame.eligible = ats_eligibility(state, frame.size * 8, now)
        heapq.heappush(self._heap, (frame.eligible, self._count, frame))
        self._count += 1
        self.bytes += frame.size

    def peek(self):
        return self._heap[0][2] if self._heap else None

    def head(self, now):
        if self._heap and self._heap[0][0] <= now:
            return self._heap[0][2]
        return None

    def pop(self, now):
        _, _, frame = heapq.heappop(self._heap)
        self.bytes -= frame.size
        return frame

    def next_eligible_time(self, now):
        if self._heap and self._heap[0][0] > now:
            return self._heap[0][0]
        return None

    @property
    def backlog(self):
        return [entry[2] for entry in sorted(self._heap)]


def ats_queue_head(queue, now):
    return queue.head(now)


class DrrQueueState(FifoQueue):
    """FIFO queue with a DRR deficit counter; quantum and deficit in millibytes."""

    def __init__(self, queue_id, quantum_bytes):
        super().__init__(queue_id)
        self.quantum = round(quantum_bytes * MILLI)
        if self.quantum <= 0:
            raise ValueError(f"queue {queue_id}: DRR quantum must be positive")
        self.deficit = 0

    @property
    def deficit_bytes(self):
        return self.deficit / MILLI
