"""Egress port: eight priority queues, per-queue TSA, optional gates, strict-priority selection."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from tsnsim.kernel import EventKind, NS_PER_S
from tsnsim.shapers import MILLI, AtsQueue, CbsQueueState, DrrQueueState, FifoQueue


class Mode(str, Enum):
    SP = "sp"
    FIFO = "fifo"
    CBS = "cbs"
    ATS = "ats"
    DRR = "drr"
    TAS = "tas"


class PortConfigError(ValueError):
    pass


@dataclass
class QueueConfig:
    queue_id: int
    idle_slope: Optional[int] = None  # bits/s, CBS
    quantum: Optional[float] = None  # bytes, DRR
    ats_flows: dict = field(default_factory=dict)  # flow id -> (cir bits/s, cbs bits)


@dataclass
class PortConfig:
    link_rate: int
    mode: Mode = Mode.SP
    queues: list = field(default_factory=list)
    high_priority_set: tuple = (7,)
    gcl: object = None
    overhead_bytes: int = 0

    def __post_init__(self):
        self.mode = Mode(self.mode)
        self.validate()

    def validate(self):
        ids = [q.queue_id for q in self.queues]
        if len(set(ids)) != len(ids):
            raise PortConfigError(f"duplicate queue ids {ids}")
        if any(not 0 <= i <= 7 for i in ids):
            raise PortConfigError(f"queue ids must be in 0..7, got {ids}")
        if self.link_rate <= 0:
            raise PortConfigError("link rate must be positive")
        if self.mode is Mode.CBS:
            total = 0
            for q in self.queues:
                if q.queue_id in self.high_priority_set:
                    if not q.idle_slope:
                        raise PortConfigError(f"queue {q.queue_id}: CBS needs an idleSlope")
                    total += q.idle_slope
            if total > self.link_rate:
                raise PortConfigError(
                    f"sum of idleSlopes {total} bit/s exceeds link rate {self.link_rate} bit/s"
                )
        if self.mode is Mode.DRR:
            for q in self.queues:
                if not q.quantum or q.quantum <= 0:
                    raise PortConfigError(f"queue {q.queue_id}: DRR needs a positive quantum")

    def tx_time(self, size):
        return -(-(size + self.overhead_bytes) * 8 * NS_PER_S // self.link_rate)


class EgressPort:
    """One egress port. ``deliver(frame, now)`` is called when a transmission completes."""

    def __init__(self, name, config, sim, deliver=None, record_samples=False,
                 record_hops=False, audit=False, trace_credit=False):
        self.name = name
        self.config = config
        self.sim = sim
        self.deliver = deliver
        self.mode = config.mode
        self.gcl = config.gcl
        self.busy = False
        self.current = None
        self.record_hops = record_hops
        self.samples = [] if record_samples else None
        self.tx_log = [] if audit else None
        self.tx_count = 0
        self.tx_bytes = 0
        self._wakeup = None
        self._drr_pos = 0
        self._drr_visited = False

        rate = config.link_rate
        per_byte = 8 * NS_PER_S // rate
        self._ns_per_byte = per_byte if per_byte * rate == 8 * NS_PER_S else None

        self.queues = {}
        if self.mode is Mode.FIFO:
            self.queues[0] = FifoQueue(0)
        else:
            for qc in config.queues:
                self.queues[qc.queue_id] = self._make_queue(qc, trace_credit)
        self._by_priority = sorted(self.queues.values(), key=lambda q: -q.queue_id)

    def _make_queue(self, qc, trace_credit):
        hp = qc.queue_id in self.config.high_priority_set
        if self.mode is Mode.CBS and hp:
            return CbsQueueState(qc.queue_id, qc.idle_slope, self.config.link_rate, trace=trace_credit)
        if self.mode is Mode.ATS and hp:
            return AtsQueue(qc.queue_id, qc.ats_flows)
        if self.mode is Mode.DRR:
            return DrrQueueState(qc.queue_id, qc.quantum)
        return FifoQueue(qc.queue_id)

    def __repr__(self):
        return f"EgressPort({self.name}, {self.mode.value})"

    def queue_for(self, priority):
        if self.mode is Mode.FIFO:
            return self.queues[0]
        try:
            return self.queues[priority]
        except KeyError:
            raise PortConfigError(f"port {self.name}: no queue configured for priority {priority}") from None

    def tx_time(self, size):
        if self._ns_per_byte is not None:
            return (size + self.config.overhead_bytes) * self._ns_per_byte
        return self.config.tx_time(size)

    @property
    def backlog_frames(self):
        return sum(len(q) for q in self.queues.values())

    @property
    def backlog_bytes(self):
        return sum(q.bytes for q in self.queues.values())

    def _sample(self, now, q):
        if self.samples is not None:
            self.samples.append((now, q.queue_id, q.bytes, len(q)))

    def enqueue(self, frame, now):
        q = self.queue_for(frame.priority)
        frame.enqueued = now
        q.enqueue(frame, now)
        self._sample(now, q)
        if not self.busy:
            self.sim.request_selection(self)

    # selection

    def _choose(self, now):
        if self.mode is Mode.DRR:
            return self._drr_choose()
        gcl = self.gcl
        for q in self._by_priority:
            head = q.head(now)
            if head is None:
                continue
            if gcl is not None and not gcl.can_start(q.queue_id, now, self.tx_time(head.size)):
                continue
            return head, q
        return None, None

    def _drr_choose(self):
        ring = self._by_priority
        if not any(q.backlog for q in ring):
            return None, None
        n = len(ring)
        while True:
            q = ring[self._drr_pos]
            if q.backlog:
                if not self._drr_visited:
                    q.deficit += q.quantum
                    self._drr_visited = True
                head = q.backlog[0]
                need = head.size * MILLI
                if q.deficit >= need:
                    q.deficit -= need
                    return head, q
            else:
                q.deficit = 0
            self._drr_pos = (self._drr_pos + 1) % n
            self._drr_visited = False

    def _next_wakeup(self, now):
        best = None
        kind = None
        gcl = self.gcl
        for q in self._by_priority:
            head = q.peek()
            if head is None:
                continue
            t = q.next_eligible_time(now)
            k = EventKind.CREDIT_ZERO_CROSSING if isinstance(q, CbsQueueState) else EventKind.ELIGIBILITY_REACHED
            if t is None:
                t = now
            if gcl is not None:
                tg = gcl.next_start(q.queue_id, t, self.tx_time(head.size))
                if tg is None:
                    continue
                if tg > t:
                    t, k = tg, EventKind.GATE_CHANGE
            if t > now and (best is None or t < best):
                best, kind = t, k
        return best, kind

    def select(self, now):
        """Start the next transmission if the link is idle; returns the frame or None."""
        if self.busy:
            return None
        head, q = self._choose(now)
        if head is None:
            if self.backlog_frames:
                self._arm_wakeup(now)
            return None
        if self._wakeup is not None:
            self.sim.cancel(self._wakeup)
            self._wakeup = None
        frame = q.pop(now)
        if self.mode is Mode.DRR and not q.backlog:
            q.deficit = 0
            self._drr_pos = (self._drr_pos + 1) % len(self._by_priority)
            self._drr_visited = False
        tx = self.tx_time(frame.size)
        q.on_tx_start(now, tx)
        self.busy = True
        self.current = (frame, q)
        if self.record_hops:
            frame.hops.append((self.name, frame.enqueued, now, now + tx))
        if self.tx_log is not None:
            self.tx_log.append((now, now + tx, q.queue_id))
        self._sample(now, q)
        self.sim.at(now + tx, EventKind.TRANSMISSION_COMPLETE, self, frame)
        return frame

    def _arm_wakeup(self, now):
        t, kind = self._next_wakeup(now)
        w = self._wakeup
        if w is not None and not w.fired and not w.cancelled:
            if t is not None and w.time == t:
                return
            self.sim.cancel(w)
        self._wakeup = None if t is None else self.sim.at(t, kind, self)

    def handle_event(self, ev):
        if ev.kind is EventKind.TRANSMISSION_COMPLETE:
            frame, q = self.current
            self.current = None
            self.busy = False
            q.on_tx_end(ev.time)
            self.tx_count += 1
            self.tx_bytes += frame.size
            self.sim.request_selection(self)
            if self.deliver is not None:
                self.deliver(frame, ev.time)
        elif ev.kind is EventKind.FRAME_ARRIVAL:
            self.enqueue(ev.payload, ev.time)
        else:
            if ev is self._wakeup:
                self._wakeup = None
            self.sim.request_selection(self)
