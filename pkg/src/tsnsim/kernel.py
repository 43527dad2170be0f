"""Event queue, simulation clock and seeded random streams.

All times are integer nanoseconds. Events at the same instant are ordered by
kind rank first (state changes before the selections that read them), then by
the order in which they were scheduled.
"""

import heapq
import math
import zlib
from enum import IntEnum

import numpy as np

NS_PER_S = 1_000_000_000


class SimulationError(RuntimeError):
    """Internal logic error detected while simulating (e.g. scheduling in the past)."""


class EventKind(IntEnum):
    # value is the tie-break rank at equal time
    GATE_CHANGE = 0
    TRANSMISSION_COMPLETE = 1
    ELIGIBILITY_REACHED = 2
    CREDIT_ZERO_CROSSING = 3
    FRAME_ARRIVAL = 4
    SOURCE_WAKEUP = 5
    DRR_VISIT = 6


class Event:
    """A scheduled occurrence. The object itself is the cancellation handle."""

    __slots__ = ("time", "kind", "target", "payload", "seq", "cancelled", "fired")

    def __init__(self, time, kind, target=None, payload=None):
        self.time = time
        self.kind = kind
        self.target = target
        self.payload = payload
        self.seq = -1
        self.cancelled = False
        self.fired = False

    def sort_key(self):
        return (self.time, int(self.kind), self.seq)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __repr__(self):
        return f"Event(t={self.time}, {self.kind.name}, seq={self.seq})"


class EventQueue:
    """Priority queue of events plus the global clock.

    >>> q = EventQueue()
    >>> _ = q.schedule(Event(0, EventKind.FRAME_ARRIVAL))
    >>> _ = q.schedule(Event(0, EventKind.GATE_CHANGE))
    >>> q.pop_next().kind.name
    'GATE_CHANGE'
    """

    def __init__(self):
        self.now = 0
        self._heap = []
        self._seq = 0
        self.n_scheduled = 0
        self.n_fired = 0
        self.n_cancelled = 0

    def __len__(self):
        return self.n_scheduled - self.n_fired - self.n_cancelled

    def schedule(self, event):
        if event.time < self.now:
            raise SimulationError(
                f"cannot schedule {event.kind.name} at t={event.time} before clock t={self.now}"
            )
        if event.seq >= 0:
            raise SimulationError(f"{event!r} was already scheduled")
        event.seq = self._seq
        self._seq += 1
        self.n_scheduled += 1
        heapq.heappush(self._heap, (event.time, int(event.kind), event.seq, event))
        return event

    def at(self, time, kind, target=None, payload=None):
        """Shorthand for ``schedule(Event(time, kind, target, payload))``."""
        return self.schedule(Event(time, kind, target, payload))

    def cancel(self, event):
        if event.fired or event.cancelled or event.seq < 0:
            return False
        event.cancelled = True
        self.n_cancelled += 1
        return True

    def peek_time(self):
        heap = self._heap
        while heap and heap[0][3].cancelled:
            heapq.heappop(heap)
        return heap[0][0] if heap else None

    def pop_next(self):
        """Remove and return the least pending event, or ``None`` at end of simulation."""
        heap = self._heap
        while heap:
            _, _, _, ev = heapq.heappop(heap)
            if ev.cancelled:
                continue
            ev.fired = True
            self.n_fired += 1
            self.now = ev.time
            return ev
        return None


def stream_id_for(name):
    """Stable stream id derived from a flow name, independent of flow order."""
    return zlib.crc32(str(name).encode("utf-8"))


class RngStream:
    """Independent random stream for one traffic source.

    Backed by numpy's PCG64 seeded through ``SeedSequence(seed, spawn_key=(stream_id,))``.
    Every variate is derived from the stream of uniform doubles by inversion, so
    the values depend only on (seed, stream_id, draw index).
    """

    _BLOCK = 1024

    def __init__(self, seed, stream_id):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self._gen = np.random.Generator(np.random.PCG64(ss))
        self._buf = []
        self._pos = 0
        self.draws = 0

    def uniform(self):
        """Uniform double in [0, 1)."""
        if self._pos >= len(self._buf):
            self._buf = self._gen.random(self._BLOCK).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        self.draws += 1
        return u

    def exponential(self, rate):
        """Exponential variate with the given rate (1/s), in seconds."""
        return -math.log1p(-self.uniform()) / rate

    def integer(self, lo, hi):
        """Uniform integer in [lo, hi] inclusive."""
        return lo + min(int(self.uniform() * (hi - lo + 1)), hi - lo)


class Simulator(EventQueue):
    """Event loop with deferred selection.

    Components call :meth:`request_selection` when their state changed; the
    requests are served once every event of the current instant has been
    handled, so a frame arriving at t competes with frames released at t.
    """

    def __init__(self):
        super().__init__()
        self._pending = {}

    def request_selection(self, component):
        self._pending[component] = None

    def _flush(self):
        while self._pending:
            pending = self._pending
            self._pending = {}
            for component in pending:
                component.select(self.now)

    def run(self, until=None):
        """Process events up to and including ``until`` (all events if None)."""
        self._flush()
        while True:
            t = self.peek_time()
            if t is None or (until is not None and t > until):
                break
            ev = self.pop_next()
            ev.target.handle_event(ev)
            nt = self.peek_time()
            if nt is None or nt > ev.time:
                self._flush()
        if until is not None and until > self.now:
            self.now = until
