"""Traffic sources: periodic deterministic bursts and two-state MMPP."""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Union

from tsnsim.kernel import NS_PER_S


@dataclass(frozen=True)
class FixedSize:
    size: int

    def __post_init__(self):
        if self.size <= 0:
            raise ValueError(f"frame size must be positive, got {self.size}")

    @property
    def max(self):
        return self.size

    @property
    def mean(self):
        return float(self.size)


@dataclass(frozen=True)
class UniformSize:
    min: int
    max: int

    def __post_init__(self):
        if not 0 < self.min <= self.max:
            raise ValueError(f"uniform size bounds must satisfy 0 < min <= max, got {self.min}, {self.max}")

    @property
    def mean(self):
        return (self.min + self.max) / 2


SizeDist = Union[FixedSize, UniformSize]


def sample_size(dist, rng):
    """Frame size in bytes drawn from ``dist``."""
    if isinstance(dist, FixedSize):
        return dist.size
    if dist.min == dist.max:
        return dist.min
    return rng.integer(dist.min, dist.max)


@dataclass(frozen=True)
class DetBurst:
    """Every ``period`` ns, ``burst_len`` frames are queued at once, starting at ``offset``."""

    period: int
    burst_len: int
    size: SizeDist
    offset: int = 0

    def __post_init__(self):
        if isinstance(self.size, int):
            object.__setattr__(self, "size", FixedSize(self.size))
        if self.burst_len < 1:
            raise ValueError(f"burst_len must be >= 1, got {self.burst_len}")
        if self.period <= 0:
            raise ValueError(f"period must be positive, got {self.period}")
        if self.offset < 0:
            raise ValueError(f"offset must be non-negative, got {self.offset}")

    def mean_rate_bps(self):
        return self.burst_len * self.size.mean * 8 * NS_PER_S / self.period


@dataclass(frozen=True)
class Mmpp:
    """Two-state Markov-modulated Poisson source.

    ``rate_to_fast`` is the slow->fast transition rate and ``rate_to_slow`` the
    fast->slow one (both 1/s). ``iar_fast``/``iar_slow`` are the Poisson
    arrival rates (packets/s) within each phase.
    """

    rate_to_fast: float
    rate_to_slow: float
    iar_fast: float
    iar_slow: float
    size: SizeDist

    def __post_init__(self):
        if isinstance(self.size, int):
            object.__setattr__(self, "size", FixedSize(self.size))
        for name in ("rate_to_fast", "rate_to_slow", "iar_fast", "iar_slow"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def stationary(self):
        """(P(fast), P(slow)) of the modulating chain."""
        total = self.rate_to_fast + self.rate_to_slow
        return self.rate_to_fast / total, self.rate_to_slow / total

    def mean_packet_rate(self):
        p_fast, p_slow = self.stationary()
        return p_fast * self.iar_fast + p_slow * self.iar_slow

    def mean_rate_bps(self):
        return self.mean_packet_rate() * self.size.mean * 8


@dataclass(frozen=True)
class AtsParams:
    committed_burst_size: int  # bits
    committed_information_rate: int  # bits/s


@dataclass(frozen=True)
class FlowSpec:
    flow_id: str
    priority: int
    source_model: Union[DetBurst, Mmpp]
    path: tuple = ()
    shaping: Optional[AtsParams] = None
    nominal_rate_bps: Optional[float] = None
    stream_id: Optional[int] = None

    def __post_init__(self):
        if not 0 <= self.priority <= 7:
            raise ValueError(f"flow {self.flow_id}: priority must be in 0..7, got {self.priority}")
        path = tuple(self.path)
        object.__setattr__(self, "path", path)
        if path and len(set(path)) != len(path):
            raise ValueError(f"flow {self.flow_id}: path {path} contains a loop")

    @property
    def max_frame_size(self):
        return self.source_model.size.max

    def with_offset(self, offset):
        if not isinstance(self.source_model, DetBurst):
            raise TypeError(f"flow {self.flow_id} is not periodic")
        return replace(self, source_model=replace(self.source_model, offset=offset))


def det_next_burst(spec, n, rng=None):
    """Frames of burst ``n`` as (arrival ns, size bytes); all share one arrival instant."""
    model = spec.source_model if isinstance(spec, FlowSpec) else spec
    if not isinstance(model, DetBurst):
        raise TypeError("det_next_burst needs a DetBurst source")
    t = model.offset + n * model.period
    return [(t, sample_size(model.size, rng)) for _ in range(model.burst_len)]


class Phase(Enum):
    FAST = "fast"
    SLOW = "slow"


@dataclass
class MmppState:
    phase: Phase
    time: int = 0  # instant of the last arrival (or start), ns
    transitions: int = field(default=0, compare=False)


def mmpp_initial_state(spec, rng, start=0):
    """Start in a phase drawn from the stationary distribution."""
    model = spec.source_model if isinstance(spec, FlowSpec) else spec
    p_fast, _ = model.stationary()
    phase = Phase.FAST if rng.uniform() < p_fast else Phase.SLOW
    return MmppState(phase, start)


def mmpp_step(state, spec, rng):
    """Advance to the next arrival: returns (arrival ns, size bytes, new state).

    Within a phase the arrival clock and the phase-switch clock race; both are
    exponential, so redrawing them after a switch is exact.
    """
    model = spec.source_model if isinstance(spec, FlowSpec) else spec
    phase = state.phase
    t = state.time
    transitions = state.transitions
    while True:
        if phase is Phase.FAST:
            arrival_rate, switch_rate = model.iar_fast, model.rate_to_slow
        else:
            arrival_rate, switch_rate = model.iar_slow, model.rate_to_fast
        dt_arrival = rng.exponential(arrival_rate)
        dt_switch = rng.exponential(switch_rate)
        if dt_arrival <= dt_switch:
            t += round(dt_arrival * NS_PER_S)
            size = sample_size(model.size, rng)
            return t, size, MmppState(phase, t, transitions)
        t += round(dt_switch * NS_PER_S)
        phase = Phase.SLOW if phase is Phase.FAST else Phase.FAST
        transitions += 1


def period_from_rate(burst_len, size_bytes, rate_bps):
    """Burst period (ns) that yields ``rate_bps`` on average, rounded to the nearest ns."""
    return round(burst_len * size_bytes * 8 * NS_PER_S / rate_bps)


class Frame:
    """One frame in flight. ``hops`` collects (port, enqueued, tx_start, tx_end) per switch egress."""

    __slots__ = (
        "uid", "flow_id", "seq", "priority", "size", "created", "departure",
        "arrival", "hops", "hop_index", "eligible", "enqueued",
    )

    def __init__(self, uid, flow_id, seq, priority, size, created):
        self.uid = uid
        self.flow_id = flow_id
        self.seq = seq
        self.priority = priority
        self.size = size
        self.created = created
        self.departure = None
        self.arrival = None
        self.hops = []
        self.hop_index = 0
        self.eligible = created
        self.enqueued = created

    def __repr__(self):
        return f"Frame({self.flow_id}#{self.seq}, p{self.priority}, {self.size}B)"
