"""Gate control lists, guard-band aware start checks and a first-fit no-wait synthesizer."""

import bisect
import math
from collections import defaultdict
from dataclasses import dataclass, field

from tsnsim.traffic import DetBurst, FixedSize

ALL_OPEN = 0xFF


class SynthesisError(RuntimeError):
    """No no-wait schedule was found."""


def mask_from_bits(bits):
    """'10000000' -> mask with only queue 7 open (leftmost character is queue 7)."""
    if len(bits) != 8 or set(bits) - {"0", "1"}:
        raise ValueError(f"gate state must be an 8-character 0/1 string, got {bits!r}")
    return int(bits, 2)


def bits_from_mask(mask):
    return format(mask, "08b")


class GateControlList:
    """Cyclic list of (offset, gate mask) entries; entry i holds until entry i+1 starts.

    ``guard_band`` (ns) blocks a queue from starting a frame within that span
    before its gate closes whenever the closing coincides with a higher
    priority queue's gate opening.
    """

    def __init__(self, cycle, entries, guard_band=0):
        if cycle <= 0:
            raise ValueError("GCL cycle must be positive")
        entries = [(int(s), int(m)) for s, m in entries]
        if not entries or entries[0][0] != 0:
            raise ValueError("GCL entries must start at offset 0")
        starts = [s for s, _ in entries]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("GCL entry offsets must be strictly increasing")
        if starts[-1] >= cycle:
            raise ValueError("GCL entry offsets must lie inside the cycle")
        if guard_band < 0:
            raise ValueError("guard band must be non-negative")
        self.cycle = int(cycle)
        self.entries = entries
        self.guard_band = int(guard_band)
        self._starts = starts
        self._runs = {q: self._build_runs(q) for q in range(8)}

    @classmethod
    def all_open(cls):
        return cls(1, [(0, ALL_OPEN)])

    def mask_at(self, t):
        i = bisect.bisect_right(self._starts, t % self.cycle) - 1
        return self.entries[i][1]

    def _build_runs(self, q):
        """Open intervals of queue ``q`` as (start, end, guarded), unrolled around the wrap."""
        bit = 1 << q
        n = len(self.entries)
        bounds = self._starts + [self.cycle]
        runs = []
        for i, (s, m) in enumerate(self.entries):
            if not m & bit:
                continue
            e = bounds[i + 1]
            if runs and runs[-1][1] == s:
                runs[-1][1] = e
            else:
                runs.append([s, e])
        if not runs:
            return []
        if len(runs) == 1 and runs[0] == [0, self.cycle]:
            return [(-math.inf, math.inf, False)]
        if runs[0][0] == 0 and runs[-1][1] == self.cycle and len(runs) > 1:
            first = runs.pop(0)
            runs[-1][1] = self.cycle + first[1]
        out = []
        for s, e in runs:
            out.append((s, e, self._guarded_close(q, e % self.cycle)))
        # the wrapped run also covers the start of each cycle
        last_s, last_e, last_g = out[-1]
        if last_e > self.cycle:
            out.insert(0, (last_s - self.cycle, last_e - self.cycle, last_g))
        return out

    def _guarded_close(self, q, c):
        before = self.mask_at(c - 1)
        after = self.mask_at(c)
        opened = after & ~before
        return any(opened >> p & 1 for p in range(q + 1, 8))

    def _need(self, run, tx_time):
        return max(tx_time, self.guard_band) if run[2] else tx_time

    def is_open(self, queue, t):
        return bool(self.mask_at(t) >> queue & 1)

    def can_start(self, queue, t, tx_time):
        base = t - t % self.cycle
        tm = t - base
        for run in self._runs[queue]:
            if run[0] <= tm < run[1]:
                return run[1] - tm >= self._need(run, tx_time)
        return False

    def next_start(self, queue, t, tx_time):
        """Earliest instant >= t at which ``can_start`` holds, or None if never."""
        runs = self._runs[queue]
        if not runs:
            return None
        base = t - t % self.cycle
        for k in range(3):
            off = base + k * self.cycle
            for run in runs:
                s, e = run[0] + off, run[1] + off
                if e <= t:
                    continue
                cand = max(s, t)
                if e - cand >= self._need(run, tx_time):
                    return int(cand)
        return None

    def to_dict(self):
        return {
            "cycle_ns": self.cycle,
            "guard_band_ns": self.guard_band,
            "entries": [[s, bits_from_mask(m)] for s, m in self.entries],
        }

    @classmethod
    def from_dict(cls, data):
        entries = [(int(s), mask_from_bits(str(b))) for s, b in data["entries"]]
        return cls(int(data["cycle_ns"]), entries, int(data.get("guard_band_ns", 0)))

    def __eq__(self, other):
        return isinstance(other, GateControlList) and self.to_dict() == other.to_dict()

    def __repr__(self):
        return f"GateControlList(cycle={self.cycle}, entries={len(self.entries)}, guard_band={self.guard_band})"


def gate_open(gcl, queue, t):
    return gcl.is_open(queue, t)


def can_start(gcl, queue, t, frame_tx_time):
    if frame_tx_time <= 0:
        raise ValueError("frame_tx_time must be positive")
    return gcl.can_start(queue, t, frame_tx_time)


@dataclass
class NoWaitSchedule:
    hyperperiod: int
    offsets: dict
    gcls: dict
    windows: dict = field(default_factory=dict)  # port -> [(start, end, queue)] within one hyperperiod

    def to_dict(self):
        return {
            "hyperperiod_ns": self.hyperperiod,
            "offsets_ns": dict(self.offsets),
            "ports": {_port_name(p): g.to_dict() for p, g in self.gcls.items()},
        }


def _port_name(port):
    return port if isinstance(port, str) else f"{port[0]}->{port[1]}"


def _tx(size, rate, overhead):
    return -(-(size + overhead) * 8 * 1_000_000_000 // rate)


def _flow_windows(flow, offset, topology, overhead):
    """Per-port windows (port, start, end) of one burst released at ``offset``."""
    model = flow.source_model
    size = model.size.size
    path = flow.path
    tx = [_tx(size, topology.link_rate(path[j], path[j + 1]), overhead) for j in range(len(path) - 1)]
    windows = []
    lead = offset
    for j in range(len(path) - 1):
        if j and tx[j] > tx[0] and model.burst_len > 1:
            raise SynthesisError(f"flow {flow.flow_id}: slower downstream link breaks no-wait bursts")
        frames = []
        for k in range(model.burst_len):
            s = lead + k * tx[0]
            frames.append([s, s + tx[j]])
        merged = [frames[0]]
        for s, e in frames[1:]:
            if s == merged[-1][1]:
                merged[-1][1] = e
            else:
                merged.append([s, e])
        port = (path[j], path[j + 1])
        windows.extend((port, s, e) for s, e in merged)
        lead += tx[j]
    return windows


def _conflict_shift(reserved, x, length, hyper):
    """Smallest shift clearing the first reserved interval that overlaps [x, x+length)."""
    for a, b in reserved:
        for da in (0, hyper):
            if a + da < x + length and x < b + da:
                return b + da - x
    return 0


def synthesize_no_wait(flows, topology, guard_bands=None, overhead_bytes=0):
    """Greedy first-fit no-wait schedule for periodic flows.

    Flows are placed in order of (period, frame size, id). Each gets the
    smallest source offset for which none of its per-hop windows overlaps an
    already reserved window in the hyperperiod. Every switch egress on a
    scheduled path gets a GCL that opens only the scheduled queue during its
    windows and opens all other queues otherwise.
    """
    guard_bands = guard_bands or {}
    for f in flows:
        if not isinstance(f.source_model, DetBurst):
            raise SynthesisError(f"flow {f.flow_id}: only periodic flows can be scheduled")
        if not isinstance(f.source_model.size, FixedSize):
            raise SynthesisError(f"flow {f.flow_id}: scheduled flows need a fixed frame size")
        if len(f.path) < 2:
            raise SynthesisError(f"flow {f.flow_id}: path too short")
    if not flows:
        return NoWaitSchedule(1, {}, {})
    hyper = 1
    for f in flows:
        hyper = math.lcm(hyper, f.source_model.period)
    if hyper > 10 * 1_000_000_000:
        raise SynthesisError(f"hyperperiod {hyper} ns exceeds 10 s; periods are not commensurate")

    order = sorted(flows, key=lambda f: (f.source_model.period, f.source_model.size.size, f.flow_id))
    reserved = defaultdict(list)
    placed = defaultdict(list)
    offsets = {}
    for f in order:
        period = f.source_model.period
        reps = hyper // period
        offset = 0
        while True:
            if offset >= period:
                raise SynthesisError(f"no feasible offset for flow {f.flow_id}")
            shift = 0
            for port, s, e in _flow_windows(f, offset, topology, overhead_bytes):
                res = reserved[port]
                for m in range(reps):
                    shift = _conflict_shift(res, (s + m * period) % hyper, e - s, hyper)
                    if shift:
                        break
                if shift:
                    break
            if not shift:
                break
            offset += shift
        offsets[f.flow_id] = offset
        for port, s, e in _flow_windows(f, offset, topology, overhead_bytes):
            for m in range(reps):
                x = (s + m * period) % hyper
                y = x + (e - s)
                pieces = [(x, y)] if y <= hyper else [(x, hyper), (0, y - hyper)]
                for a, b in pieces:
                    bisect.insort(reserved[port], (a, b))
                    placed[port].append((a, b, f.priority))

    gcls = {}
    windows = {}
    for port, wins in placed.items():
        if not topology.is_switch(port[0]):
            continue
        wins = sorted(wins)
        windows[port] = wins
        gb = int(guard_bands.get(port, 0))
        gcls[port] = _gcl_from_windows(port, wins, hyper, gb)
    return NoWaitSchedule(hyper, offsets, gcls, windows)


def _gcl_from_windows(port, wins, hyper, guard_band):
    sched_mask = 0
    for _, _, q in wins:
        sched_mask |= 1 << q
    other = ALL_OPEN & ~sched_mask
    bounds = sorted({0, hyper} | {a for a, _, _ in wins} | {b for _, b, _ in wins})
    entries = []
    for a, b in zip(bounds, bounds[1:]):
        mask = 0
        for s, e, q in wins:
            if s <= a and b <= e:
                mask |= 1 << q
        if not mask:
            mask = other
        if entries and entries[-1][1] == mask:
            continue
        entries.append((a, mask))
    busy = sum(e - s for s, e, _ in wins)
    groups = sum(1 for i, (s, _, _) in enumerate(wins) if i == 0 or wins[i - 1][1] != s)
    if busy + groups * guard_band >= hyper:
        raise SynthesisError(
            f"port {_port_name(port)}: scheduled windows plus guard bands fill the whole cycle"
        )
    return GateControlList(hyper, entries, guard_band)
