"""Delay and backlog observations, summary statistics and CSV output."""

import bisect
import csv
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

UNDEFINED_RATIO = math.nan


class MetricSeries:
    """Raw observations of one run.

    Delays are kept per flow in delivery order. Backlog samples are
    (time, node, port, queue, bytes, frames) rows giving the queue content
    right after each change. Observations before ``warmup_cutoff`` are kept
    but flagged and left out of summaries.
    """

    def __init__(self, warmup_cutoff=0, seed=None, scenario_hash=None):
        self.warmup_cutoff = warmup_cutoff
        self.seed = seed
        self.scenario_hash = scenario_hash
        self.end_time = 0
        self.delays = {}  # flow -> ([seq], [departure], [arrival], [size])
        self.order = []  # (flow, index) in delivery order
        self.backlog = []
        self.hop_log = []  # (flow, seq, port, enqueued, tx_start, tx_end)

    def record_delay(self, flow, seq, departure, arrival, frame=None):
        if arrival < departure:
            raise AssertionError(f"flow {flow} seq {seq}: arrival {arrival} precedes departure {departure}")
        cols = self.delays.get(flow)
        if cols is None:
            cols = self.delays[flow] = ([], [], [], [])
        self.order.append((flow, len(cols[0])))
        cols[0].append(seq)
        cols[1].append(departure)
        cols[2].append(arrival)
        cols[3].append(frame.size if frame is not None else 0)
        if frame is not None and frame.hops:
            for port, enq, start, end in frame.hops:
                self.hop_log.append((flow, seq, port, enq, start, end))

    def record_backlog(self, node, port, queue, time, nbytes, nframes):
        self.backlog.append((time, node, port, queue, nbytes, nframes))

    def flows(self):
        return sorted(self.delays)

    def delay_values(self, flows=None, include_warmup=False):
        """Delays (ns) of the selected flows in delivery order."""
        wanted = None if flows is None else set(flows)
        out = []
        cut = self.warmup_cutoff
        for flow, i in self.order:
            if wanted is not None and flow not in wanted:
                continue
            _, dep, arr, _ = self.delays[flow]
            if include_warmup or dep[i] >= cut:
                out.append(arr[i] - dep[i])
        return out

    def delivered_bytes(self, flows=None, start=0, end=None):
        """Bytes of the selected flows received at sinks in [start, end)."""
        end = math.inf if end is None else end
        total = 0
        for flow, (_, _, arr, size) in self.delays.items():
            if flows is not None and flow not in flows:
                continue
            total += sum(s for a, s in zip(arr, size) if start <= a < end)
        return total

    def sorted_backlog(self):
        # stable: rows at equal time keep their recording order
        return sorted(self.backlog, key=lambda r: r[0])


@dataclass
class Summary:
    count: int = 0
    mean_delay: float = math.nan
    median_delay: float = math.nan
    p99_delay: float = math.nan
    max_delay: float = math.nan
    mean_backlog: float = math.nan
    max_backlog: float = math.nan

    def as_row(self, prefix=""):
        return {f"{prefix}{k}": v for k, v in asdict(self).items()}

    @classmethod
    def stat_names(cls):
        return [f.name for f in fields(cls)]


def delay_stats(values):
    if not len(values):
        return dict(count=0, mean_delay=math.nan, median_delay=math.nan, p99_delay=math.nan, max_delay=math.nan)
    a = np.asarray(values, dtype=np.int64)
    return dict(
        count=int(a.size),
        mean_delay=float(a.mean()),
        median_delay=float(np.median(a)),
        p99_delay=float(np.percentile(a, 99)),
        max_delay=float(a.max()),
    )


def backlog_stats(rows, start, end, queues=None):
    """Time-weighted mean and max of the summed backlog (bytes) of the selected queues over [start, end]."""
    by_key = {}
    for t, node, port, q, b, _ in rows:
        if queues is not None and q not in queues:
            continue
        by_key.setdefault((node, port, q), []).append((t, b))
    if end <= start or not by_key:
        return math.nan, math.nan
    times, deltas = [], []
    for series in by_key.values():
        prev = 0
        for t, b in series:
            times.append(t)
            deltas.append(b - prev)
            prev = b
    times = np.asarray(times, dtype=np.int64)
    deltas = np.asarray(deltas, dtype=np.int64)
    order = np.argsort(times, kind="stable")
    times, total = times[order], np.cumsum(deltas[order])
    # keep the last value at each instant
    last = np.r_[times[1:] != times[:-1], True]
    times, total = times[last], total[last]
    i0 = np.searchsorted(times, start, side="right") - 1
    level0 = total[i0] if i0 >= 0 else 0
    inside = (times > start) & (times <= end)
    t_in, v_in = times[inside], total[inside]
    edges = np.r_[start, t_in, end]
    levels = np.r_[level0, v_in]
    area = float(np.sum(levels * np.diff(edges)))
    return area / (end - start), float(levels.max())


def summarize(series, flows=None, queues=None):
    """Summary of the selected flows' delays and the selected queue ids' backlog, after warm-up."""
    stats = delay_stats(series.delay_values(flows))
    mean_b, max_b = backlog_stats(series.backlog, series.warmup_cutoff, series.end_time, queues)
    return Summary(mean_backlog=mean_b, max_backlog=max_b, **stats)


def idle_with_backlog(tx_log, samples, start=0, end=None):
    """Intervals of positive length in which a port's link is idle while frames wait.

    ``tx_log`` holds (start, end, queue) transmissions and ``samples`` the
    port's (time, queue, bytes, frames) queue samples.
    """
    level = {}
    steps = []  # (time, total frames after all changes at that time)
    for t, q, _, n in sorted(samples, key=lambda r: r[0]):
        level[q] = n
        total = sum(level.values())
        if steps and steps[-1][0] == t:
            steps[-1] = (t, total)
        else:
            steps.append((t, total))
    if end is None:
        end = max([e for _, e, _ in tx_log] + [t for t, _ in steps] + [start])
    busy = sorted((s, e) for s, e, _ in tx_log)
    idle, cursor = [], start
    for s, e in busy:
        if s > cursor:
            idle.append((cursor, min(s, end)))
        cursor = max(cursor, e)
    if cursor < end:
        idle.append((cursor, end))
    out = []
    times = [t for t, _ in steps]
    for a, b in idle:
        if b <= a:
            continue
        i = bisect.bisect_right(times, a) - 1
        cur = steps[i][1] if i >= 0 else 0
        seg = a
        j = i + 1
        while True:
            nxt = steps[j][0] if j < len(steps) and steps[j][0] < b else b
            if cur > 0 and nxt > seg:
                if out and out[-1][1] == seg:
                    out[-1] = (out[-1][0], nxt)
                else:
                    out.append((seg, nxt))
            if nxt >= b:
                break
            cur = steps[j][1]
            seg = nxt
            j += 1
    return out


def moving_average(values, window):
    """Mean of the last ``window`` samples at every index; the first windows are partial."""
    if window < 1:
        raise ValueError("window must be >= 1")
    a = np.asarray(values, dtype=float)
    if not a.size:
        return []
    c = np.cumsum(np.r_[0.0, a])
    idx = np.arange(1, a.size + 1)
    lo = np.maximum(idx - window, 0)
    avg = (c[idx] - c[lo]) / (idx - lo)
    return list(zip(range(a.size), avg.tolist()))


def relative_to_baseline(summary, baseline):
    """Per-statistic ratio ``summary / baseline``; NaN where the baseline is zero or missing."""
    out = {}
    for name in Summary.stat_names():
        a, b = getattr(summary, name), getattr(baseline, name)
        if b is None or not b or math.isnan(b) or a is None or math.isnan(a):
            out[name] = UNDEFINED_RATIO
        else:
            out[name] = a / b
    return out


DELAY_COLUMNS = ["flow_id", "seq", "departure_ns", "arrival_ns", "delay_ns", "warmup_flag"]
BACKLOG_COLUMNS = ["time_ns", "node", "port", "queue", "bytes", "frames"]
HOP_COLUMNS = ["flow_id", "seq", "port", "enqueued_ns", "tx_start_ns", "tx_end_ns", "queuing_ns"]


def write_delays_csv(series, path):
    cut = series.warmup_cutoff
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DELAY_COLUMNS)
        for flow, i in series.order:
            seq, dep, arr, _ = series.delays[flow]
            w.writerow([flow, seq[i], dep[i], arr[i], arr[i] - dep[i], int(dep[i] < cut)])


def write_backlog_csv(series, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BACKLOG_COLUMNS)
        w.writerows(series.sorted_backlog())


def write_hops_csv(series, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HOP_COLUMNS)
        for flow, seq, port, enq, start, end in series.hop_log:
            w.writerow([flow, seq, port, enq, start, end, start - enq])


def read_delays_csv(path):
    with open(path, newline="") as fh:
        return [
            dict(r, seq=int(r["seq"]), departure_ns=int(r["departure_ns"]), arrival_ns=int(r["arrival_ns"]),
                 delay_ns=int(r["delay_ns"]), warmup_flag=int(r["warmup_flag"]))
            for r in csv.DictReader(fh)
        ]


def write_rows_csv(rows, path, columns=None):
    """Write dict rows to a path or an open text file; columns default to the first row's keys."""
    columns = columns or (list(rows[0]) if rows else [])
    if hasattr(path, "write"):
        _write_rows(path, rows, columns)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(fh, rows, columns)


def _write_rows(fh, rows, columns):
    w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(v) for k, v in r.items()})


def _fmt(v):
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return v
