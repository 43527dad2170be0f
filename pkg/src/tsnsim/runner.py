"""Single runs, parameter sweeps and per-figure data files."""

import math
import os
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from tsnsim.gcl import SynthesisError
from tsnsim.metrics import (
    Summary, moving_average, relative_to_baseline, summarize, write_backlog_csv,
    write_delays_csv, write_hops_csv, write_rows_csv,
)
from tsnsim.port import Mode
from tsnsim.scenario import ScenarioError, resolve
from tsnsim.topology import Network


@dataclass
class RunResult:
    scenario: str
    scenario_hash: str
    mode: str
    variable: str
    value: object
    seed: int
    be: Summary
    hp: Summary
    be_throughput_bps: float = math.nan
    generated: int = 0
    delivered: int = 0
    events: int = 0
    files: dict = field(default_factory=dict)
    series: object = None
    network: object = None
    error: str = ""

    @property
    def key(self):
        return (self.scenario_hash, self.seed, self.value)

    def row(self):
        row = {
            "scenario": self.scenario,
            "scenario_hash": self.scenario_hash,
            "mode": self.mode,
            "sweep_variable": self.variable or "",
            "sweep_value": "" if self.value is None else self.value,
            "seed": self.seed,
        }
        row.update(self.be.as_row("be_"))
        row.update(self.hp.as_row("hp_"))
        row["be_throughput_bps"] = self.be_throughput_bps
        row["generated"] = self.generated
        row["delivered"] = self.delivered
        row["error"] = self.error
        return row


def _dump_yaml(data, path):
    with open(path, "w") as fh:
        yaml.safe_dump(data, fh, sort_keys=True, default_flow_style=None)


def run(config, mode, value=None, seed=None, duration=None, out_dir=None, record_hops=None,
        audit=False, trace_credit=False, keep_series=True, keep_network=False):
    """One deterministic simulation of ``config`` under ``mode``; writes CSVs when ``out_dir`` is given."""
    mode = Mode(mode)
    seed = config.seeds[0] if seed is None else int(seed)
    res = resolve(config, mode, value, duration)
    hops = mode is Mode.TAS if record_hops is None else record_hops
    net = Network(
        res.topology, res.flows, res.port_configs, seed=seed, duration=res.duration, warmup=res.warmup,
        processing_delay=config.processing_delay, overhead_bytes=config.overhead_bytes,
        record_samples=True, record_hops=hops, audit=audit, trace_credit=trace_credit,
    )
    series = net.run()
    series.scenario_hash = config.scenario_hash
    be_flows, hp_flows = res.be_flows(), res.hp_flows()
    series.be_flows = be_flows
    be = summarize(series, be_flows, res.be_queues())
    hp = summarize(series, hp_flows, res.hp_queues() if mode is not Mode.FIFO else set())
    span = res.duration - res.warmup
    thr = series.delivered_bytes(set(be_flows), res.warmup, res.duration) * 8e9 / span if span > 0 else math.nan
    result = RunResult(
        config.name, config.scenario_hash, mode.value, config.sweep_variable, res.value, seed, be, hp,
        thr, net.generated, net.delivered, net.sim.n_fired,
    )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        files = {"delays": out / "delays.csv", "backlog": out / "backlog.csv",
                 "summary": out / "summary.csv", "resolved": out / "resolved.yaml"}
        write_delays_csv(series, files["delays"])
        write_backlog_csv(series, files["backlog"])
        write_rows_csv([result.row()], files["summary"])
        dump = res.to_dict()
        dump["seed"] = seed
        _dump_yaml(dump, files["resolved"])
        if series.hop_log:
            files["hops"] = out / "hops.csv"
            write_hops_csv(series, files["hops"])
        result.files = {k: str(v) for k, v in files.items()}
    if keep_series:
        result.series = series
    if keep_network:
        result.network = net
    return result


def _point_dir(out_dir, config, mode, value, seed):
    if out_dir is None:
        return None
    parts = [config.name, str(Mode(mode).value)]
    if config.sweep_variable:
        parts.append(f"{config.sweep_variable}={value}")
    parts.append(f"seed={seed}")
    return Path(out_dir).joinpath(*parts)


def _run_point(args):
    config, mode, value, seed, duration, out_dir, keep_series = args
    try:
        return run(config, mode, value, seed, duration, _point_dir(out_dir, config, mode, value, seed),
                   keep_series=keep_series)
    except SynthesisError as exc:
        # an infeasible schedule is a result of the sweep point, not a reason to abort the sweep
        return RunResult(config.name, config.scenario_hash, Mode(mode).value, config.sweep_variable,
                         value, seed, Summary(), Summary(), error=f"synthesis failed: {exc}")


def sweep(config, modes=None, seeds=None, values=None, duration=None, jobs=1, out_dir=None, keep_series=False):
    """Run every (value, mode, seed) combination; returns (results, tidy rows with ratios to SP).

    Without a sweep section the scenario is run once per (mode, seed).
    """
    if values is None:
        values = config.points()
    elif not config.sweep_variable:
        raise ScenarioError(f"{config.name}: values given but the scenario has no sweep section")
    values = list(values)
    if not values:
        raise ScenarioError("sweep.values: must be a non-empty list")
    modes = [Mode(m) for m in (modes or config.modes)]
    seeds = list(seeds or config.seeds)
    tasks = [(config, m, v, s, duration, out_dir, keep_series) for v in values for m in modes for s in seeds]
    if jobs and jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            results = list(pool.map(_run_point, tasks))
    else:
        results = [_run_point(t) for t in tasks]
    rows = comparison_table(results)
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        write_rows_csv(rows, Path(out_dir) / f"{config.name}_sweep.csv")
    return results, rows


RATIO_STATS = ("mean_delay", "median_delay", "p99_delay", "max_delay", "mean_backlog", "max_backlog")


def comparison_table(results):
    """Long-format rows, one per run, with BE statistics relative to SP at the same value and seed."""
    sp = {(r.value, r.seed): r for r in results if r.mode == Mode.SP.value}
    rows = []
    for r in results:
        row = r.row()
        base = sp.get((r.value, r.seed))
        ratios = relative_to_baseline(r.be, base.be) if base is not None else {}
        for s in RATIO_STATS:
            row[f"be_{s}_rel_sp"] = ratios.get(s, math.nan)
        rows.append(row)
    return rows


def aggregate(results, stat="mean_delay", group="be"):
    """{(value, mode): (mean, min, max) over seeds} of one summary statistic."""
    acc = defaultdict(list)
    for r in results:
        v = getattr(getattr(r, group), stat)
        if not math.isnan(v):
            acc[(r.value, r.mode)].append(v)
    return {k: (float(np.mean(v)), float(min(v)), float(max(v))) for k, v in acc.items()}


def _modes_in(results):
    order = [m.value for m in Mode]
    return sorted({r.mode for r in results}, key=order.index)


def plot_data(results, out_dir, figure=None, render=False, window=1000):
    """Write one CSV per figure analog (plus an SVG when ``render``); returns the written paths."""
    if not results:
        raise ValueError("plot_data needs at least one result")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = figure or results[0].scenario
    var = results[0].variable or "value"
    modes = _modes_in(results)
    values = sorted({r.value for r in results}, key=lambda v: (v is None, v))
    delay = aggregate(results, "mean_delay")
    backlog = aggregate(results, "mean_backlog")
    paths = []

    rows = []
    for v in values:
        sp_d = delay.get((v, Mode.SP.value))
        sp_b = backlog.get((v, Mode.SP.value))
        for m in modes:
            if (v, m) not in delay:
                continue
            d, dlo, dhi = delay[(v, m)]
            b = backlog.get((v, m), (math.nan,) * 3)[0]
            rows.append({
                var: v, "mode": m, "mean_delay_ns": d, "min_seed_mean_delay_ns": dlo,
                "max_seed_mean_delay_ns": dhi, "mean_backlog_bytes": b,
                "mean_delay_ratio_vs_SP": d / sp_d[0] if sp_d and sp_d[0] else math.nan,
                "mean_backlog_ratio_vs_SP": b / sp_b[0] if sp_b and sp_b[0] else math.nan,
            })
    path = out / f"{name}_be_delay.csv"
    write_rows_csv(rows, path)
    paths.append(path)

    with_series = [r for r in results if r.series is not None]
    if with_series:
        ma_rows, q_rows = [], []
        for m in modes:
            runs = [r for r in with_series if r.mode == m]
            if not runs:
                continue
            r = runs[0]
            be_flows = _be_flow_ids(r)
            vals = r.series.delay_values(be_flows)
            for idx, avg in moving_average(vals, window):
                ma_rows.append({"sample_index": idx, "mode": m, "moving_avg_delay_ns": avg})
            pooled = np.concatenate([np.asarray(x.series.delay_values(_be_flow_ids(x)), float) for x in runs])
            if pooled.size:
                q = np.percentile(pooled, [0, 25, 50, 75, 99, 100])
                q_rows.append({"mode": m, "count": int(pooled.size), "min_ns": q[0], "p25_ns": q[1],
                               "median_ns": q[2], "p75_ns": q[3], "p99_ns": q[4], "max_ns": q[5],
                               "mean_ns": float(pooled.mean())})
        for suffix, data in (("moving_avg", ma_rows), ("quantiles", q_rows)):
            if data:
                path = out / f"{name}_be_{suffix}.csv"
                write_rows_csv(data, path)
                paths.append(path)

    if render:
        paths.extend(_render(out, name, var, rows, modes))
    return [str(p) for p in paths]


def _be_flow_ids(result):
    return getattr(result.series, "be_flows", None)


def _render(out, name, var, rows, modes):
    os.environ.setdefault("MPLBACKEND", "Agg")
    import matplotlib.pyplot as plt

    paths = []
    fig, ax = plt.subplots(figsize=(5, 3.5))
    numeric = all(isinstance(r[var], (int, float)) for r in rows)
    for m in modes:
        pts = [(r[var], r["mean_delay_ns"] / 1e3) for r in rows if r["mode"] == m]
        if not pts:
            continue
        xs, ys = zip(*pts)
        if numeric:
            ax.plot(xs, ys, marker="o", label=m.upper())
        else:
            ax.bar([m.upper()], [ys[0]])
    ax.set_xlabel(var)
    ax.set_ylabel("mean BE delay [us]")
    if numeric:
        ax.legend()
    fig.tight_layout()
    path = out / f"{name}_be_delay.svg"
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)
    paths.append(path)
    return paths
