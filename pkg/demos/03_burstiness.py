"""Burst length matters: longer high-priority bursts hurt best-effort frames under strict
priority but not under the shapers, while longer best-effort bursts erase the differences.

    python3 demos/03_burstiness.py [--duration SECONDS]
"""

import argparse

from tsnsim.runner import aggregate, sweep
from tsnsim.scenario import load


def table(name, modes, values, duration):
    config = load(name)
    results, _ = sweep(config, modes, [1], values, duration)
    means = aggregate(results, "mean_delay", "be")
    print(f"\n{name}: mean best-effort delay in us over {config.sweep_variable}")
    print(f"{config.sweep_variable:>5} " + " ".join(f"{m:>7}" for m in modes))
    for v in values:
        print(f"{v:>5} " + " ".join(f"{means[(v, m)][0] / 1e3:7.0f}" for m in modes))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--duration", type=float, default=1.0)
    args = ap.parse_args()
    duration = int(args.duration * 1e9)
    table("onehop_fig7a", ["sp", "cbs", "ats", "drr"], [1, 12, 24, 36], duration)
    table("onehop_fig7b", ["sp", "cbs", "ats", "drr"], [1, 12, 24, 36], duration)


if __name__ == "__main__":
    main()
