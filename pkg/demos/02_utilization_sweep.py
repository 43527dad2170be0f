"""Mean best-effort delay on the one-hop network as high-priority utilization grows,
for every forwarding mode. Short runs by default; pass --duration 4 for smoother numbers.

    python3 demos/02_utilization_sweep.py [--duration SECONDS] [--seeds 1,2]
"""

import argparse

from tsnsim.runner import aggregate, sweep
from tsnsim.scenario import load

MODES = ["sp", "fifo", "cbs", "ats", "drr", "tas"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--duration", type=float, default=1.0)
    ap.add_argument("--seeds", default="1,2")
    args = ap.parse_args()
    config = load("onehop_fig6")
    seeds = [int(s) for s in args.seeds.split(",")]
    results, _ = sweep(config, MODES, seeds, None, int(args.duration * 1e9))
    means = aggregate(results, "mean_delay", "be")
    print("mean best-effort delay in us")
    print(f"{'U_h':>5} " + " ".join(f"{m:>7}" for m in MODES) + "   SP/best shaped")
    for u in config.points():
        row = [means[(u, m)][0] / 1e3 for m in MODES]
        best = min(means[(u, m)][0] for m in ("cbs", "ats", "drr"))
        print(f"{u:>5} " + " ".join(f"{v:7.0f}" for v in row) + f"   {means[(u, 'sp')][0] / best:5.2f}")


if __name__ == "__main__":
    main()
