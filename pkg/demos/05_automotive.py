"""The in-vehicle network with exponential best-effort inter-arrivals: strict priority makes
media frames wait behind whole camera bursts, the shapers spread those bursts out.

    python3 demos/05_automotive.py [--duration SECONDS]
"""

import argparse

from tsnsim.runner import run
from tsnsim.scenario import load


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--duration", type=float, default=2.0)
    args = ap.parse_args()
    config = load("automotive_fig10_markov")
    base = None
    for mode in ["sp", "cbs", "ats", "drr"]:
        r = run(config, mode, seed=1, duration=int(args.duration * 1e9), keep_series=False)
        base = base or r.be.mean_delay
        print(f"{mode:>4}: best-effort mean {r.be.mean_delay / 1e3:7.0f} us, p99 {r.be.p99_delay / 1e3:7.0f} us, "
              f"SP/this {base / r.be.mean_delay:5.1f}")


if __name__ == "__main__":
    main()
