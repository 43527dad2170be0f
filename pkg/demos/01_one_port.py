"""A burst of six 1000 B high-priority frames meets a trickle of best-effort frames at one
100 Mbit/s egress port. The script prints who transmits when under each selection mode.

    python3 demos/01_one_port.py
"""

from tsnsim.kernel import EventKind, Simulator
from tsnsim.port import EgressPort, Mode, PortConfig, QueueConfig
from tsnsim.traffic import Frame

LINK = 100_000_000
ARRIVALS = [(0, 7, 1000)] * 6 + [(20_000 * k, 6, 500) for k in range(8)]

CONFIGS = {
    "sp": PortConfig(LINK, Mode.SP, [QueueConfig(7), QueueConfig(6)]),
    "cbs": PortConfig(LINK, Mode.CBS, [QueueConfig(7, idle_slope=25_000_000), QueueConfig(6)]),
    "ats": PortConfig(LINK, Mode.ATS, [QueueConfig(7, ats_flows={"f7": (25_000_000, 8000)}), QueueConfig(6)]),
    "drr": PortConfig(LINK, Mode.DRR, [QueueConfig(7, quantum=250), QueueConfig(6, quantum=750)]),
}


def timeline(config):
    sim = Simulator()
    port = EgressPort("sw0->sink", config, sim, audit=True)
    for uid, (t, prio, size) in enumerate(ARRIVALS):
        sim.at(t, EventKind.FRAME_ARRIVAL, port, Frame(uid, f"f{prio}", uid, prio, size, t))
    sim.run()
    return port.tx_log


def main():
    for mode, config in CONFIGS.items():
        log = timeline(config)
        marks = " ".join(f"{'H' if q == 7 else 'b'}@{s // 1000}" for s, _, q in log)
        print(f"{mode:>4}: {marks}")
        print(f"      last frame leaves at {log[-1][1] / 1000:.0f} us")
    print("H = 1000 B high-priority frame, b = 500 B best-effort frame, @ = start time in us")


if __name__ == "__main__":
    main()
