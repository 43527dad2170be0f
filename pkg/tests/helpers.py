from tsnsim.kernel import EventKind, Simulator
from tsnsim.port import EgressPort, PortConfig, QueueConfig
from tsnsim.traffic import Frame

LINK = 100_000_000

# Hand-built (idle_slope, arrivals) traces; times are multiples of the 80 ns byte time.
CBS_TRACES = [
    (25_000_000, [(0, "hp", 1000)]),
    (25_000_000, [(0, "be", 1000), (30_000, "hp", 1000), (30_000, "hp", 1000)]),
    (50_000_000, [(0, "hp", 1000)] * 3 + [(0, "be", 500)]),
    (50_000_000, [(0, "hp", 64), (0, "hp", 1500), (0, "be", 1500), (0, "be", 64), (160, "be", 200)]),
    (75_000_000, [(0, "be", 1400), (8_000, "hp", 300), (8_000, "hp", 300), (40_000, "be", 1400),
                  (200_000, "hp", 1000)]),
    (25_000_000, [(i * 96_000, "hp", 1000) for i in range(6)] + [(i * 40_000, "be", 400) for i in range(12)]),
    (50_000_000, [(0, "hp", 1000)] * 5 + [(400, "be", 1500)] * 5),
    (75_000_000, [(0, "hp", 84)] * 10 + [(0, "be", 1542)] * 3 + [(500_000, "hp", 84)] * 10),
    (25_000_000, [(80 * k, "hp", 100 + 37 * k) for k in range(8)] + [(80 * k + 40 * 80, "be", 900) for k in range(4)]),
    (50_000_000, [(0, "be", 1000), (79_920, "hp", 1000), (80_000, "be", 1000), (160_000, "hp", 200),
                  (1_000_000, "hp", 1000), (1_000_000, "be", 100)]),
]


def drive_port(config, arrivals, until=None, **port_kw):
    """Feed (time_ns, priority, size_bytes[, flow_id]) arrivals into one egress port and run.

    Returns (port, frames, delivered) where delivered is a list of (frame, time).
    """
    sim = Simulator()
    delivered = []
    port = EgressPort("p", config, sim, deliver=lambda f, t: delivered.append((f, t)), **port_kw)
    frames = []
    for uid, a in enumerate(sorted(arrivals, key=lambda a: a[0])):
        t, prio, size = a[:3]
        flow = a[3] if len(a) > 3 else f"f{prio}"
        frame = Frame(uid, flow, uid, prio, size, t)
        frames.append(frame)
        sim.at(t, EventKind.FRAME_ARRIVAL, port, frame)
    sim.run(until)
    return port, frames, delivered


def two_queue(mode, hp_kw=None, be_kw=None, link=LINK, **kw):
    hp = QueueConfig(7, **(hp_kw or {}))
    be = QueueConfig(6, **(be_kw or {}))
    return PortConfig(link, mode, [hp, be], **kw)


def one_hop_scenario(hp=None, be=None, **top):
    """Minimal one-hop scenario mapping for from_dict."""
    data = {
        "name": "t",
        "topology": {"builtin": "one_hop"},
        "duration_s": 0.05,
        "seeds": [1],
        "modes": ["sp"],
        "flows": [
            dict({"id": "hp", "source": "hp0", "sink": "sink", "priority": 7,
                  "det": {"period_ns": 400_000, "burst": 2, "size": 1000}}, **(hp or {})),
            dict({"id": "be", "source": "lp0", "sink": "sink", "priority": 6,
                  "det": {"period_ns": 300_000, "burst": 1, "size": 500}}, **(be or {})),
        ],
    }
    data.update(top)
    return data
