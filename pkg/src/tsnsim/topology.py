"""Nodes, links, static routes, builtin topologies and the hop-by-hop frame lifecycle."""

from enum import Enum

import networkx as nx

from tsnsim.kernel import EventKind, RngStream, Simulator, stream_id_for
from tsnsim.metrics import MetricSeries
from tsnsim.port import EgressPort, Mode, PortConfig
from tsnsim.traffic import DetBurst, Frame, det_next_burst, mmpp_initial_state, mmpp_step

DEFAULT_LINK_RATE = 100_000_000


class NodeKind(str, Enum):
    SOURCE = "source"
    SWITCH = "switch"
    SINK = "sink"


class TopologyError(ValueError):
    pass


class Topology:
    """Directed graph of nodes and links. Links added with :meth:`connect` are full duplex."""

    def __init__(self, name="custom"):
        self.name = name
        self.graph = nx.DiGraph()

    def add_node(self, node, kind):
        self.graph.add_node(node, kind=NodeKind(kind))

    def connect(self, a, b, rate=DEFAULT_LINK_RATE, duplex=True):
        for u, v in ((a, b), (b, a)) if duplex else ((a, b),):
            if u not in self.graph or v not in self.graph:
                raise TopologyError(f"link {u}->{v} references an unknown node")
            self.graph.add_edge(u, v, rate=int(rate))

    @property
    def nodes(self):
        return {n: d["kind"] for n, d in self.graph.nodes(data=True)}

    @property
    def links(self):
        return {(u, v): d["rate"] for u, v, d in self.graph.edges(data=True)}

    def kind(self, node):
        return self.graph.nodes[node]["kind"]

    def is_switch(self, node):
        return self.kind(node) is NodeKind.SWITCH

    def link_rate(self, u, v):
        try:
            return self.graph.edges[u, v]["rate"]
        except KeyError:
            raise TopologyError(f"no link {u}->{v}") from None

    def route(self, src, dst):
        """Shortest path (fewest hops; ties broken by node order) from ``src`` to ``dst``."""
        if self.kind(src) is not NodeKind.SOURCE:
            raise TopologyError(f"route must start at a source node, {src} is {self.kind(src).value}")
        if self.kind(dst) is not NodeKind.SINK:
            raise TopologyError(f"route must end at a sink node, {dst} is {self.kind(dst).value}")
        # sources and sinks are not transit nodes
        transit = self.graph.subgraph(
            [n for n, k in self.nodes.items() if k is NodeKind.SWITCH or n in (src, dst)]
        )
        try:
            return tuple(nx.shortest_path(transit, src, dst))
        except nx.NetworkXNoPath:
            raise TopologyError(f"no route from {src} to {dst}") from None

    def check_path(self, path):
        if len(path) < 2:
            raise TopologyError(f"path {path} is too short")
        if len(set(path)) != len(path):
            raise TopologyError(f"path {path} is not loop-free")
        if self.kind(path[0]) is not NodeKind.SOURCE or self.kind(path[-1]) is not NodeKind.SINK:
            raise TopologyError(f"path {path} must run from a source to a sink")
        for u, v in zip(path, path[1:]):
            if not self.graph.has_edge(u, v):
                raise TopologyError(f"path {path} uses missing link {u}->{v}")
            if u != path[0] and self.kind(u) is not NodeKind.SWITCH:
                raise TopologyError(f"path {path} transits non-switch node {u}")

    def egress_ports(self):
        """Switch egress ports as (node, next node) pairs."""
        return [(u, v) for u, v in self.graph.edges if self.is_switch(u)]


def one_hop(rate=DEFAULT_LINK_RATE):
    topo = Topology("one_hop")
    for n in ("hp0", "lp0"):
        topo.add_node(n, NodeKind.SOURCE)
    topo.add_node("sw0", NodeKind.SWITCH)
    topo.add_node("sink", NodeKind.SINK)
    for n in ("hp0", "lp0", "sink"):
        topo.connect(n, "sw0", rate)
    return topo


def star(n, rate=DEFAULT_LINK_RATE):
    if n < 1:
        raise TopologyError(f"star needs at least one high-priority source, got {n}")
    topo = Topology(f"star{n}")
    sources = [f"hp{i}" for i in range(n)] + ["lp0"]
    for s in sources:
        topo.add_node(s, NodeKind.SOURCE)
    topo.add_node("sw0", NodeKind.SWITCH)
    topo.add_node("sink", NodeKind.SINK)
    for s in sources + ["sink"]:
        topo.connect(s, "sw0", rate)
    return topo


def tree8x8(rate=DEFAULT_LINK_RATE):
    """Four leaf switches with two HP and two LP sources each, joined by a root switch."""
    topo = Topology("tree8x8")
    topo.add_node("root", NodeKind.SWITCH)
    topo.add_node("sink", NodeKind.SINK)
    topo.connect("root", "sink", rate)
    for leaf in range(4):
        sw = f"leaf{leaf}"
        topo.add_node(sw, NodeKind.SWITCH)
        topo.connect(sw, "root", rate)
        for i in (2 * leaf, 2 * leaf + 1):
            for prefix in ("hp", "lp"):
                src = f"{prefix}{i}"
                topo.add_node(src, NodeKind.SOURCE)
                topo.connect(src, sw, rate)
    return topo


def automotive(rate=DEFAULT_LINK_RATE):
    """Two switches in line.

    Front switch: three cameras and four control sources, plus the ADAS ECU
    sink (cameras, front control, multimedia) and the body ECU sink (rear
    control). Back switch: seven control sources and the multimedia source.
    """
    topo = Topology("automotive")
    for sw in ("sw_front", "sw_back"):
        topo.add_node(sw, NodeKind.SWITCH)
    topo.connect("sw_back", "sw_front", rate)
    for sink in ("ecu", "body_ecu"):
        topo.add_node(sink, NodeKind.SINK)
        topo.connect(sink, "sw_front", rate)
    front = [f"cam{i}" for i in range(3)] + [f"ctrl_f{i}" for i in range(4)]
    back = [f"ctrl_b{i}" for i in range(7)] + ["media"]
    for s in front:
        topo.add_node(s, NodeKind.SOURCE)
        topo.connect(s, "sw_front", rate)
    for s in back:
        topo.add_node(s, NodeKind.SOURCE)
        topo.connect(s, "sw_back", rate)
    return topo


BUILTINS = {"one_hop": one_hop, "star": star, "tree8x8": tree8x8, "automotive": automotive}


def expand_builtin(builtin, **params):
    try:
        factory = BUILTINS[builtin]
    except KeyError:
        raise TopologyError(f"unknown builtin topology {builtin!r}; choose from {sorted(BUILTINS)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise TopologyError(f"bad parameters for {builtin}: {exc}") from None


class _DetSource:
    def __init__(self, net, flow, port, rng):
        self.net, self.flow, self.port, self.rng = net, flow, port, rng
        self.n = 0
        self._schedule()

    def _schedule(self):
        t = self.flow.source_model.offset + self.n * self.flow.source_model.period
        if t <= self.net.duration:
            self.net.sim.at(t, EventKind.SOURCE_WAKEUP, self)

    def handle_event(self, ev):
        for t, size in det_next_burst(self.flow, self.n, self.rng):
            self.port.enqueue(self.net.new_frame(self.flow, size, t), t)
        self.n += 1
        self._schedule()


class _MmppSource:
    def __init__(self, net, flow, port, rng):
        self.net, self.flow, self.port, self.rng = net, flow, port, rng
        self.state = mmpp_initial_state(flow, rng)
        self._schedule()

    def _schedule(self):
        t, size, self.state = mmpp_step(self.state, self.flow, self.rng)
        if t <= self.net.duration:
            self.net.sim.at(t, EventKind.SOURCE_WAKEUP, self, size)

    def handle_event(self, ev):
        self.port.enqueue(self.net.new_frame(self.flow, ev.payload, ev.time), ev.time)
        self._schedule()


class Network:
    """One simulation run over a topology.

    ``port_configs`` maps switch egress (node, next) pairs to PortConfig; source
    egress ports are plain FIFOs at the link rate. Delay runs from the moment a
    frame has fully left its source to its reception at the sink.
    """

    def __init__(self, topology, flows, port_configs, seed=0, duration=0, warmup=0,
                 processing_delay=0, overhead_bytes=0, record_samples=True,
                 record_hops=False, audit=False, trace_credit=False):
        self.topology = topology
        self.flows = {f.flow_id: f for f in flows}
        self.duration = int(duration)
        self.processing_delay = int(processing_delay)
        self.sim = Simulator()
        self.metrics = MetricSeries(warmup_cutoff=int(warmup), seed=seed)
        self.generated = 0
        self.delivered = 0
        self._uid = 0
        self._seq = {f.flow_id: 0 for f in flows}
        self.frames_in_flight = {} if audit else None

        for f in flows:
            topology.check_path(f.path)
        used = {(f.path[i], f.path[i + 1]) for f in flows for i in range(len(f.path) - 1)}
        self.ports = {}
        for (u, v) in sorted(used):
            if topology.kind(u) is NodeKind.SOURCE:
                cfg = PortConfig(topology.link_rate(u, v), Mode.FIFO, overhead_bytes=overhead_bytes)
                port = EgressPort(f"{u}->{v}", cfg, self.sim)
            else:
                try:
                    cfg = port_configs[(u, v)]
                except KeyError:
                    raise TopologyError(f"no port configuration for switch egress {u}->{v}") from None
                port = EgressPort(f"{u}->{v}", cfg, self.sim, record_samples=record_samples,
                                  record_hops=record_hops, audit=audit, trace_credit=trace_credit)
            port.deliver = self._make_deliver(u, v)
            self.ports[(u, v)] = port

        self.sources = []
        for f in flows:
            rng = RngStream(seed, f.stream_id if f.stream_id is not None else stream_id_for(f.flow_id))
            port = self.ports[(f.path[0], f.path[1])]
            cls = _DetSource if isinstance(f.source_model, DetBurst) else _MmppSource
            self.sources.append(cls(self, f, port, rng))

    def new_frame(self, flow, size, t):
        seq = self._seq[flow.flow_id]
        self._seq[flow.flow_id] = seq + 1
        frame = Frame(self._uid, flow.flow_id, seq, flow.priority, size, t)
        self._uid += 1
        self.generated += 1
        if self.frames_in_flight is not None:
            self.frames_in_flight[frame.uid] = frame
        return frame

    def _make_deliver(self, u, v):
        kind = self.topology.kind(v)
        src_kind = self.topology.kind(u)

        def deliver(frame, now):
            self.deliver(frame, u, v, kind, src_kind, now)
        return deliver

    def deliver(self, frame, u, v, kind, src_kind, now):
        if src_kind is NodeKind.SOURCE:
            frame.departure = now
        frame.hop_index += 1
        if kind is NodeKind.SINK:
            frame.arrival = now
            self.delivered += 1
            if self.frames_in_flight is not None:
                del self.frames_in_flight[frame.uid]
            self.metrics.record_delay(frame.flow_id, frame.seq, frame.departure, now, frame)
            return
        path = self.flows[frame.flow_id].path
        if kind is not NodeKind.SWITCH or frame.hop_index + 1 >= len(path):
            raise TopologyError(f"frame {frame!r} stranded at {v}")
        port = self.ports[(v, path[frame.hop_index + 1])]
        if self.processing_delay:
            self.sim.at(now + self.processing_delay, EventKind.FRAME_ARRIVAL, port, frame)
        else:
            port.enqueue(frame, now)

    def switch_ports(self):
        return {k: p for k, p in self.ports.items() if self.topology.is_switch(k[0])}

    def in_system(self):
        queued = sum(p.backlog_frames + (1 if p.busy else 0) for p in self.ports.values())
        return queued + sum(
            1 for ev in self.sim._heap if not ev[3].cancelled and ev[3].kind is EventKind.FRAME_ARRIVAL
        )

    def run(self):
        self.sim.run(until=self.duration)
        for key, port in self.switch_ports().items():
            if port.samples is not None:
                for t, q, b, n in port.samples:
                    self.metrics.record_backlog(key[0], key[1], q, t, b, n)
        self.metrics.end_time = self.duration
        return self.metrics
