"""Scenario files: loading, validation and resolution into a runnable network description.

A scenario is a YAML mapping. Numeric fields may be expressions over the
sweep variables (``R``, ``U_h``, ``b_h``, ``b_l``, ``N``), the replica index
``i`` of a replicated flow, and, inside port parameters, ``F``: the number of
high-priority flows crossing that port. See ``docs/scenario-format.md``.
"""

import ast
import copy
import hashlib
import json
import math
import operator
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from tsnsim.gcl import GateControlList, SynthesisError, synthesize_no_wait
from tsnsim.kernel import NS_PER_S
from tsnsim.port import Mode, PortConfig, PortConfigError, QueueConfig
from tsnsim.topology import DEFAULT_LINK_RATE, NodeKind, Topology, TopologyError, expand_builtin
from tsnsim.traffic import DetBurst, FixedSize, FlowSpec, Mmpp, UniformSize, AtsParams

SWEEP_VARIABLES = ("R", "U_h", "b_h", "b_l", "N")
RATE_TOLERANCE = 0.15


class ScenarioError(ValueError):
    """Invalid scenario; the message names the offending field."""


# expressions

_BINOPS = {
    ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
    ast.Div: operator.truediv, ast.FloorDiv: operator.floordiv, ast.Pow: operator.pow,
    ast.Mod: operator.mod,
}
_FUNCS = {"min": min, "max": max, "round": round, "ceil": math.ceil, "floor": math.floor}


def _parse(expr, where):
    try:
        return ast.parse(str(expr).strip(), mode="eval").body
    except SyntaxError:
        raise ScenarioError(f"{where}: cannot parse expression {expr!r}") from None


def _eval_node(node, env, where, text):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return node.value
    if isinstance(node, ast.Name):
        if node.id not in env:
            raise ScenarioError(f"{where}: unknown variable {node.id!r} in {text!r}")
        return env[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        a = _eval_node(node.left, env, where, text)
        b = _eval_node(node.right, env, where, text)
        try:
            return _BINOPS[type(node.op)](a, b)
        except ZeroDivisionError:
            raise ScenarioError(f"{where}: division by zero in {text!r}") from None
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand, env, where, text)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS and not node.keywords:
        return _FUNCS[node.func.id](*(_eval_node(a, env, where, text) for a in node.args))
    raise ScenarioError(f"{where}: unsupported syntax in expression {text!r}")


def evaluate(expr, env, where="value"):
    """Evaluate a number or an arithmetic expression string against ``env``.

    >>> evaluate("1000*U_h", {"U_h": 0.5})
    500.0
    """
    if isinstance(expr, bool) or expr is None:
        raise ScenarioError(f"{where}: expected a number or expression, got {expr!r}")
    if isinstance(expr, (int, float)):
        return expr
    if isinstance(expr, str):
        return _eval_node(_parse(expr, where), env, where, expr)
    raise ScenarioError(f"{where}: expected a number or expression, got {type(expr).__name__}")


def expression_names(expr):
    if isinstance(expr, str):
        try:
            tree = ast.parse(expr.strip(), mode="eval")
        except SyntaxError:
            return set()
        return {n.id for n in ast.walk(tree) if isinstance(n, ast.Name)} - set(_FUNCS)
    return set()


def _walk_names(obj):
    if isinstance(obj, dict):
        return set().union(*(_walk_names(v) for v in obj.values())) if obj else set()
    if isinstance(obj, list):
        return set().union(*(_walk_names(v) for v in obj)) if obj else set()
    return expression_names(obj)


def _as_int(value, where, minimum=None):
    v = float(value)
    if not v.is_integer():
        raise ScenarioError(f"{where}: expected an integer, got {value}")
    v = int(v)
    if minimum is not None and v < minimum:
        raise ScenarioError(f"{where}: must be >= {minimum}, got {v}")
    return v


def _positive(value, where):
    if not value > 0:
        raise ScenarioError(f"{where}: must be positive, got {value}")
    return value


# configuration


@dataclass
class ScenarioConfig:
    name: str
    raw: dict
    source: str = "<dict>"
    description: str = ""
    figure: str = ""
    link_rate: int = DEFAULT_LINK_RATE
    duration: int = NS_PER_S
    warmup_fraction: float = 0.1
    seeds: list = field(default_factory=lambda: [1])
    modes: list = field(default_factory=lambda: [Mode.SP])
    variables: dict = field(default_factory=dict)
    sweep_variable: str = None
    sweep_values: list = field(default_factory=list)
    high_priority: tuple = (7,)
    processing_delay: int = 0
    overhead_bytes: int = 0

    @property
    def scenario_hash(self):
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(canon.encode()).hexdigest()

    def points(self):
        """Sweep values, or a single ``None`` when the scenario has no sweep."""
        return list(self.sweep_values) if self.sweep_variable else [None]

    def env(self, value=None):
        env = dict(self.variables)
        if self.sweep_variable and value is not None:
            env[self.sweep_variable] = value
        return env


def load(path):
    """Read and validate a scenario file. Shipped scenarios can be named without a path."""
    p = Path(path)
    if not p.exists():
        p = shipped_path(str(path))
    try:
        with open(p) as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{p}: not valid YAML: {exc}") from None
    return from_dict(data, source=str(p))


def shipped_path(name):
    stem = name[:-5] if name.endswith(".yaml") else name
    ref = resources.files("tsnsim") / "scenarios" / f"{stem}.yaml"
    if not ref.is_file():
        raise ScenarioError(f"scenario file {name!r} not found (shipped: {', '.join(shipped_scenarios())})")
    return Path(str(ref))


def shipped_scenarios():
    folder = resources.files("tsnsim") / "scenarios"
    return sorted(p.name[:-5] for p in folder.iterdir() if p.name.endswith(".yaml"))


_TOP_KEYS = {
    "name", "description", "figure", "link_rate_bps", "duration_s", "duration_ns", "warmup_fraction",
    "seeds", "modes", "variables", "sweep", "high_priority", "topology", "flows", "ports", "tas",
    "processing_delay_ns", "overhead_bytes",
}


def from_dict(data, source="<dict>"):
    if not isinstance(data, dict):
        raise ScenarioError(f"{source}: scenario must be a mapping")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ScenarioError(f"{source}: unknown top-level field(s) {sorted(unknown)}")
    for key in ("topology", "flows"):
        if key not in data:
            raise ScenarioError(f"{source}: missing required field {key!r}")
    raw = copy.deepcopy(data)
    cfg = ScenarioConfig(name=str(data.get("name", Path(source).stem)), raw=raw, source=source)
    cfg.description = str(data.get("description", "")).strip()
    cfg.figure = str(data.get("figure", ""))
    variables = data.get("variables") or {}
    if not isinstance(variables, dict):
        raise ScenarioError("variables: must be a mapping")
    cfg.variables = {k: evaluate(v, {}, f"variables.{k}") for k, v in variables.items()}
    cfg.link_rate = _as_int(evaluate(data.get("link_rate_bps", DEFAULT_LINK_RATE), {}, "link_rate_bps"), "link_rate_bps", 1)
    if "duration_ns" in data:
        cfg.duration = _as_int(evaluate(data["duration_ns"], {}, "duration_ns"), "duration_ns", 0)
    else:
        cfg.duration = round(evaluate(data.get("duration_s", 1), {}, "duration_s") * NS_PER_S)
        if cfg.duration < 0:
            raise ScenarioError("duration_s: must be non-negative")
    wf = evaluate(data.get("warmup_fraction", 0.1), {}, "warmup_fraction")
    if not 0 <= wf < 1:
        raise ScenarioError(f"warmup_fraction: must lie in [0, 1), got {wf}")
    cfg.warmup_fraction = wf
    seeds = data.get("seeds", [1])
    if not isinstance(seeds, list) or not seeds:
        raise ScenarioError("seeds: must be a non-empty list of integers")
    cfg.seeds = [_as_int(s, f"seeds[{k}]", 0) for k, s in enumerate(seeds)]
    modes = data.get("modes", ["sp"])
    try:
        cfg.modes = [Mode(str(m).lower()) for m in modes]
    except ValueError as exc:
        raise ScenarioError(f"modes: {exc}") from None
    hp = data.get("high_priority", [7])
    cfg.high_priority = tuple(sorted({_as_int(p, "high_priority", 0) for p in hp}, reverse=True))
    if any(p > 7 for p in cfg.high_priority):
        raise ScenarioError("high_priority: priorities must be in 0..7")
    cfg.processing_delay = _as_int(data.get("processing_delay_ns", 0), "processing_delay_ns", 0)
    cfg.overhead_bytes = _as_int(data.get("overhead_bytes", 0), "overhead_bytes", 0)

    sweep = data.get("sweep")
    if sweep is not None:
        var = sweep.get("variable")
        if var not in SWEEP_VARIABLES:
            raise ScenarioError(f"sweep.variable: must be one of {SWEEP_VARIABLES}, got {var!r}")
        values = sweep.get("values")
        if not isinstance(values, list) or not values:
            raise ScenarioError("sweep.values: must be a non-empty list")
        cfg.sweep_variable = var
        cfg.sweep_values = [evaluate(v, {}, f"sweep.values[{k}]") for k, v in enumerate(values)]
        used = _walk_names(data.get("flows")) | _walk_names(data.get("ports")) | _walk_names(data.get("topology"))
        if var not in used:
            raise ScenarioError(f"sweep.variable: {var} is not referenced by any flow, port or topology parameter")

    validate(cfg)
    return cfg


def validate(cfg):
    """Resolve every (mode, sweep value) pair without synthesizing schedules; raises ScenarioError."""
    for value in cfg.points():
        for mode in cfg.modes:
            resolve(cfg, mode, value, synthesize=False)
    return cfg


# resolution


@dataclass
class Resolved:
    """Everything one run needs, with all expressions evaluated."""

    config: ScenarioConfig
    mode: Mode
    value: object
    topology: Topology
    flows: list
    port_configs: dict
    duration: int
    warmup: int
    variables: dict
    schedule: object = None
    notes: list = field(default_factory=list)

    @property
    def high_priority(self):
        return self.config.high_priority

    def be_flows(self):
        return [f.flow_id for f in self.flows if f.priority not in self.config.high_priority]

    def hp_flows(self):
        return [f.flow_id for f in self.flows if f.priority in self.config.high_priority]

    def be_queues(self):
        if self.mode is Mode.FIFO:
            return None
        return {f.priority for f in self.flows if f.priority not in self.config.high_priority}

    def hp_queues(self):
        return set(self.config.high_priority)

    def to_dict(self):
        ports = {}
        for (u, v), pc in sorted(self.port_configs.items()):
            entry = {"link_rate_bps": pc.link_rate, "mode": pc.mode.value, "queues": {}}
            for q in pc.queues:
                qd = {}
                if q.idle_slope is not None:
                    qd["idle_slope_bps"] = q.idle_slope
                if q.quantum is not None:
                    qd["quantum_bytes"] = q.quantum
                if q.ats_flows:
                    qd["ats"] = {fid: {"cir_bps": c, "cbs_bits": b} for fid, (c, b) in sorted(q.ats_flows.items())}
                entry["queues"][q.queue_id] = qd
            if pc.gcl is not None:
                entry["gcl"] = pc.gcl.to_dict()
            ports[f"{u}->{v}"] = entry
        flows = []
        for f in self.flows:
            m = f.source_model
            fd = {"id": f.flow_id, "priority": f.priority, "path": list(f.path)}
            if isinstance(m, DetBurst):
                fd["det"] = {"period_ns": m.period, "burst": m.burst_len, "offset_ns": m.offset, "size": _size_dict(m.size)}
            else:
                fd["mmpp"] = {"to_fast": m.rate_to_fast, "to_slow": m.rate_to_slow, "fast": m.iar_fast,
                              "slow": m.iar_slow, "size": _size_dict(m.size)}
            fd["mean_rate_bps"] = m.mean_rate_bps()
            if f.shaping is not None:
                fd["ats"] = {"cir_bps": f.shaping.committed_information_rate, "cbs_bits": f.shaping.committed_burst_size}
            flows.append(fd)
        return {
            "scenario": self.config.name,
            "scenario_hash": self.config.scenario_hash,
            "mode": self.mode.value,
            "sweep": {self.config.sweep_variable: self.value} if self.config.sweep_variable else None,
            "variables": dict(sorted(self.variables.items())),
            "duration_ns": self.duration,
            "warmup_ns": self.warmup,
            "high_priority": list(self.config.high_priority),
            "processing_delay_ns": self.config.processing_delay,
            "overhead_bytes": self.config.overhead_bytes,
            "topology": {
                "nodes": {n: k.value for n, k in sorted(self.topology.nodes.items())},
                "links": [[u, v, r] for (u, v), r in sorted(self.topology.links.items())],
            },
            "flows": flows,
            "ports": ports,
            "notes": list(self.notes),
        }


def _size_dict(size):
    if isinstance(size, FixedSize):
        return size.size
    return {"uniform": [size.min, size.max]}


def _size(spec, env, where):
    if isinstance(spec, dict):
        if set(spec) != {"uniform"} or len(spec["uniform"]) != 2:
            raise ScenarioError(f"{where}: size must be a number or {{uniform: [min, max]}}")
        lo, hi = (_as_int(evaluate(x, env, where), where, 1) for x in spec["uniform"])
        try:
            return UniformSize(lo, hi)
        except ValueError as exc:
            raise ScenarioError(f"{where}: {exc}") from None
    return FixedSize(_as_int(evaluate(spec, env, where), where, 1))


def _build_topology(spec, env, link_rate):
    if not isinstance(spec, dict):
        raise ScenarioError("topology: must be a mapping")
    try:
        if "builtin" in spec:
            params = {k: _as_int(evaluate(v, env, f"topology.params.{k}"), f"topology.params.{k}")
                      for k, v in (spec.get("params") or {}).items()}
            return expand_builtin(spec["builtin"], rate=link_rate, **params)
        topo = Topology(spec.get("name", "custom"))
        nodes = spec.get("nodes")
        if not isinstance(nodes, dict) or not nodes:
            raise ScenarioError("topology.nodes: must map node ids to source|switch|sink")
        for n, kind in nodes.items():
            try:
                topo.add_node(str(n), NodeKind(kind))
            except ValueError:
                raise ScenarioError(f"topology.nodes.{n}: kind must be source, switch or sink, got {kind!r}") from None
        for k, link in enumerate(spec.get("links") or []):
            where = f"topology.links[{k}]"
            if isinstance(link, dict):
                a, b, rate = link.get("from"), link.get("to"), link.get("rate_bps", link_rate)
            else:
                a, b, rate = (list(link) + [link_rate])[:3]
            topo.connect(str(a), str(b), _as_int(evaluate(rate, env, where), where, 1))
        return topo
    except TopologyError as exc:
        raise ScenarioError(f"topology: {exc}") from None


def _expand_flows(specs, env):
    if not isinstance(specs, list) or not specs:
        raise ScenarioError("flows: must be a non-empty list")
    out = []
    for k, spec in enumerate(specs):
        where = f"flows[{k}]"
        if not isinstance(spec, dict):
            raise ScenarioError(f"{where}: must be a mapping")
        count = _as_int(evaluate(spec.get("count", 1), env, f"{where}.count"), f"{where}.count", 0)
        for i in range(count):
            out.append((f"{where}" if count == 1 else f"{where}[i={i}]", spec, dict(env, i=i), i))
    return out


def _fmt_name(template, i, where, key):
    try:
        return str(template).format(i=i)
    except (KeyError, IndexError, ValueError):
        raise ScenarioError(f"{where}.{key}: bad name pattern {template!r}") from None


def _build_flow(where, spec, env, i, topo, notes):
    for key in ("id", "priority"):
        if key not in spec:
            raise ScenarioError(f"{where}: missing required field {key!r}")
    fid = _fmt_name(spec["id"], i, where, "id")
    prio = _as_int(evaluate(spec["priority"], env, f"{where}.priority"), f"{where}.priority", 0)
    if prio > 7:
        raise ScenarioError(f"{where}.priority: must be in 0..7, got {prio}")

    if "path" in spec:
        path = tuple(_fmt_name(n, i, where, "path") for n in spec["path"])
    else:
        if "source" not in spec or "sink" not in spec:
            raise ScenarioError(f"{where}: give either path or source and sink")
        src = _fmt_name(spec["source"], i, where, "source")
        dst = _fmt_name(spec["sink"], i, where, "sink")
        for n, key in ((src, "source"), (dst, "sink")):
            if n not in topo.nodes:
                raise ScenarioError(f"{where}.{key}: unknown node {n!r}")
        try:
            path = topo.route(src, dst)
        except TopologyError as exc:
            raise ScenarioError(f"{where}: {exc}") from None
    try:
        topo.check_path(path)
    except (TopologyError, KeyError) as exc:
        raise ScenarioError(f"{where}.path: {exc}") from None

    models = [m for m in ("det", "mmpp", "poisson") if m in spec]
    if len(models) != 1:
        raise ScenarioError(f"{where}: exactly one of det, mmpp, poisson is required")
    kind = models[0]
    m = spec[kind]
    mw = f"{where}.{kind}"
    if not isinstance(m, dict):
        raise ScenarioError(f"{mw}: must be a mapping")
    size = _size(m.get("size", 1000), env, f"{mw}.size")
    if kind == "det":
        burst = _as_int(evaluate(m.get("burst", 1), env, f"{mw}.burst"), f"{mw}.burst", 1)
        offset = _as_int(evaluate(m.get("offset_ns", 0), env, f"{mw}.offset_ns"), f"{mw}.offset_ns", 0)
        if "period_ns" in m:
            period = _as_int(evaluate(m["period_ns"], env, f"{mw}.period_ns"), f"{mw}.period_ns", 1)
        elif "rate_bps" in m:
            rate = _positive(evaluate(m["rate_bps"], env, f"{mw}.rate_bps"), f"{mw}.rate_bps")
            exact = burst * size.mean * 8 * NS_PER_S / rate
            period = round(exact)
            if period < 1:
                raise ScenarioError(f"{mw}.rate_bps: rate too high for burst and frame size")
            if period != exact:
                notes.append(f"{fid}: period {exact:.3f} ns rounded to {period} ns")
        else:
            raise ScenarioError(f"{mw}: give period_ns or rate_bps")
        model = DetBurst(period, burst, size, offset)
    elif kind == "mmpp":
        vals = {}
        for key in ("to_fast", "to_slow", "fast", "slow"):
            if key not in m:
                raise ScenarioError(f"{mw}: missing required field {key!r}")
            vals[key] = _positive(evaluate(m[key], env, f"{mw}.{key}"), f"{mw}.{key}")
        model = Mmpp(vals["to_fast"], vals["to_slow"], vals["fast"], vals["slow"], size)
    else:
        if "rate" not in m:
            raise ScenarioError(f"{mw}: missing required field 'rate' (frames/s)")
        rate = _positive(evaluate(m["rate"], env, f"{mw}.rate"), f"{mw}.rate")
        # a Poisson source is an MMPP whose two phases share one rate
        model = Mmpp(1.0, 1.0, rate, rate, size)

    shaping = None
    if "ats" in spec:
        a = spec["ats"]
        cbs = _as_int(evaluate(a.get("cbs_bits"), env, f"{where}.ats.cbs_bits"), f"{where}.ats.cbs_bits", 1)
        cir = round(_positive(evaluate(a.get("cir_bps"), env, f"{where}.ats.cir_bps"), f"{where}.ats.cir_bps"))
        if size.max * 8 > cbs:
            raise ScenarioError(
                f"{where}.ats.cbs_bits: {cbs} bits is smaller than the largest frame ({size.max * 8} bits)"
            )
        shaping = AtsParams(cbs, cir)

    nominal = None
    if "nominal_rate_bps" in spec:
        nominal = evaluate(spec["nominal_rate_bps"], env, f"{where}.nominal_rate_bps")
        actual = model.mean_rate_bps()
        if nominal > 0 and abs(actual - nominal) / nominal > RATE_TOLERANCE:
            warnings.warn(f"{fid}: mean rate {actual:.4g} bit/s deviates from nominal {nominal:.4g} bit/s")
    try:
        return FlowSpec(fid, prio, model, path, shaping, nominal)
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def _port_params(ports_spec, key):
    ports_spec = ports_spec or {}
    merged = {}
    for section in ("cbs", "drr"):
        merged[section] = dict((ports_spec.get("default") or {}).get(section) or {})
    override = (ports_spec.get("per_port") or {}).get(key) or {}
    for section in ("cbs", "drr"):
        if section in override:
            merged[section].update(override[section])
    return merged


def _lookup(table, prio):
    if prio in table:
        return table[prio]
    if str(prio) in table:
        return table[str(prio)]
    return None


def _port_configs(cfg, mode, topo, flows, env, gcls=None):
    hp = set(cfg.high_priority)
    per_port = {}
    for f in flows:
        for u, v in zip(f.path, f.path[1:]):
            if topo.is_switch(u):
                per_port.setdefault((u, v), []).append(f)
    known = set((cfg.raw.get("ports") or {}).get("per_port") or {})
    stray = known - {f"{u}->{v}" for u, v in per_port}
    if stray:
        raise ScenarioError(f"ports.per_port: no flow crosses port(s) {sorted(stray)}")
    out = {}
    for (u, v), pflows in sorted(per_port.items()):
        key = f"{u}->{v}"
        where = f"ports.per_port.{key}"
        rate = topo.link_rate(u, v)
        params = _port_params(cfg.raw.get("ports"), key)
        penv = dict(env, F=sum(1 for f in pflows if f.priority in hp))
        prios = sorted({f.priority for f in pflows}, reverse=True)
        queues = []
        for p in prios:
            qc = QueueConfig(p)
            if mode is Mode.CBS and p in hp:
                expr = _lookup(params["cbs"], p)
                if expr is None:
                    raise ScenarioError(f"{where}.cbs.{p}: CBS mode needs an idleSlope for queue {p}")
                frac = evaluate(expr, penv, f"{where}.cbs.{p}")
                qc.idle_slope = _as_int(round(frac * rate), f"{where}.cbs.{p}", 1)
            if mode is Mode.DRR:
                expr = _lookup(params["drr"], p)
                if expr is None:
                    raise ScenarioError(f"{where}.drr.{p}: DRR mode needs a quantum for queue {p}")
                qc.quantum = _positive(evaluate(expr, penv, f"{where}.drr.{p}"), f"{where}.drr.{p}")
            if mode is Mode.ATS and p in hp:
                for f in pflows:
                    if f.priority != p:
                        continue
                    if f.shaping is None:
                        raise ScenarioError(f"flows.{f.flow_id}.ats: ATS mode needs cir and cbs for flow {f.flow_id}")
                    qc.ats_flows[f.flow_id] = (f.shaping.committed_information_rate, f.shaping.committed_burst_size)
            queues.append(qc)
        gcl = (gcls or {}).get((u, v)) if mode is Mode.TAS else None
        try:
            out[(u, v)] = PortConfig(rate, mode, queues, tuple(sorted(hp, reverse=True)), gcl, cfg.overhead_bytes)
        except PortConfigError as exc:
            raise ScenarioError(f"{where}: {exc}") from None
    return out


def guard_bands(cfg, topo, flows):
    """Per switch port: transmission time of the largest non-high-priority frame crossing it."""
    hp = set(cfg.high_priority)
    out = {}
    for f in flows:
        if f.priority in hp:
            continue
        for u, v in zip(f.path, f.path[1:]):
            if topo.is_switch(u):
                tx = -(-(f.max_frame_size + cfg.overhead_bytes) * 8 * NS_PER_S // topo.link_rate(u, v))
                out[(u, v)] = max(out.get((u, v), 0), tx)
    return out


def schedule_for(cfg, topo, flows, base_dir=None):
    """No-wait schedule for the high-priority flows, synthesized or read from ``tas.gcl_file``."""
    tas = cfg.raw.get("tas") or {}
    hp_flows = [f for f in flows if f.priority in cfg.high_priority]
    if tas.get("gcl_file"):
        path = Path(tas["gcl_file"])
        if not path.is_absolute() and base_dir is not None:
            path = Path(base_dir) / path
        return read_gcl_file(path)
    return synthesize_no_wait(hp_flows, topo, guard_bands(cfg, topo, flows), cfg.overhead_bytes)


def resolve(cfg, mode, value=None, duration=None, synthesize=True):
    mode = Mode(mode)
    if cfg.sweep_variable and value is None:
        value = cfg.sweep_values[0]
    env = cfg.env(value)
    missing = set(SWEEP_VARIABLES) & _walk_names(cfg.raw) - set(env) - {"F", "i"}
    if missing:
        raise ScenarioError(f"variables: no value for {sorted(missing)} (set it under variables or sweep)")
    topo = _build_topology(cfg.raw["topology"], env, cfg.link_rate)
    notes = []
    flows = [_build_flow(w, s, e, i, topo, notes) for w, s, e, i in _expand_flows(cfg.raw["flows"], env)]
    ids = [f.flow_id for f in flows]
    dupes = sorted({x for x in ids if ids.count(x) > 1})
    if dupes:
        raise ScenarioError(f"flows: duplicate flow id(s) {dupes}")
    duration = cfg.duration if duration is None else int(duration)
    schedule = None
    gcls = None
    if mode is Mode.TAS:
        for f in flows:
            if f.priority in cfg.high_priority and not isinstance(f.source_model, DetBurst):
                raise ScenarioError(f"flows.{f.flow_id}: TAS mode needs periodic high-priority flows")
        if synthesize:
            base = Path(cfg.source).parent if cfg.source != "<dict>" else None
            schedule = schedule_for(cfg, topo, flows, base)
            flows = [f.with_offset(schedule.offsets[f.flow_id]) if f.flow_id in schedule.offsets else f
                     for f in flows]
            gcls = schedule.gcls
    ports = _port_configs(cfg, mode, topo, flows, env, gcls)
    warmup = round(duration * cfg.warmup_fraction)
    return Resolved(cfg, mode, value, topo, flows, ports, duration, warmup, env, schedule, notes)


# GCL files


def write_gcl_file(schedule, path, scenario=None):
    data = {"scenario": scenario, **schedule.to_dict()}
    with open(path, "w") as fh:
        yaml.safe_dump(data, fh, sort_keys=True)


class _LoadedSchedule:
    def __init__(self, hyperperiod, offsets, gcls):
        self.hyperperiod = hyperperiod
        self.offsets = offsets
        self.gcls = gcls
        self.windows = {}

    def to_dict(self):
        return {
            "hyperperiod_ns": self.hyperperiod,
            "offsets_ns": dict(self.offsets),
            "ports": {f"{u}->{v}": g.to_dict() for (u, v), g in self.gcls.items()},
        }


def read_gcl_file(path):
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
        gcls = {}
        for key, g in (data.get("ports") or {}).items():
            u, v = key.split("->")
            gcls[(u, v)] = GateControlList.from_dict(g)
        return _LoadedSchedule(int(data["hyperperiod_ns"]), dict(data.get("offsets_ns") or {}), gcls)
    except (OSError, KeyError, ValueError, AttributeError, yaml.YAMLError) as exc:
        raise ScenarioError(f"tas.gcl_file: cannot read {path}: {exc}") from None


__all__ = [
    "ScenarioConfig", "ScenarioError", "Resolved", "SynthesisError", "evaluate", "load", "from_dict",
    "validate", "resolve", "shipped_scenarios", "write_gcl_file", "read_gcl_file", "guard_bands",
]
