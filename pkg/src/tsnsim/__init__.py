"""Discrete-event simulator for TSN egress-port forwarding.

Implements strict priority, FIFO, credit-based shaping, asynchronous traffic
shaping, deficit round robin and time-aware gating, and measures what each
does to best-effort delay and backlog.
"""

from tsnsim.kernel import Event, EventKind, EventQueue, RngStream, SimulationError
from tsnsim.traffic import DetBurst, FixedSize, FlowSpec, Mmpp, MmppState, UniformSize
from tsnsim.shapers import AtsFlowState, CbsQueueState, ats_eligibility, cbs_eligible, cbs_update_credit
from tsnsim.gcl import GateControlList, SynthesisError, can_start, gate_open, synthesize_no_wait
from tsnsim.port import EgressPort, Mode, PortConfig, QueueConfig
from tsnsim.topology import Network, Topology, expand_builtin
from tsnsim.metrics import MetricSeries, Summary, moving_average, relative_to_baseline, summarize
from tsnsim.scenario import ScenarioConfig, ScenarioError, load
from tsnsim.runner import RunResult, plot_data, run, sweep

__version__ = "0.1.0"

__all__ = [
    "AtsFlowState",
    "CbsQueueState",
    "DetBurst",
    "EgressPort",
    "Event",
    "EventKind",
    "EventQueue",
    "FixedSize",
    "FlowSpec",
    "GateControlList",
    "MetricSeries",
    "Mmpp",
    "MmppState",
    "Mode",
    "Network",
    "PortConfig",
    "QueueConfig",
    "RngStream",
    "RunResult",
    "ScenarioConfig",
    "ScenarioError",
    "SimulationError",
    "Summary",
    "SynthesisError",
    "Topology",
    "UniformSize",
    "ats_eligibility",
    "can_start",
    "cbs_eligible",
    "cbs_update_credit",
    "expand_builtin",
    "gate_open",
    "load",
    "moving_average",
    "plot_data",
    "relative_to_baseline",
    "run",
    "summarize",
    "sweep",
    "synthesize_no_wait",
]
