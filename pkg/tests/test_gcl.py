import pytest
from hypothesis import given, settings, strategies as st

from tsnsim.gcl import (
    GateControlList, SynthesisError, bits_from_mask, can_start, gate_open, mask_from_bits, synthesize_no_wait,
)
from tsnsim.port import Mode, PortConfig, QueueConfig
from tsnsim.topology import Network, one_hop, star
from tsnsim.traffic import DetBurst, FlowSpec, Mmpp, UniformSize

Q7 = mask_from_bits("10000000")
NOT_Q7 = mask_from_bits("01111111")
MS = 1_000_000


def _hp_window_gcl(guard=0):
    # BE open for [0, 500 us), q7 alone for [500, 580 us), BE again until the 1 ms cycle ends
    return GateControlList(MS, [(0, NOT_Q7), (500_000, Q7), (580_000, NOT_Q7)], guard)


def test_bitstring_leftmost_character_is_queue_7():
    assert mask_from_bits("10000000") == 1 << 7
    assert mask_from_bits("00000001") == 1
    assert bits_from_mask(0b01000001) == "01000001"
    for bad in ["1000000", "1000000x", "100000000"]:
        with pytest.raises(ValueError):
            mask_from_bits(bad)


def test_gate_lookup_and_wrap():
    g = GateControlList(MS, [(0, Q7), (500_000, NOT_Q7)])
    assert gate_open(g, 7, 100_000) and not gate_open(g, 6, 100_000)
    assert gate_open(g, 6, 500_000) and not gate_open(g, 7, 500_000)
    for q in range(8):
        assert gate_open(g, q, MS) == gate_open(g, q, 0)
        assert gate_open(g, q, 7 * MS + 600_000) == gate_open(g, q, 600_000)


def test_can_start_needs_the_whole_frame_to_fit():
    g = _hp_window_gcl()
    # 1542 B frame (123.36 us) with the HP window 100 us away would overrun it
    assert not can_start(g, 6, 400_000, 123_360)
    # exact fit
    assert can_start(g, 6, 420_000, 80_000)
    assert not can_start(g, 6, 420_001, 80_000)
    assert can_start(g, 7, 500_000, 80_000)
    assert not can_start(g, 7, 500_001, 80_000)
    with pytest.raises(ValueError):
        can_start(g, 6, 0, 0)


def test_guard_band_blocks_short_frames_before_a_higher_priority_window():
    g = _hp_window_gcl(guard=123_360)
    assert not can_start(g, 6, 420_000, 80_000)
    assert can_start(g, 6, 500_000 - 123_360, 80_000)
    # the run that wraps into the next cycle ends at the q7 window too
    assert can_start(g, 6, 580_000, 1000)
    assert not can_start(g, 6, MS + 400_000, 1000)


def test_next_start_finds_the_earliest_slot():
    g = _hp_window_gcl()
    assert g.next_start(6, 450_000, 80_000) == 580_000
    assert g.next_start(7, 0, 80_000) == 500_000
    assert g.next_start(7, 500_001, 80_000) == MS + 500_000
    assert g.next_start(7, 0, 90_000) is None
    closed = GateControlList(MS, [(0, NOT_Q7)])
    assert closed.next_start(7, 0, 1) is None


def test_wrapping_run_is_continuous_across_the_cycle_boundary():
    # q6 open for [900 us, 1 ms) and [0, 100 us): a 150 us frame fits starting at 900 us
    g = GateControlList(MS, [(0, 1 << 6), (100_000, Q7), (900_000, 1 << 6)])
    assert can_start(g, 6, 900_000, 150_000)
    assert can_start(g, 6, 2 * MS - 100_000, 200_000)
    assert not can_start(g, 6, 950_000, 200_000)


def test_invalid_lists_are_rejected():
    with pytest.raises(ValueError):
        GateControlList(MS, [(10, Q7)])
    with pytest.raises(ValueError):
        GateControlList(MS, [(0, Q7), (0, NOT_Q7)])
    with pytest.raises(ValueError):
        GateControlList(MS, [(0, Q7), (MS, NOT_Q7)])
    with pytest.raises(ValueError):
        GateControlList(0, [(0, Q7)])


def test_dict_round_trip():
    g = _hp_window_gcl(guard=120_000)
    d = g.to_dict()
    assert d["entries"][1] == [500_000, "10000000"]
    assert GateControlList.from_dict(d) == g


def _hp(fid, src, period, burst=1, size=1000, path=None):
    return FlowSpec(fid, 7, DetBurst(period, burst, size), path=path or (src, "sw0", "sink"))


def test_single_flow_gets_one_window_with_a_guard_band():
    sched = synthesize_no_wait([_hp("a", "hp0", MS)], one_hop(), {("sw0", "sink"): 123_360})
    g = sched.gcls[("sw0", "sink")]
    assert sched.offsets == {"a": 0}
    assert sched.windows[("sw0", "sink")] == [(80_000, 160_000, 7)]
    assert g.entries == [(0, NOT_Q7), (80_000, Q7), (160_000, NOT_Q7)]
    assert g.guard_band == 123_360
    assert not can_start(g, 6, 80_000 - 123_360 + 1, 1000)


def test_two_flows_sharing_a_link_do_not_overlap():
    flows = [_hp("a", "hp0", MS), _hp("b", "hp1", MS)]
    sched = synthesize_no_wait(flows, star(2))
    assert sched.offsets["b"] >= sched.offsets["a"] + 80_000
    wins = sched.windows[("sw0", "sink")]
    assert all(a[1] <= b[0] for a, b in zip(wins, wins[1:]))


def test_no_flows_gives_no_gates():
    sched = synthesize_no_wait([], one_hop())
    assert sched.gcls == {}


def test_synthesis_errors():
    with pytest.raises(SynthesisError):
        synthesize_no_wait([_hp("a", "hp0", 160_000)], one_hop(), {("sw0", "sink"): 123_360})
    with pytest.raises(SynthesisError):
        synthesize_no_wait([_hp("a", "hp0", 100_000, burst=2)], one_hop())
    mmpp = FlowSpec("m", 7, Mmpp(1, 1, 10, 10, 100), path=("hp0", "sw0", "sink"))
    with pytest.raises(SynthesisError):
        synthesize_no_wait([mmpp], one_hop())
    uniform = FlowSpec("u", 7, DetBurst(MS, 1, UniformSize(100, 200)), path=("hp0", "sw0", "sink"))
    with pytest.raises(SynthesisError):
        synthesize_no_wait([uniform], one_hop())


def _simulate(topo, hp_flows, be_flows, port_cfgs, duration):
    net = Network(topo, hp_flows + be_flows, port_cfgs, seed=1, duration=duration,
                  record_hops=True, audit=True)
    net.run()
    return net


def test_all_open_list_behaves_like_strict_priority():
    topo = one_hop()
    hp = _hp("h", "hp0", 300_000, burst=3)
    be = FlowSpec("b", 6, Mmpp(10, 40, 3750, 2690, UniformSize(200, 1400)), path=("lp0", "sw0", "sink"))
    delays = []
    for cfg in (PortConfig(100_000_000, Mode.SP, [QueueConfig(7), QueueConfig(6)]),
                PortConfig(100_000_000, Mode.TAS, [QueueConfig(7), QueueConfig(6)], gcl=GateControlList.all_open())):
        net = _simulate(topo, [hp], [be], {("sw0", "sink"): cfg}, 100 * MS)
        delays.append(net.metrics.delays)
    assert delays[0] == delays[1]


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.sampled_from([500_000, MS, 2 * MS]), st.integers(1, 3), st.integers(64, 1000)),
                min_size=1, max_size=3))
def test_synthesized_lists_give_zero_queuing_for_scheduled_frames(specs):
    n = len(specs)
    topo = star(n)
    flows = [_hp(f"h{i}", f"hp{i}", p, b, s) for i, (p, b, s) in enumerate(specs)]
    guard = 120_000  # 1500 B best-effort frames
    try:
        sched = synthesize_no_wait(flows, topo, {("sw0", "sink"): guard})
    except SynthesisError:
        return
    flows = [f.with_offset(sched.offsets[f.flow_id]) for f in flows]
    be = FlowSpec("be", 6, DetBurst(300_000, 2, 1500), path=("lp0", "sw0", "sink"))
    cfg = PortConfig(100_000_000, Mode.TAS, [QueueConfig(7), QueueConfig(6)], gcl=sched.gcls[("sw0", "sink")])
    net = _simulate(topo, flows, [be], {("sw0", "sink"): cfg}, 10 * MS)
    hops = [h for h in net.metrics.hop_log if h[0] != "be"]
    assert hops
    assert all(start == enq for _, _, _, enq, start, _ in hops)
    # no best-effort transmission overlaps a scheduled window
    hyper = sched.hyperperiod
    wins = sched.windows[("sw0", "sink")]
    for s, e, q in net.ports[("sw0", "sink")].tx_log:
        if q != 6:
            continue
        base = s - s % hyper
        for k in (-1, 0, 1):
            for a, b, _ in wins:
                assert e <= base + k * hyper + a or s >= base + k * hyper + b
