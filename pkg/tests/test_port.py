import pytest
from hypothesis import given, settings, strategies as st

from helpers import LINK, drive_port, two_queue
from tsnsim.gcl import GateControlList, mask_from_bits
from tsnsim.metrics import idle_with_backlog
from tsnsim.port import Mode, PortConfig, PortConfigError, QueueConfig


def test_transmission_times():
    cfg = two_queue(Mode.SP)
    assert cfg.tx_time(1000) == 80_000
    assert cfg.tx_time(1542) == 123_360
    assert PortConfig(LINK, Mode.SP, [QueueConfig(7)], overhead_bytes=20).tx_time(1000) == 81_600
    # rates that do not divide evenly round up to whole ns
    assert PortConfig(3_000_000, Mode.SP, [QueueConfig(7)]).tx_time(1) == 2667


def test_lone_frame_starts_immediately():
    port, _, delivered = drive_port(two_queue(Mode.SP), [(500, 7, 1000)], audit=True)
    assert port.tx_log == [(500, 80_500, 7)]
    assert delivered[0][1] == 80_500


def test_strict_priority_serves_all_high_priority_first():
    arrivals = [(0, 6, 100), (0, 7, 1000), (0, 7, 1000), (10, 6, 100), (20, 7, 500)]
    port, _, delivered = drive_port(two_queue(Mode.SP), arrivals, audit=True)
    assert [q for _, _, q in port.tx_log] == [7, 7, 7, 6, 6]


def test_fifo_mode_ignores_priority():
    arrivals = [(0, 6, 100), (5, 7, 100), (10, 6, 100), (15, 7, 100)]
    _, frames, delivered = drive_port(two_queue(Mode.FIFO), arrivals)
    assert [f.uid for f, _ in delivered] == [0, 1, 2, 3]


def test_closed_gate_holds_frame_until_it_opens():
    gcl = GateControlList(1_000_000, [(0, mask_from_bits("01111111")), (300_000, mask_from_bits("10000000"))])
    port, _, _ = drive_port(two_queue(Mode.TAS, gcl=gcl), [(0, 7, 1000), (0, 6, 1000)], audit=True)
    assert port.tx_log == [(0, 80_000, 6), (300_000, 380_000, 7)]


def test_unmapped_priority_is_a_configuration_error():
    with pytest.raises(PortConfigError):
        drive_port(two_queue(Mode.SP), [(0, 3, 100)])


def test_config_validation():
    with pytest.raises(PortConfigError):
        two_queue(Mode.CBS, hp_kw={"idle_slope": 110_000_000})
    with pytest.raises(PortConfigError):
        PortConfig(LINK, Mode.CBS, [QueueConfig(7, idle_slope=70_000_000), QueueConfig(6, idle_slope=40_000_000)],
                   high_priority_set=(7, 6))
    with pytest.raises(PortConfigError):
        two_queue(Mode.CBS)
    with pytest.raises(PortConfigError):
        two_queue(Mode.DRR, hp_kw={"quantum": 100})
    with pytest.raises(PortConfigError):
        PortConfig(LINK, Mode.SP, [QueueConfig(7), QueueConfig(7)])
    with pytest.raises(PortConfigError):
        PortConfig(LINK, Mode.SP, [QueueConfig(8)])


def _audited(mode, arrivals, **kw):
    cfg = {
        Mode.SP: lambda: two_queue(Mode.SP),
        Mode.FIFO: lambda: two_queue(Mode.FIFO),
        Mode.DRR: lambda: two_queue(Mode.DRR, {"quantum": 700}, {"quantum": 300}),
        Mode.CBS: lambda: two_queue(Mode.CBS, {"idle_slope": 25_000_000}),
        Mode.ATS: lambda: PortConfig(LINK, Mode.ATS, [QueueConfig(7, ats_flows={"f7": (25_000_000, 12_000)}),
                                                    QueueConfig(6)]),
    }[mode]()
    port, frames, delivered = drive_port(cfg, arrivals, audit=True, record_samples=True, **kw)
    return port, frames, delivered


traffic = st.lists(st.tuples(st.integers(0, 3_000_000), st.sampled_from([6, 7]), st.integers(64, 1500)),
                   min_size=1, max_size=60)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([Mode.SP, Mode.FIFO, Mode.DRR]), traffic)
def test_work_conserving_modes_never_idle_with_backlog(mode, arrivals):
    port, frames, delivered = _audited(mode, arrivals)
    assert idle_with_backlog(port.tx_log, port.samples) == []
    assert len(delivered) == len(frames)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(list(Mode)), traffic)
def test_per_queue_order_and_conservation(mode, arrivals):
    if mode is Mode.TAS:
        mode = Mode.SP
    port, frames, delivered = _audited(mode, arrivals)
    assert sorted(f.uid for f, _ in delivered) == [f.uid for f in frames]
    for q in (6, 7):
        uids = [f.uid for f, _ in delivered if f.priority == q]
        assert uids == sorted(uids)
    starts = [s for s, _, _ in port.tx_log]
    ends = [e for _, e, _ in port.tx_log]
    assert all(e <= s for e, s in zip(ends, starts[1:]))


@pytest.mark.parametrize("mode", [Mode.CBS, Mode.ATS])
def test_shaped_modes_can_idle_with_backlog(mode):
    burst = [(0, 7, 1500, "f7")] * 6
    port, _, delivered = _audited(mode, burst)
    idle = idle_with_backlog(port.tx_log, port.samples)
    assert idle
    assert len(delivered) == 6
