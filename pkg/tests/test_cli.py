import csv
import subprocess
import sys

import pytest
import yaml

from tsnsim.cli import main
from tsnsim.metrics import BACKLOG_COLUMNS, DELAY_COLUMNS

SHORT = "20000000"  # 20 ms


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_writes_outputs(tmp_path, capsys):
    assert main(["run", "--scenario", "onehop_fig6", "--mode", "cbs", "--seed", "2", "--value", "0.5",
                 "--duration", SHORT, "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "mode=cbs" in out and "U_h=0.5" in out
    with open(tmp_path / "delays.csv") as fh:
        assert fh.readline().strip().split(",") == DELAY_COLUMNS
    with open(tmp_path / "backlog.csv") as fh:
        assert fh.readline().strip().split(",") == BACKLOG_COLUMNS
    (summary,) = _rows(tmp_path / "summary.csv")
    assert summary["mode"] == "cbs" and summary["seed"] == "2"
    resolved = yaml.safe_load((tmp_path / "resolved.yaml").read_text())
    assert resolved["ports"]["sw0->sink"]["queues"][7]["idle_slope_bps"] == 50_000_000


def test_zero_duration_run_is_valid(tmp_path):
    assert main(["run", "--scenario", "onehop_fig6", "--mode", "sp", "--seed", "1", "--duration", "0",
                 "--out", str(tmp_path)]) == 0
    assert _rows(tmp_path / "delays.csv") == []


def test_sweep_row_count(tmp_path):
    assert main(["sweep", "--scenario", "onehop_fig5", "--modes", "sp,cbs", "--seeds", "1,2",
                 "--duration", SHORT, "--out", str(tmp_path), "--plot"]) == 0
    rows = _rows(tmp_path / "onehop_fig5_sweep.csv")
    assert len(rows) == 3 * 2 * 2
    assert {r["mode"] for r in rows} == {"sp", "cbs"}
    fig = _rows(tmp_path / "fig5_be_delay.csv")
    assert {"R", "mode", "mean_delay_ns", "mean_delay_ratio_vs_SP"} <= set(fig[0])
    assert len(fig) == 3 * 2


def test_sweep_to_stdout(capsys):
    assert main(["sweep", "--scenario", "onehop_fig6", "--modes", "sp", "--seeds", "1", "--values", "0.25",
                 "--duration", SHORT]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2 and lines[0].startswith("scenario,")


def test_validate(capsys):
    assert main(["validate", "--scenario", "automotive_fig10"]) == 0
    assert "valid" in capsys.readouterr().out
    assert main(["validate", "--scenario", "onehop_fig6", "--dump", "--mode", "cbs", "--value", "0.75"]) == 0
    dumped = yaml.safe_load(capsys.readouterr().out.split("\n", 4)[4])
    assert dumped["ports"]["sw0->sink"]["queues"][7]["idle_slope_bps"] == 75_000_000


def test_gcl_synth(tmp_path, capsys):
    out = tmp_path / "gcl.yaml"
    assert main(["gcl-synth", "--scenario", "onehop_fig6", "--value", "0.5", "--out", str(out)]) == 0
    data = yaml.safe_load(out.read_text())
    assert data["ports"]["sw0->sink"]["entries"][0][0] == 0
    assert set(data["offsets_ns"]) == {"hp"}


@pytest.mark.parametrize("argv", [
    ["validate", "--scenario", "no_such_scenario"],
    ["run", "--scenario", "automotive_fig10", "--mode", "sp", "--value", "3"],
])
def test_invalid_input_exits_2(argv, capsys):
    assert main(argv) == 2
    assert "error:" in capsys.readouterr().err


def test_bad_yaml_exits_2(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("name: [unclosed\n")
    assert main(["validate", "--scenario", str(bad)]) == 2
    bad.write_text("name: x\nflows: []\ntopology: {builtin: one_hop}\n")
    assert main(["validate", "--scenario", str(bad)]) == 2


def test_argument_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--scenario", "onehop_fig6", "--mode", "wfq"])
    assert exc.value.code == 2


def test_infeasible_schedule_exits_3(tmp_path, capsys):
    # one 1000 B frame every 160 us cannot be protected by a 112 us guard band
    assert main(["gcl-synth", "--scenario", "onehop_fig7a", "--value", "1", "--out", str(tmp_path / "g.yaml")]) == 3
    assert "SynthesisError" in capsys.readouterr().err
    assert main(["run", "--scenario", "onehop_fig7a", "--mode", "tas", "--value", "1", "--duration", SHORT]) == 3


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tsnsim", "validate", "--scenario", "onehop_fig7b"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "valid" in proc.stdout
