import csv

import pytest

from rvmfp.cli import main
from rvmfp.config import SimConfig, save
from rvmfp.io import read_diagnostics


@pytest.fixture
def write_cfg(tmp_path):
    def _write(cfg, name="c.ini"):
        p = tmp_path / name
        save(cfg, p)
        return str(p)
    return _write


def test_run_horizon_zero(write_cfg, tmp_path, capsys):
    path = write_cfg(SimConfig().with_(time={"T": 0.0}))
    assert main(["run", path, "--out", str(tmp_path / "o")]) == 0
    cols, data = read_diagnostics(tmp_path / "o" / "diagnostics.csv")
    assert data.shape[0] == 1
    assert "overall: PASS" in (tmp_path / "o" / "summary.txt").read_text()


def test_run_invalid_config_exit_2(write_cfg, capsys):
    path = write_cfg(SimConfig().with_(grid={"nx": 8}))
    assert main(["run", path]) == 2
    assert "CFL" in capsys.readouterr().err


def test_run_missing_file_exit_2(tmp_path):
    assert main(["run", str(tmp_path / "missing.ini")]) == 2


def test_run_monitor_failure_exit_3(write_cfg, small_config, tmp_path):
    cfg = small_config.with_(monitors={"gauss": -1.0})
    assert main(["run", write_cfg(cfg), "--out", str(tmp_path / "o")]) == 3
    assert "gauss: FAIL" in (tmp_path / "o" / "summary.txt").read_text()


def test_run_repeatable_with_snapshots(write_cfg, small_config, tmp_path):
    cfg = small_config.with_(output={"snapshot_every": 2})
    path = write_cfg(cfg)
    assert main(["run", path, "--out", str(tmp_path / "a")]) == 0
    assert main(["run", path, "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "diagnostics.csv").read_bytes()
    assert a == (tmp_path / "b" / "diagnostics.csv").read_bytes()
    assert sorted(p.name for p in (tmp_path / "a").glob("snap_*.bin")) == [
        "snap_000000.bin", "snap_000002.bin", "snap_000004.bin"]


def test_verify_filter(capsys):
    assert main(["verify", "--filter", "fields"]) == 0
    out = capsys.readouterr().out
    assert "Riemann round trip" in out and "diffusion" not in out
    assert main(["verify", "--filter", "nope"]) == 2


def test_verify_catches_flipped_force(monkeypatch, capsys):
    from rvmfp import transport

    real = transport.lorentz_force
    monkeypatch.setattr(transport, "lorentz_force",
                        lambda e1, e2, b, v1, v2: tuple(-k for k in real(e1, e2, b, v1, v2)))
    monkeypatch.setattr("rvmfp.verify.lorentz_force", transport.lorentz_force)
    assert main(["verify", "--filter", "transport"]) == 1
    assert "K-divergence" in capsys.readouterr().err


def test_picard_zero_data(write_cfg, tmp_path, capsys):
    path = write_cfg(SimConfig().with_(scenario={"name": "zero"}, time={"T": 0.25}))
    out = tmp_path / "p.csv"
    assert main(["picard", path, "--T", "0.25", "--tol", "1e-12", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 1 and float(rows[0]["sup_diff"]) == 0.0


def test_converge_zero_scenario(write_cfg, small_config, tmp_path):
    path = write_cfg(small_config.with_(scenario={"name": "zero"}))
    out = tmp_path / "c.csv"
    assert main(["converge", path, "--levels", "2", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert {r["metric"] for r in rows} == {
        "energy_defect", "continuity_residual", "wave_residual_B", "wave_residual_E2"}
    assert all(float(r["value"]) == 0.0 for r in rows)
    assert all(r["order"] == "exact" for r in rows if r["level"] == "1")


def test_bench(write_cfg, small_config, capsys):
    assert main(["bench", write_cfg(small_config), "--steps", "1"]) == 0
    assert "ms/step" in capsys.readouterr().out
