import subprocess
import sys

import pytest

import rdstc.cli as cli
from rdstc.errors import DivergenceError
from rdstc.records import BerRecord, BoundRecord, ConvergenceRecord, read_csv

BASE = "packets_per_point = 200\ntraining_packets = 20\nmin_errors = 0\nbound_draws = 20\ntrace_packets = 200\ntrace_every = 50\n"


@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text(BASE + "scheme = SM, D-Alamouti\nsnr_grid_db = 0, 10\n", encoding="utf-8")
    return p


def test_run_with_overrides(cfg_file, tmp_path, capsys):
    out = tmp_path / "ber.csv"
    code = cli.main(
        ["run", "--config", str(cfg_file), "--snr-start", "0", "--snr-stop", "4", "--snr-step", "2",
         "--scheme", "SM,ARMO", "--relays", "1", "--antennas", "2", "--packets", "300",
         "--seed", "7", "--direct-link", "true", "--out", str(out)]
    )
    assert code == 0
    recs = read_csv(out, BerRecord)
    assert [(r.snr_db, r.scheme) for r in recs] == [(s, x) for s in (0.0, 2.0, 4.0) for x in ("ARMO", "SM")]
    assert all(r.packets == 300 and r.seed == 7 for r in recs)
    assert "ARMO" in capsys.readouterr().out


def test_bounds(cfg_file, tmp_path):
    out = tmp_path / "bounds.csv"
    assert cli.main(["bounds", "--config", str(cfg_file), "--out", str(out)]) == 0
    assert len(read_csv(out, BoundRecord)) == 4
    assert len(read_csv(tmp_path / "bounds_sim.csv", BerRecord)) == 4


def test_converge(cfg_file, tmp_path):
    out = tmp_path / "trace.csv"
    assert cli.main(["converge", "--config", str(cfg_file), "--snr", "8", "--out", str(out)]) == 0
    assert len(read_csv(out, ConvergenceRecord)) == 16


def test_config_error_exit(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("scheme = QAM\n")
    assert cli.main(["run", "--config", str(bad)]) == 2


def test_partial_snr_override(cfg_file):
    assert cli.main(["run", "--config", str(cfg_file), "--snr-start", "0"]) == 2


def test_missing_config_exit(tmp_path):
    assert cli.main(["run", "--config", str(tmp_path / "absent.cfg")]) == 2


def test_io_error_exit(cfg_file, tmp_path):
    assert cli.main(["run", "--config", str(cfg_file), "--out", str(tmp_path / "no" / "dir.csv")]) == 4


def test_numeric_error_exit(cfg_file, tmp_path, monkeypatch, capsys):
    def boom(cfg, workers=None, out_path=None):
        raise DivergenceError("blew up", iteration=4, packet=12)

    monkeypatch.setattr(cli, "run_sweep", boom)
    assert cli.main(["run", "--config", str(cfg_file)]) == 3
    assert "packet 12" in capsys.readouterr().err


def test_console_script(cfg_file, tmp_path):
    out = tmp_path / "x.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "rdstc.cli", "run", "--config", str(cfg_file), "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.read_text().startswith("snr_db,scheme,bits_sent,bit_errors,ber,packets,seed\n")
