import json
import shutil
import subprocess
import sys

import pytest

from haarlab.cli import main


def test_identities_exit_zero(tmp_path, capsys):
    out = tmp_path / "rep.json"
    assert main(["identities", "--depth", "3", "--dim", "1", "--trials", "2", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["config"]["depth"] == 3 and rep["passed"]
    assert "PASS  identities/haar_roundtrip" in capsys.readouterr().out


def test_zero_trials_is_invalid(capsys):
    assert main(["sandwich", "--trials", "0"]) == 2
    assert "invalid config" in capsys.readouterr().err


def test_bad_depth_is_invalid():
    assert main(["identities", "--depth", "12"]) == 2


def test_unknown_suite_rejected():
    with pytest.raises(SystemExit) as info:
        main(["nonsense"])
    assert info.value.code == 2


def test_config_file_with_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"depth": 2, "dim": 2, "trials": 5, "seed": 3}))
    out = tmp_path / "rep.json"
    assert main(["bmo", "--config", str(cfg), "--trials", "1", "--out", str(out), "--quiet"]) == 0
    conf = json.loads(out.read_text())["config"]
    assert (conf["depth"], conf["dim"], conf["trials"], conf["seed"]) == (2, 2, 1, 3)


def test_unreadable_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["bmo", "--config", str(bad)]) == 2
    bad.write_text(json.dumps({"depth": 2, "colour": "red"}))
    assert main(["bmo", "--config", str(bad)]) == 2


def test_emit_csv(tmp_path):
    d = tmp_path / "csv"
    assert main(["sandwich", "--depth", "2", "--dim", "1", "--trials", "1", "--emit-csv", str(d), "--quiet"]) == 0
    assert (d / "commutator_shift_trial0.csv").exists()
    assert main(["petermichl", "--depth", "4", "--trials", "1", "--emit-csv", str(d), "--quiet"]) == 0
    assert (d / "petermichl_kernel_N4.csv").exists()


def test_witness_replay(tmp_path):
    out = tmp_path / "rep.json"
    assert main(["bmo", "--depth", "3", "--dim", "2", "--trials", "1", "--out", str(out), "--quiet"]) == 0
    first = json.loads(out.read_text())["sections"]["bmo"]["data"]["first_report"]
    wfile = tmp_path / "w.json"
    wfile.write_text(json.dumps(first))
    out2 = tmp_path / "rep2.json"
    assert main(["bmo", "--depth", "3", "--dim", "2", "--trials", "1", "--out", str(out2),
                 "--witness", str(wfile), "--quiet"]) == 0
    replay = json.loads(out2.read_text())["sections"]["bmo"]["data"]["witness_replay"]
    assert replay[first["order"]] == pytest.approx(first["openset_norm"], abs=1e-12)


def test_both_backends_flag(tmp_path):
    out = tmp_path / "rep.json"
    assert main(["lower-bound", "--depth", "2", "--dim", "2", "--trials", "1", "--both-backends",
                 "--out", str(out), "--quiet"]) == 0
    data = json.loads(out.read_text())["sections"]["lower-bound"]["data"]
    assert set(data) == {"shift", "hilbert"}


@pytest.mark.skipif(shutil.which("lab") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["lab", "petermichl", "--depth", "3", "--trials", "1", "--quiet"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    proc = subprocess.run(["lab", "sandwich", "--trials", "0"], capture_output=True, text=True)
    assert proc.returncode == 2


def test_module_entry():
    proc = subprocess.run([sys.executable, "-m", "haarlab.cli", "identities", "--depth", "2",
                           "--trials", "1", "--quiet"], capture_output=True, text=True)
    assert proc.returncode == 0
