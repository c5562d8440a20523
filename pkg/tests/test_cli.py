import csv
import json
import math
import subprocess
import sys

import pytest

from slowescape.cli import main


@pytest.fixture(autouse=True)
def _keep_env(monkeypatch):
    # --bits writes the precision variable; keep it local to each test
    monkeypatch.delenv("SLOWESCAPE_BITS", raising=False)


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_iter_maxmod_prints_level_index(capsys):
    assert _run(capsys, "iter-maxmod", "exp", "--R", "2", "--n", "3") == (0, "L3:2.0\n", "")


def test_maxmod_value(capsys):
    code, out, _ = _run(capsys, "maxmod", "sin", "--r", "3")
    assert code == 0
    assert float(out) == pytest.approx(math.sinh(3), rel=1e-12)


def test_cover_json(capsys):
    code, out, _ = _run(capsys, "cover", "exp", "--U", "ann:3,10", "--V", "ann:1,10")
    assert code == 0
    assert json.loads(out)["verdict"] == "covered"


def test_synth_slow_report_and_determinism(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["synth-slow", "exp", "--rate", "100*n", "--horizon", "30", "--seed", "3"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    d = json.loads(a.read_text())
    rows = d["sandwich"]
    assert rows and all(r["modulus"] <= 100 * r["n"] for r in rows)


def test_rate_from_csv(tmp_path, capsys):
    p = tmp_path / "rate.csv"
    p.write_text("n,a_n\n" + "".join(f"{n},{100 * n}\n" for n in range(1, 21)))
    code, out, _ = _run(capsys, "synth-slow", "exp", "--rate", str(p), "--horizon", "20",
                        "--pits", "no")
    assert code == 0
    assert json.loads(out)["rate"] == "rate.csv"


def test_check_growth_csv(capsys):
    code, out, _ = _run(capsys, "check-growth", "exp", "--A", "2")
    rows = list(csv.reader(out.splitlines()))
    assert rows[0] == ["r", "M_ratio", "log_M_ratio", "logM_over_logr"]
    assert [float(r[0]) for r in rows[1:]] == [10.0, 100.0, 1000.0, 10000.0]
    assert float(rows[1][2]) == pytest.approx(10.0)


def test_check_pits_and_thm3(capsys):
    code, out, _ = _run(capsys, "check-pits", "sparse_product", "--scales", "100,1000")
    assert code == 0 and json.loads(out)["has_pits"] is True
    code, out, _ = _run(capsys, "check-thm3", "exp", "--cond", "c", "--param", "0.5")
    assert code == 0 and json.loads(out)["holds"] is True


def test_exit_codes(capsys):
    # below the first certification radius the fast planner refuses
    assert _run(capsys, "synth-fast", "exp", "--R", "2", "--depth", "3")[0] == 2
    assert _run(capsys, "synth-slow", "exp", "--rate=-1*n", "--horizon", "5")[0] == 2
    assert _run(capsys, "maxmod", "nosuchmap", "--r", "3")[0] == 1
    assert _run(capsys, "cover", "exp", "--U", "blob:1", "--V", "ann:1,2")[0] == 1
    with pytest.raises(SystemExit) as e:
        main(["maxmod", "exp"])
    assert e.value.code == 1


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "slowescape.cli", "iter-maxmod", "exp", "--R", "2",
                        "--n", "1"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip() == "L1:2.0"
