import json
import shutil
import subprocess
import sys

import pytest

import minicorpus
from biharm_verify.cli import main
from biharm_verify.corpus import default_corpus_path


@pytest.fixture
def mini(tmp_path):
    return str(minicorpus.write(tmp_path / "c"))


def test_list(mini, capsys):
    assert main(["--corpus", mini, "--list"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "S.zero\tidentity_zero\t(x+y)^2"
    assert len(lines) == len(minicorpus.REGISTRY)


def test_all_ok_exit_zero(mini, capsys):
    assert main(["--corpus", mini, "--report", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["summary"]["match"] == 6
    assert doc["summary"]["degenerate"] == 1


def test_mismatch_exit_one(tmp_path, capsys):
    files = dict(minicorpus.FILES)
    files["eq/R.poly"] = "y - 2\n"
    root = minicorpus.write(tmp_path, files)
    assert main(["--corpus", str(root), "--step", "S.res"]) == 1
    assert "MISMATCH" in capsys.readouterr().out


def test_incomplete_exit_two(tmp_path, capsys):
    files = dict(minicorpus.FILES)
    files["eq/Big.poly"] = "(x + y + lam + lam' + lam'' + u + 1)^3\n"
    rows = [("S.big", "expand_compare", "{Big}^3", "Big", "up_to_scalar", "-", "terms=1000", "a")]
    root = minicorpus.write(tmp_path, files, rows)
    assert main(["--corpus", str(root)]) == 2


@pytest.mark.parametrize("argv", [
    ["--step", "NOPE"],
    ["--time-limit", "0"],
    ["--term-cap", "5"],
    ["--jobs", "0"],
    ["--bogus"],
    ["--all", "--list"],
])
def test_bad_input_exit_three(mini, argv, capsys):
    assert main(["--corpus", mini] + argv) == 3


def test_bad_corpus_exit_three(tmp_path, capsys):
    assert main(["--corpus", str(tmp_path / "missing")]) == 3
    root = minicorpus.write(tmp_path / "c")
    (root / "eq" / "A.poly").write_text("x^2 = (\n")
    assert main(["--corpus", str(root)]) == 3
    assert "A" in capsys.readouterr().err


def test_out_file(mini, tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["--corpus", mini, "--report", "json", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["summary"]["total"] == 7


def test_filter(mini, capsys):
    assert main(["--corpus", mini, "--filter", "S.r*", "--report", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert [s["id"] for s in doc["steps"]] == ["S.res", "S.root"]


def test_timings_flag(mini, capsys):
    main(["--corpus", mini, "--step", "S.zero", "--report", "json", "--timings"])
    doc = json.loads(capsys.readouterr().out)
    assert doc["steps"][0]["runtime_ms"] is not None


def test_deterministic_json(mini, capsys):
    main(["--corpus", mini, "--report", "json"])
    a = capsys.readouterr().out
    main(["--corpus", mini, "--report", "json", "--jobs", "3"])
    b = capsys.readouterr().out
    assert a == b


def test_corrupted_bundled_copy(tmp_path, capsys):
    root = tmp_path / "c"
    shutil.copytree(default_corpus_path(), root)
    eq5 = root / "eq" / "Equation5.poly"
    eq5.write_text(eq5.read_text().rstrip("\n") + " + lam^9\n")
    assert main(["--corpus", str(root), "--filter", "E.1[5-7]", "--report", "json"]) == 1
    doc = {s["id"]: s for s in json.loads(capsys.readouterr().out)["steps"]}
    assert doc["E.15"]["status"] == "MISMATCH"
    assert doc["E.15"]["diff"] == [{"monomial": "lam^9", "recomputed": "0", "expected": "-1"}]
    assert doc["E.16"]["status"] == "MISMATCH"
    assert doc["E.16"]["pipeline_status"] == "MATCH"
    assert doc["E.17"]["status"] == "MATCH"


def test_console_script_entry_point(mini):
    proc = subprocess.run([sys.executable, "-m", "biharm_verify.cli", "--corpus", mini, "--list"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("S.zero")
