import json
import subprocess
import sys

import pytest

from gkzint.cli import main
from gkzint.problem import FIXTURES, ProblemSpec, compare_golden, load_fixture, load_golden, run, verify

GAUSS = str(FIXTURES / "gauss_2f1.json")
K3 = str(FIXTURES / "k3.json")


def _run(argv, capsys):
    code = main([*argv[:1], *argv[1:], "--memory", "0"])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_intersect_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert _run(["intersect", GAUSS, "--no-timings", "-o", str(a)], capsys)[0] == 0
    assert _run(["intersect", GAUSS, "--no-timings", "-o", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    data = json.loads(a.read_text())
    assert all(c["passed"] for c in data["checks"])
    assert compare_golden(load_fixture("gauss_2f1"), data, load_golden("gauss_2f1")) == []


def test_pfaffian_task_only(capsys):
    code, out, _ = _run(["pfaffian", GAUSS], capsys)
    data = json.loads(out)
    assert code == 0
    assert "pfaffian" in data and "dual_pfaffian" in data
    assert "intersection" not in data and "normalized" not in data
    assert "timings" in data


def test_check_accepts_and_rejects(tmp_path, capsys):
    good = tmp_path / "good.json"
    _run(["intersect", GAUSS, "-o", str(good)], capsys)
    assert _run(["check", GAUSS, str(good), "--numeric"], capsys)[0] == 0
    bundle = json.loads(good.read_text())
    bundle["normalized"]["entries"][0][1] += "+1"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(bundle))
    code, _, err = _run(["check", GAUSS, str(bad)], capsys)
    assert code == 4
    assert json.loads(err)["counters"]["check"]["check"] == "secondary_residual"


def test_selftest(capsys):
    code, out, _ = _run(["selftest", "gauss_2f1"], capsys)
    assert code == 0 and out.startswith("PASS gauss_2f1")


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(delta=["g1", "g2"]),
    lambda d: d.update(triangulation=[[1, 2, 3], [1, 2, 4]]),
    lambda d: d.update(tasks=["pfaffian", "bogus"]),
    lambda d: d.update(specialize={"z9": "1"}),
    lambda d: d.update(delta=["g1", "g2", "q"]),
])
def test_validation_errors_exit_2(tmp_path, capsys, mutate):
    data = json.loads((FIXTURES / "gauss_2f1.json").read_text())
    mutate(data)
    p = tmp_path / "p.json"
    p.write_text(json.dumps(data))
    code, _, err = _run(["intersect", str(p)], capsys)
    assert code == 2
    assert "error" in json.loads(err)


def test_missing_file_exits_2(capsys):
    assert _run(["pfaffian", "/nonexistent/problem.json"], capsys)[0] == 2


def test_exhausted_caps_exit_3(capsys):
    caps = json.dumps({"powers": [1], "extra_degrees": [0], "max_shift": 0})
    code, _, err = _run(["intersect", K3, "--caps", caps], capsys)
    assert code == 3
    assert json.loads(err)["error"] == "NoSolutionError"


def test_verify_on_bundle_dict():
    p = load_fixture("gauss_2f1")
    bundle = run(p, tasks=("pfaffian", "intersect")).to_json()
    assert all(c["passed"] for c in verify(p, bundle))
    bundle["normalized"]["entries"][1][1] = "0"
    checks = verify(p, bundle)
    assert not next(c for c in checks if c["check"] == "secondary_residual")["passed"]


def test_explicit_cayley_matrix_problem():
    p = ProblemSpec.from_json({
        "cayley": {"matrix": [[1, 1, 0, 0], [0, 0, 1, 1], [0, 1, 0, 1]], "k": 2},
        "params": ["c"], "delta": ["1/3", "1/5", "c"], "specialize": {"z1": 1, "z2": 1, "z3": 1},
        "triangulation": [[1, 2, 3], [2, 3, 4]], "tasks": ["pfaffian"],
    })
    b = run(p)
    assert b.data["rank"] == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "gkzint", "selftest", "--memory", "0"], capture_output=True, text=True,
                       timeout=300)
    assert r.returncode == 0, r.stderr
    assert "PASS gauss_2f1" in r.stdout
