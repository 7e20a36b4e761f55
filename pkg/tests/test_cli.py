import json
import subprocess
import sys

import pytest

from qmat.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def row4(tmp_path):
    p = tmp_path / "row.csv"
    p.write_text("f0,f1,f2,f3\n0.1,0.2,0.3,0.4\n")
    return str(p)


@pytest.fixture
def mat2(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps([[0.5, -0.25], [1.0, 0.75]]))
    return str(p)


def test_load(capsys, mat2):
    code, out, _ = run(capsys, "load", "--input", mat2)
    assert code == 0
    rep = json.loads(out)
    assert rep["inf_norm"] == 1.0 and rep["max_error"] < 1e-10


def test_demo_reverse_row(capsys, row4):
    code, out, _ = run(capsys, "demo", "reverse", "--row", "0", "--input", row4)
    assert code == 0
    rep = json.loads(out)
    assert rep["classical_after"][0] == pytest.approx([0.4, 0.3, 0.2, 0.1])


@pytest.mark.parametrize("op,extra", [
    ("swap-pivot", ["--pos", "1"]),
    ("swap", ["--pos", "0", "--pos2", "2"]),
    ("cyclic-left", []),
    ("cyclic-right", ["--row", "0"]),
    ("reduce-rows", []),
    ("square", []),
])
def test_demo_ops_on_row(capsys, row4, op, extra):
    code, out, _ = run(capsys, "demo", op, "--input", row4, *extra)
    assert code == 0, out
    assert json.loads(out)["max_error"] < 1e-10


@pytest.mark.parametrize("op,extra", [
    ("sum-diff", []),
    ("reduce-cols", []),
    ("scale", ["--row", "1", "--alpha", "0.5"]),
    ("reverse", []),
])
def test_demo_ops_on_matrix(capsys, mat2, op, extra):
    code, out, _ = run(capsys, "demo", op, "--input", mat2, *extra)
    assert code == 0, out


def test_demo_products(capsys, row4, tmp_path):
    g = tmp_path / "g.csv"
    g.write_text("1,0,-1,0.5\n")
    code, out, _ = run(capsys, "demo", "scalar-product", "--input", row4, "--input2", str(g))
    rep = json.loads(out)
    assert code == 0 and rep["scalar_product"] == pytest.approx(rep["classical_dot"])
    code, out, _ = run(capsys, "demo", "multiply", "--input", row4, "--input2", str(g))
    assert json.loads(out)["product"] == pytest.approx([0.1, 0, -0.3, 0.2])
    code, _, err = run(capsys, "demo", "multiply", "--input", row4)
    assert code == 2 and "input2" in err


def test_shift_and_linshift(capsys, row4):
    code, out, _ = run(capsys, "shift", "--input", row4, "--shift", "0.3")
    assert code == 0 and set(json.loads(out)["sectors"]) == {"sum", "diff"}
    code, out, _ = run(capsys, "shift", "--input", row4, "--shift", "0.3", "--step")
    assert code == 0
    code, out, _ = run(capsys, "linshift", "--nJ", "3", "--shift", "0.3", "--levels", "2")
    vals = json.loads(out)["sectors"]["diff"]["values"]
    assert code == 0 and vals[::2] == pytest.approx([-0.125, -0.025, 0.025, 0.125])


def test_estimate_deterministic(capsys):
    args = ["estimate", "--amplitude", "0.3", "--shots", "10000", "--stages", "3", "--seed", "7"]
    code, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert code == 0 and first == second
    rep = json.loads(first)
    widths = [0.5 * (r["upper"] - r["lower"]) for r in rep["stages"]]
    assert all(b < a for a, b in zip(widths, widths[1:]))


def test_estimate_matrix_and_repeats(capsys, mat2):
    code, out, _ = run(capsys, "estimate", "--input", mat2, "--row", "1", "--col", "1",
                       "--stages", "2", "--repeats", "3", "--seed", "5")
    rep = json.loads(out)
    assert code == 0 and [r["seed"] for r in rep["runs"]] == [5, 6, 7]
    assert rep["runs"][0]["value"] == pytest.approx(0.75, abs=1e-3)


def test_estimate_csv(capsys):
    code, out, _ = run(capsys, "estimate", "--amplitude", "0.3", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "seed,stage,half_width"


def test_resources_constant_load_independent_of_columns(capsys):
    reports = []
    for nj in ("1", "3", "6"):
        code, out, _ = run(capsys, "resources", "load-constant", "--nI", "3", "--nJ", nj)
        assert code == 0
        reports.append(json.loads(out)["gate_stats"])
    assert reports[0] == reports[1] == reports[2]


@pytest.mark.parametrize("target", ["reverse", "cyclic-shift", "swap-pivot", "grover"])
def test_resources_targets(capsys, target):
    code, out, _ = run(capsys, "resources", target, "--nI", "1", "--nJ", "3", "--format", "table")
    assert code == 0 and "x_count" in out


def test_config_errors(capsys, tmp_path):
    assert run(capsys, "estimate")[0] == 2
    assert run(capsys, "load", "--input", str(tmp_path / "missing.csv"))[0] == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2,3\n")
    assert run(capsys, "load", "--input", str(bad))[0] == 2
    assert run(capsys, "resources", "load-constant", "--nI", "30", "--nJ", "1")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["demo", "nonsense"])
    assert exc.value.code == 2


def test_inconsistency_exit_code(capsys, monkeypatch, row4):
    import qmat.cli as cli

    def broken(state, layout, sel=None):
        state.amps[0] += 0.5
        return state

    monkeypatch.setattr(cli.arith, "reverse", broken)
    code, out, err = run(capsys, "demo", "reverse", "--input", row4)
    assert code == 3 and out == "" and "inconsistency" in err


def test_module_entry_point(row4):
    proc = subprocess.run([sys.executable, "-m", "qmat", "load", "--input", row4],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["shape"] == [1, 4]
