import json
import subprocess
import sys

import pytest

from flipreduce.cli import main


@pytest.fixture
def files(tmp_path):
    (tmp_path / "c3.flip").write_text("3 2\nt1 10\nt2 11\nt3 01\n")
    (tmp_path / "pp.flip").write_text("4 3\nt1 110\nt2 110\nt3 101\nt4 101\n")
    (tmp_path / "bad.flip").write_text("3 2\nt1 10\n")
    (tmp_path / "trees.nwk").write_text("((A,B),C);\n((B,C),D);\n")
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_reduce_infeasible(files, capsys):
    code, out, _ = run(capsys, "reduce", "--matrix", files / "c3.flip", "--k", "0")
    assert code == 2
    assert json.loads(out)["status"] == "infeasible"


def test_reduce_auto(files, capsys):
    code, out, _ = run(capsys, "reduce", "--matrix", files / "pp.flip", "--k", "auto", "--lb-restarts", "3")
    data = json.loads(out)
    assert code == 0 and data["flips"] == [] and "metrics" in data and "trace" not in data


def test_reduce_trace_and_residual(files, capsys):
    res = files / "res.flip"
    run(capsys, "gen", "--taxa", "10", "--trees", "3", "--nni", "1", "--seed", "4", "--out", files / "g")
    code, out, _ = run(capsys, "reduce", "--matrix", files / "g" / "matrix.flip", "--k", "auto", "--trace",
                       "--residual", res, "--lb-restarts", "3")
    data = json.loads(out)
    assert code == 0 and isinstance(data["trace"], list) and data["trace"]
    assert res.exists()


def test_reduce_is_byte_deterministic(files, capsys):
    args = ("reduce", "--matrix", files / "c3.flip", "--k", "1", "--bounds", "--lb-restarts", "4")
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


def test_reduce_text(files, capsys):
    code, out, _ = run(capsys, "reduce", "--matrix", files / "c3.flip", "--k", "1", "--format", "text")
    assert code == 0 and "Fixed entries" in out and "No. flips relative" in out


def test_check(files, capsys):
    assert run(capsys, "check", "--matrix", files / "pp.flip")[1].strip() == \
        "perfect phylogeny: yes; conflicts: 0; lb=0"
    code, out, _ = run(capsys, "check", "--matrix", files / "c3.flip", "--bounds", "--format", "json")
    data = json.loads(out)
    assert data["lb"] == 1 and data["ub"] == 1 and len(data["lb_certificate"]) == 1


def test_solve(files, capsys):
    code, out, _ = run(capsys, "solve", "--matrix", files / "c3.flip")
    assert code == 0 and out.startswith("optimum: 1\ntree: ")


def test_encode(files, capsys):
    code, out, _ = run(capsys, "encode", "--trees", files / "trees.nwk")
    assert code == 0 and out.splitlines()[0] == "4 2"


def test_gen_to_directory_and_stats(files, capsys):
    d = files / "inst"
    assert run(capsys, "gen", "--taxa", "10", "--trees", "3", "--nni", "1", "--seed", "2", "--out", d)[0] == 0
    assert json.loads((d / "manifest.json").read_text())["n"] == 10
    code, out, _ = run(capsys, "reduce", "--matrix", d / "matrix.flip", "--k", "2")
    (files / "r.json").write_text(out)
    code, out, _ = run(capsys, "stats", "--result", files / "r.json", "--matrix", d / "matrix.flip",
                       "--format", "json")
    assert code == 0 and "fixed" in json.loads(out)


def test_gen_pipe_into_solve():
    gen = subprocess.run([sys.executable, "-m", "flipreduce", "gen", "--taxa", "8", "--trees", "2", "--keep",
                          "1.0", "--nni", "0", "--seed", "7"], capture_output=True, text=True, check=True)
    solve = subprocess.run([sys.executable, "-m", "flipreduce", "solve"], input=gen.stdout,
                           capture_output=True, text=True)
    assert solve.returncode == 0 and solve.stdout.startswith("optimum: 0")


@pytest.mark.parametrize("argv", [
    ("solve", "--matrix", "missing.flip"),
    ("reduce", "--matrix", "{bad}", "--k", "1"),
    ("reduce", "--matrix", "{c3}", "--k", "-3"),
    ("reduce", "--matrix", "{c3}", "--k", "x"),
    ("stats", "--result", "{c3}", "--matrix", "{c3}"),
    ("frobnicate",),
    ("gen", "--taxa", "2"),
])
def test_errors_exit_1(files, capsys, argv):
    argv = [a.format(bad=files / "bad.flip", c3=files / "c3.flip") for a in argv]
    try:
        code = main(argv)
    except SystemExit as e:
        code = e.code
    assert code == 1


def test_solve_rejects_large_matrix(tmp_path, capsys):
    rows = "\n".join(f"t{i} 1" for i in range(12))
    p = tmp_path / "big.flip"
    p.write_text(f"12 1\n{rows}\n")
    code, _, err = run(capsys, "solve", "--matrix", p)
    assert code == 1 and "at most" in err
