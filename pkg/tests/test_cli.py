import json
import subprocess
import sys

import pytest

from plumb.cli import corpus, load_corpus_graph, main


def run(capsys, *argv):
    status = main(list(argv))
    out = capsys.readouterr().out
    return status, json.loads(out) if out.strip() else None


def test_h1_struct(capsys):
    status, out = run(capsys, "h1-struct", "corpus/a1.graph", "-Z", "1:3")
    assert status == 0 and out["value"] == 0


def test_zk(capsys):
    assert run(capsys, "zk", "corpus/a2.graph") == (0, {"Z_K": {"1": "0", "2": "0"}})


def test_h1_nat(capsys):
    status, out = run(capsys, "h1-nat", "corpus/a2.graph", "-Z", "1:1", "--chern", "2:1")
    assert status == 0
    assert (out["h0"], out["h1"], out["chi_bundle"]) == (2, 0, 2)
    assert "steps" not in out


def test_h1_nat_from_cycle_file(capsys):
    status, out = run(capsys, "h1-nat", "--cycles", "two_components.cycles", "--trace")
    assert status == 0 and out["h0"] == 9
    assert out["steps"][-1]["step"] == "split"


def test_chi_and_dual(capsys):
    assert run(capsys, "chi", "a1", "-l", "1:2") == (0, {"value": 4})
    status, out = run(capsys, "dual", "a2", "-v", "1")
    assert out == {"dual": {"1": {"1": "2/3", "2": "1/3"}}}


def test_check(capsys):
    status, out = run(capsys, "check", "e8")
    assert status == 0 and out["valid"] and out["determinant"] in (1, -1)


def test_gen_dim_im_vdim_pg(capsys):
    assert run(capsys, "h1-gen", "a1", "-Z", "1:2", "--chern", "1:1")[1]["value"] == 1
    assert run(capsys, "dim-im", "a2", "-Z", "1:1,2:1", "--chern", "1:-1,2:-1")[1]["value"] == 0
    assert run(capsys, "vdim", "a2", "-Z", "1:1,2:1", "--chern", "1:-1,2:-1", "-v", "1")[1]["value"] == 0
    status, out = run(capsys, "pg", "g237")
    assert out["value"] == 1 and out["artin_rational"] is False


def test_selftest(capsys):
    status, out = run(capsys, "selftest", "a2", "--seed", "1", "--count", "3")
    assert status == 0 and out == {"graph": "A2", "ok": True, "failed": []}


@pytest.mark.parametrize("argv,status,code", [
    (["chi", "nope.graph", "-l", "1:1"], 2, "InputError"),
    (["h1-struct", "a1", "-Z", "2:1"], 2, "UnknownVertex"),
    (["h1-struct", "a1", "-Z", "1:x"], 2, "InputError"),
    (["dim-im", "g237", "-Z", "1:1", "--chern", "1:1"], 1, "EmptyImage"),
    (["h1-struct", "e8", "-Z", "1:9,2:9,3:9,4:9,5:9,6:9,7:9,8:9", "--budget", "10"], 1, "BoxTooLarge"),
])
def test_errors(capsys, argv, status, code):
    got, out = run(capsys, *argv)
    assert got == status
    assert out["error"]["code"] == code
    assert {"code", "message", "witness"} <= set(out["error"])


def test_syntax_error_file(tmp_path, capsys):
    p = tmp_path / "bad.graph"
    p.write_text("vertex 1 -2\nvertex 2 ?\n")
    got, out = run(capsys, "check", str(p))
    assert got == 2
    assert out["error"]["code"] == "SyntaxError"
    assert out["error"]["witness"] == {"line": 2, "column": 10}


def test_usage_error():
    assert main(["frobnicate"]) == 2


def test_corpus_contents():
    names = corpus()
    assert len(names) >= 6
    for want in ["a1", "a2", "a5", "d4", "e8", "g237"]:
        assert f"{want}.graph" in names
    g = load_corpus_graph("g237")
    assert sorted(g.weight.values()) == [-7, -3, -2, -1]


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "plumb.cli", "zk", "a1"], capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout) == {"Z_K": {"1": "0"}}


def test_jobs_flag_does_not_change_output(capsys):
    a = run(capsys, "h1-struct", "e8", "-Z", "1:3,2:3,3:3,4:3,5:3,6:3,7:3,8:3", "--jobs", "1")
    b = run(capsys, "h1-struct", "e8", "-Z", "1:3,2:3,3:3,4:3,5:3,6:3,7:3,8:3", "--jobs", "4")
    assert a == b
