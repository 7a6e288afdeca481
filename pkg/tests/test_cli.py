import os
import subprocess
import sys

import pytest

from conftest import EXAMPLES_DIR
from tropicore.cli import EXIT_MATH, EXIT_OK, EXIT_PARSE, EXIT_USAGE, main
from tropicore.fileformat import dumps_cocycle, dumps_cycle, dumps_space, read_space
from tropicore.library import fan_space

SRC = os.path.join(os.path.dirname(__file__), "..", "src")


def ex(name):
    return os.path.join(EXAMPLES_DIR, name + ".trop")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_process(*argv, env=None):
    cmd = [sys.executable, "-c", "import sys; from tropicore.cli import main; sys.exit(main())", *argv]
    e = dict(os.environ, PYTHONPATH=SRC, **(env or {}))
    return subprocess.run(cmd, capture_output=True, text=True, env=e)


class TestValidate:
    def test_ok(self, capsys):
        assert run(capsys, "validate", ex("elliptic_3"))[:2] == (EXIT_OK, "OK\n")

    def test_truncated(self, capsys, tmp_path):
        p = tmp_path / "t.trop"
        p.write_text(open(ex("elliptic_3")).read()[:300])
        code, _, err = run(capsys, "validate", str(p))
        assert code == EXIT_PARSE and "line" in err

    def test_unbalanced_fan(self, capsys, tmp_path):
        p = tmp_path / "fan.trop"
        p.write_text(dumps_space(fan_space([(1, 0), (0, 1)], [(0,), (1,)])))
        code, out, _ = run(capsys, "validate", str(p))
        assert code == EXIT_MATH and "balanc" in out

    def test_missing_argument(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["validate"])
        assert exc.value.code == EXIT_USAGE

    def test_example_pipeline(self, tmp_path):
        r = run_process("example", "--name", "nodal-genus2")
        assert r.returncode == 0
        p = tmp_path / "c.trop"
        p.write_text(r.stdout)
        v = run_process("validate", str(p))
        assert (v.returncode, v.stdout) == (0, "OK\n")


class TestHomology:
    def test_nodal_curve(self, capsys):
        code, out, _ = run(capsys, "homology", ex("nodal_genus2"))
        assert code == EXIT_OK
        assert out.splitlines()[1:] == ["p=0 q=0: rank 1", "p=0 q=1: rank 2", "p=1 q=0: rank 1", "p=1 q=1: rank 1"]

    @pytest.mark.parametrize("system", ["F", "W", "Fdual", "Wdual"])
    def test_methods_agree(self, capsys, system):
        _, cell, _ = run(capsys, "hodge-table", ex("tp_2"), "--system", system, "--method", "cell")
        _, bar, _ = run(capsys, "hodge-table", ex("tp_2"), "--system", system, "--method", "bar")
        assert cell.splitlines()[1:] == bar.splitlines()[1:]

    def test_elliptic_5(self, capsys):
        _, out, _ = run(capsys, "homology", ex("elliptic_5"))
        assert [l.split(": ")[1] for l in out.splitlines()[1:]] == ["rank 1"] * 4


class TestEigenwave:
    def test_elliptic(self, capsys):
        code, out, _ = run(capsys, "eigenwave", ex("elliptic_3"), "--p", "0", "--q", "1", "--power", "1")
        assert code == EXIT_OK
        assert "[3]" in out.splitlines() and "isomorphism: yes" in out

    def test_nodal(self, capsys):
        _, out, _ = run(capsys, "eigenwave", ex("nodal_genus2"), "--p", "0", "--q", "1")
        assert "rank: 1" in out and "isomorphism: no" in out


class TestJacobianAndPair:
    def test_elliptic(self, capsys):
        code, out, _ = run(capsys, "jacobian", ex("elliptic_3"), "--p", "0", "--q", "1")
        assert code == EXIT_OK
        assert out.splitlines()[:3] == ["g = 1", "Q =", "[3]"]

    def test_pair(self, capsys, tmp_path):
        p = tmp_path / "z.cyc"
        p.write_text(dumps_cycle(0, 1, {"e0": {(): 1}, "e1": {(): 1}, "e2": {(): 1}}))
        code, out, _ = run(capsys, "pair", ex("elliptic_3"), str(p), str(p), "--eigenwave", "1")
        assert code == EXIT_OK
        assert "intersection: 3" in out and "eigenwave pairing: 3" in out


class TestOther:
    def test_bergman(self, capsys):
        code, out, _ = run(capsys, "bergman", "uniform:2,3")
        assert code == EXIT_OK and "balanced: yes" in out and "{3} -> (-1 -1)" in out

    def test_konstruktor_certificate_fails(self, capsys):
        code, out, _ = run(capsys, "konstruktor", ex("elliptic_5"))
        assert code == EXIT_MATH and out.startswith("unimodular smooth: no")

    def test_konstruktor_check(self, capsys):
        code, out, _ = run(capsys, "konstruktor", ex("tp_2"), "--check")
        assert code == EXIT_OK and out.rstrip().endswith("all identities: yes")

    def test_deform(self, capsys, tmp_path):
        c = tmp_path / "tau.json"
        c.write_text(dumps_cocycle({("v2", "v0"): (-1,)}))
        out_file = tmp_path / "d.trop"
        code, _, _ = run(capsys, "deform", ex("elliptic_3"), str(c), "--epsilon", "1/2", "-o", str(out_file))
        assert code == EXIT_OK
        assert run(capsys, "validate", str(out_file))[:2] == (EXIT_OK, "OK\n")
        read_space(str(out_file))

    def test_deform_negative(self, capsys, tmp_path):
        c = tmp_path / "tau.json"
        c.write_text(dumps_cocycle({("v2", "v0"): (-1,)}))
        code, _, _ = run(capsys, "deform", ex("elliptic_3"), str(c), "--epsilon=-1")
        assert code == EXIT_USAGE

    def test_unknown_example(self, capsys):
        assert run(capsys, "example", "--name", "nope")[0] != EXIT_OK


def test_output_independent_of_threads():
    runs = [run_process("hodge-table", ex("torus_1_1"), env={"TROPICORE_THREADS": t}) for t in ("1", "4", "junk")]
    assert all(r.returncode == 0 for r in runs)
    assert len({r.stdout for r in runs}) == 1
