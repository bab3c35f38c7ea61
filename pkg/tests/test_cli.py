import io
import json
from pathlib import Path

import pytest

from ttg.cli import parse_class, run
from ttg.engine import rho as rho_mod
from ttg.engine.verify import PROPERTIES, Report
from ttg.errors import UsageError

DATA = Path(__file__).resolve().parents[1] / "src" / "ttg" / "data"


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    status = run([str(a) for a in argv], stdout=out, stderr=err)
    return status, out.getvalue(), err.getvalue()


def test_spc_of_poset():
    status, out, _ = call(DATA / "poset12.ttg", "spc")
    assert status == 0
    assert "points: x1, x2" in out
    assert "discrete: yes" in out


def test_spc_json_and_dot():
    status, out, _ = call(DATA / "poset12.ttg", "spc", "--format", "json")
    assert status == 0
    data = json.loads(out)
    assert data["discrete"] is True
    assert data["components"] == [["x1"], ["x2"]]
    status, out, _ = call(DATA / "poset12.ttg", "--format", "dot", "spc")
    assert status == 0
    assert out.startswith("digraph")


def test_supp():
    status, out, _ = call(DATA / "poset12.ttg", "--format", "json", "supp", "S1")
    assert status == 0
    assert json.loads(out)["support"] == ["x1"]


def test_rho_unit_json():
    status, out, _ = call(DATA / "f2xf2.ttg", "rho", "--unit", "--format", "json")
    assert status == 0
    data = json.loads(out)
    assert data["spectral"] and data["inclusion_reversing"]
    assert sorted(data["assignment"].values()) == ["p1", "p2"]


def test_koszul_command():
    status, out, _ = call(DATA / "f3_dual.ttg", "koszul", "unit", "1")
    assert status == 0
    assert "verdict: pass" in out


def test_localize_command():
    status, out, _ = call(DATA / "f2xf2.ttg", "localize", "--set", "(1,0)", "--format", "json")
    assert status == 0
    data = json.loads(out)
    assert data["verdict"] == "pass"


def test_descend_command():
    status, out, _ = call(DATA / "f2xf2.ttg", "descend")
    assert status == 0
    assert "{1:(x)}" in out and "{2:(x)}" in out


def test_verify_single_and_expected_failure():
    status, out, _ = call(DATA / "poset12.ttg", "--depth", "2", "verify", "connected_rigid")
    assert status == 0
    assert "expected-failure" in out


def test_verify_all_on_product():
    status, out, _ = call(DATA / "f2xf2.ttg", "--depth", "2", "verify", "all")
    assert status == 0
    assert "14/14 ok" in out


def test_chromatic_descent():
    status, out, _ = call("chromatic", "--primes", "2", "--levels", "5", "--descend", "3")
    assert status == 0
    assert "closure{C_{2,2}} ⊃ closure{C_{2,3}} ⊃ closure{C_{2,4}}" in out
    assert "never reached: {C_{2,inf}} (Thomason: False)" in out


def test_chromatic_localize_json():
    status, out, _ = call("chromatic", "--localize-at", "3", "--format", "json")
    assert status == 0
    data = json.loads(out)
    assert data["localization"]["verdict"] == "pass"
    assert data["space"]["primes"] == [3]


@pytest.mark.parametrize("argv", [
    ["chromatic", "--primes", "4"],
    ["chromatic", "--localize-at", "7"],
    ["chromatic", "--levels", "4", "--descend", "5"],
    [DATA / "f2xf2.ttg", "frobnicate"],
    [DATA / "f2xf2.ttg", "supp", "nope"],
    [DATA / "f2xf2.ttg", "--depth", "0", "spc"],
    [DATA / "f2xf2.ttg", "verify", "nonsense"],
    [DATA / "f2xf2.ttg", "localize", "--set", "1,0"],
    ["/nonexistent/model.ttg", "spc"],
])
def test_usage_errors_exit_2(argv):
    status, _, err = call(*argv)
    assert status == 2
    assert err.startswith("ttg: error:")


def test_parse_error_exit_2(tmp_path):
    bad = tmp_path / "bad.ttg"
    bad.write_text('[model]\nkind = "poset"\nchar = 2\nelements = ["1"]\nrelations = [["1", "9"]]\n')
    status, _, err = call(bad, "spc")
    assert status == 2
    assert "line" in err


def test_class_out_of_range_exit_2():
    status, _, err = call(DATA / "poset12.ttg", "koszul", "unit", "5")
    assert status == 2
    assert "ttg: error" in err


def test_failed_verdict_exit_1(monkeypatch):
    def always_fails(ctx):
        return Report("killscone", ctx.model.name, ["unit"], "fail", witness={"object": "unit"})

    monkeypatch.setitem(PROPERTIES, "killscone", always_fails)
    status, out, _ = call(DATA / "poset12.ttg", "verify", "killscone")
    assert status == 1
    assert "killscone       fail" in out
    assert "0/1 ok" in out


def test_depth_from_environment(monkeypatch):
    monkeypatch.setenv("TTG_DEPTH", "1")
    _, out, _ = call(DATA / "f2xf2.ttg", "rho", "--unit", "--format", "json")
    assert json.loads(out)["depth_requested"] == 1
    _, out, _ = call(DATA / "f2xf2.ttg", "rho", "--unit", "--format", "json", "--depth", "2")
    assert json.loads(out)["depth_requested"] == 2
    monkeypatch.setenv("TTG_DEPTH", "x")
    status, _, _ = call(DATA / "f2xf2.ttg", "spc")
    assert status == 2


def test_seed_is_restored():
    call(DATA / "f2xf2.ttg", "--seed", "7", "rho", "--unit")
    assert rho_mod.SAMPLE_SEED == 0


@pytest.mark.parametrize("argv", [
    [DATA / "f2xf2.ttg", "--format", "json", "rho", "--unit"],
    [DATA / "poset12.ttg", "--format", "dot", "spc"],
    ["chromatic", "--format", "json", "--descend", "3"],
])
def test_runs_are_byte_identical(argv):
    assert call(*argv) == call(*argv)


def test_parse_class():
    assert parse_class("1", 2).tolist() == [0, 1]
    assert parse_class("0+1", 2).tolist() == [1, 1]
    assert parse_class("1,0", 2).tolist() == [1, 0]
    with pytest.raises(UsageError):
        parse_class("3", 2)
    with pytest.raises(UsageError):
        parse_class("1,0,0", 2)


def test_whole_space_map_compared_with_unit():
    status, out, _ = call(DATA / "f2xf2.ttg", "rho", "--closed-set", "1:(x),2:(x)", "--format", "json")
    assert status == 0
    assert json.loads(out)["matches_unit"]["iso"] is True
    # the sum of simples and the unit give different rings on the non-rigid poset
    _, out, _ = call(DATA / "poset12.ttg", "rho", "--closed-set", "x1,x2", "--format", "json")
    assert json.loads(out)["matches_unit"]["iso"] is False
    _, out, _ = call(DATA / "poset12.ttg", "rho", "--closed-set", "x1,x2", "--gens", "unit", "--format", "json")
    assert json.loads(out)["matches_unit"]["iso"] is True
