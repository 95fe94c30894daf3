import json
import pathlib

import pytest

import jetgeom

DATA = pathlib.Path(__file__).resolve().parents[1] / "data"

TRIVIAL_K3 = """
pair "trivial_k3" {
  kind = "ode"
  k = 3
  m = 1
  F[1] = "0"
}
"""

NONLINEAR_K3 = """
pair "nonlinear_k3" {
  kind = "ode"
  k = 3
  m = 1
  F[1] = "x[2,1]^2"
}
"""


def test_parse_expression_round_trips():
    canon = jetgeom.parse_expression("x[0,1] * (t + 2)")
    assert jetgeom.parse_expression(canon) == canon


def test_parse_error_carries_exit_code():
    with pytest.raises(jetgeom.JetgeomError) as err:
        jetgeom.parse_expression("t + * 2")
    assert err.value.exit_code == 2


def test_regular_flat_model():
    r = jetgeom.regularity(TRIVIAL_K3)
    assert r["regular"]
    assert all(level["ok"] for level in r["levels"])


def test_invariants_of_flat_model_vanish():
    r = jetgeom.invariants(TRIVIAL_K3, order=2)
    for K in r["normalized"]["K"]:
        for row in K:
            for jet in row:
                assert jet["terms"] == []


def test_invariants_detect_nonflat():
    r = jetgeom.invariants(NONLINEAR_K3, point="x[2,1]=1", order=2)
    nonzero = [jet for K in r["normalized"]["K"] for row in K for jet in row if jet["terms"]]
    assert nonzero


def test_model_algebra_sl2():
    consts = {(a, b, c): v for a, b, c, v in jetgeom.model_algebra(3, 1)}
    assert consts[("H", "X", "X")] == "-2"
    assert consts[("H", "Y", "Y")] == "2"


def test_cartan_flat_for_trivial_system():
    b = jetgeom.canonical_bundle(TRIVIAL_K3, order=1)
    assert b["cartan"]["flat"]
    assert all(rel["ok"] for rel in b["cartan"]["relations"])


def test_run_matches_cli_report():
    code, verdict, report = jetgeom.run("check-regular", DATA / "degenerate.pair")
    assert code == 3
    assert verdict
    assert report["schema_version"] == 1
    assert report["exit_code"] == 3
    assert not report["result"]["regular"]


def test_run_unknown_command():
    code, _, report = jetgeom.run("no-such-command")
    assert code != 0
    if report is not None:
        json.dumps(report)


def test_schwarzian_check_agrees():
    c = jetgeom.schwarzian_check(TRIVIAL_K3, "x[0,1]=1", "1 + t^2 + x[0,1]")
    assert c["ok"]
