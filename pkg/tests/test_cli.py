import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lociqso import (CoefficientMatrix, Scenario, SimplexPoint, linkage_disequilibrium,
                     predict_limit, random_scenario, simulate)
from lociqso.cli import default_suite, main
from lociqso.errors import NotASimplexPoint, ScenarioParseError
from lociqso.verify import load_suite, run_suite

CANONICAL = {"name": "canonical", "m": 2, "A": [[0, 0.5], [0.5, 0]], "x0": [0.5, 0, 0, 0.5]}
FROZEN = {"m": 3, "A": [[0, 0.5, 0.5], [0, 0, 0], [0.4, 0.6, 0]], "x0": [0.1, 0.2, 0.3, 0.1, 0.05, 0.25]}
EXAMPLE3 = {"m": 3, "A": [[0, 0.5, 0.25], [0.5, 0, 0.25], [0.25, 0.25, 0]],
            "c": [0.2, 0.3, 0.5], "u0": [0.2, 0.0, 0.1]}


@pytest.fixture
def write(tmp_path):
    def _write(obj, name="scenario.json"):
        p = tmp_path / name
        p.write_text(json.dumps(obj))
        return str(p)
    return _write


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# -- scenarios --------------------------------------------------------------

@settings(max_examples=50, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**63), st.booleans())
def test_scenario_round_trip(m, seed, fiber_form):
    sc = random_scenario(np.random.default_rng(seed), m, name="rt", record_every=3, conv_tol=1e-11)
    if fiber_form:
        x = np.array(sc.x0)
        sc = Scenario(m=m, A=sc.A, c=(x[0::2] + x[1::2]).tolist(), u0=x[0::2].tolist(), run=sc.run, name="rt")
    d = sc.to_dict()
    back = Scenario.from_dict(json.loads(json.dumps(d)))
    assert back.to_dict() == d


@pytest.mark.parametrize("bad", [
    {"m": 2, "A": [[0, 0.5], [0.5, 0]]},
    {"m": 2, "A": [[0, 0.5]], "x0": [0.5, 0, 0, 0.5]},
    {"m": 2, "A": [[0, 1.5], [0.5, 0]], "x0": [0.5, 0, 0, 0.5]},
    {"m": 2, "A": [[0, 0.5], [0.5, 0]], "x0": [0.5, 0, 0, 0.5], "run": {"max_iters": 0}},
    {"m": 2, "A": [[0, 0.5], [0.5, 0]], "x0": [0.5, 0, 0, 0.5], "run": {"conv_tol": -1}},
    {"m": 2, "A": [[0, 0.5], [0.5, 0]], "x0": [0.5, 0, 0, 0.5], "c": [0.5, 0.5], "u0": [0, 0]},
    {"m": 1, "A": [[0]], "x0": [1, 0]},
])
def test_scenario_parse_errors(bad):
    with pytest.raises(ScenarioParseError):
        Scenario.from_dict(bad)


def test_scenario_state_errors():
    sc = Scenario.from_dict({**CANONICAL, "x0": [0.5, 0.6, 0, 0]})
    with pytest.raises(NotASimplexPoint):
        sc.initial_state()
    sc = Scenario.from_dict({"m": 2, "A": CANONICAL["A"], "c": [0.5, 0.5], "u0": [0.6, 0]})
    with pytest.raises(NotASimplexPoint):
        sc.initial_state()


def test_fiber_form_initial_state():
    x = Scenario.from_dict(EXAMPLE3).initial_state()
    np.testing.assert_allclose(x.coords, [0.2, 0.0, 0.0, 0.3, 0.1, 0.4], atol=1e-16)


# -- simulation -------------------------------------------------------------

def test_simulate_identity_converges_immediately():
    r = simulate(CoefficientMatrix(np.zeros((2, 2))), SimplexPoint([0.3, 0.2, 0.1, 0.4]))
    assert r.converged_at == 0
    np.testing.assert_array_equal(r.final_state, [0.3, 0.2, 0.1, 0.4])
    assert r.refusal is not None and r.prediction is None


def test_simulate_canonical():
    sc = Scenario.from_dict(CANONICAL)
    r = simulate(sc.coefficients(), sc.initial_state())
    np.testing.assert_allclose(r.final_state, 0.25, atol=1e-8)
    assert r.prediction.beta == pytest.approx(0.5)
    assert r.prediction_error <= 1e-8


@pytest.mark.parametrize("spec", [CANONICAL, EXAMPLE3])
def test_ld_trace_strictly_decreasing(spec):
    sc = Scenario.from_dict(spec)
    r = simulate(sc.coefficients(), sc.initial_state())
    ld = np.array(r.ld_trace)
    live = ld[ld > 1e-14]
    assert np.all(np.diff(live) < 0)
    assert ld[-1] < 1e-8


def test_ld_trace_matches_recorded_states(rng):
    for _ in range(20):
        sc = random_scenario(rng, int(rng.integers(2, 7)), record_every=1)
        A = sc.coefficients()
        r = simulate(A, sc.initial_state(), sc.run)
        for k, x in r.trajectory:
            assert r.ld_trace[k] == np.abs(linkage_disequilibrium(A, SimplexPoint(x))).max()
        assert r.ld_trace[-1] < 1e-8


def test_simulate_max_iters_without_convergence():
    sc = Scenario.from_dict({**CANONICAL, "run": {"max_iters": 5, "record_every": 2}})
    r = simulate(sc.coefficients(), sc.initial_state(), sc.run)
    assert r.converged_at is None and r.iterations == 5
    assert [k for k, _ in r.trajectory] == [0, 2, 4, 5]


# -- command line -----------------------------------------------------------

def test_cli_simulate_json_and_csv(capsys, write, tmp_path):
    path = write(CANONICAL)
    code, out, _ = run_cli(capsys, "simulate", "--scenario", path)
    assert code == 0
    rep = json.loads(out)
    np.testing.assert_allclose(rep["final_state"], 0.25, atol=1e-8)
    assert rep["prediction"]["beta"] == pytest.approx(0.5)
    dest = tmp_path / "traj.csv"
    code, _, _ = run_cli(capsys, "simulate", "--scenario", path, "--format", "csv", "--out", str(dest))
    rows = list(csv.reader(io.StringIO(dest.read_text())))
    assert rows[0] == ["iteration", "x1", "x2", "x3", "x4", "ld_sup"]
    assert rows[1][:5] == ["0", "0.5", "0.0", "0.0", "0.5"]
    assert len(rows) - 1 == len(rep["trajectory"])


def test_cli_overrides(capsys, write):
    code, out, _ = run_cli(capsys, "simulate", "--scenario", write(CANONICAL), "--max-iters", "3")
    assert json.loads(out)["iterations"] == 3
    code, _, err = run_cli(capsys, "simulate", "--scenario", write(CANONICAL), "--tol", "-1")
    assert code == 1


def test_cli_predict(capsys, write):
    code, out, _ = run_cli(capsys, "predict", "--scenario", write(CANONICAL))
    assert code == 0 and json.loads(out)["beta"] == pytest.approx(0.5)
    fixed = {"m": 2, "A": CANONICAL["A"], "c": [0.4, 0.6], "u0": [0.4, 0.6]}
    code, out, _ = run_cli(capsys, "predict", "--scenario", write(fixed))
    assert json.loads(out)["beta"] == pytest.approx(1.0, abs=1e-14)


def test_cli_predict_refusal(capsys, write):
    code, out, _ = run_cli(capsys, "predict", "--scenario", write(FROZEN))
    rep = json.loads(out)
    assert code == 3 and rep["refused"] and rep["frozen_loci"] == [1]


def test_cli_input_errors(capsys, write, tmp_path):
    code, _, err = run_cli(capsys, "predict", "--scenario", write({**CANONICAL, "x0": [0.5, 0.6, 0, 0]}))
    assert code == 1 and "NotASimplexPoint" in err
    code, _, err = run_cli(capsys, "predict", "--scenario", str(tmp_path / "missing.json"))
    assert code == 1 and "ScenarioParseError" in err
    code, _, _ = run_cli(capsys, "predict", "--scenario", write(CANONICAL), "--format", "csv")
    assert code == 1


def test_cli_spectrum(capsys, write):
    code, out, _ = run_cli(capsys, "spectrum", "--scenario", write(EXAMPLE3))
    rep = json.loads(out)
    assert code == 0 and rep["left_stochastic"]
    ev = sorted(z[0] for z in rep["spectrum"]["eigenvalues"])
    np.testing.assert_allclose(ev, [0.625, 0.75, 1.0], atol=1e-10)
    np.testing.assert_allclose(rep["spectrum"]["w"], 1.0, atol=1e-12)


def test_convergence_estimate_within_factor_four(capsys, write):
    for spec in (CANONICAL, EXAMPLE3):
        code, out, _ = run_cli(capsys, "spectrum", "--scenario", write(spec))
        estimate = json.loads(out)["convergence_estimate"]
        code, out, _ = run_cli(capsys, "simulate", "--scenario", write(spec))
        observed = json.loads(out)["converged_at"]
        assert estimate / 4 <= observed <= 4 * estimate


def test_cli_fixed_points(capsys, write):
    code, out, _ = run_cli(capsys, "fixed-points", "--scenario", write(EXAMPLE3))
    rep = json.loads(out)
    assert rep["Hc_residual"] <= 1e-13 and rep["segment"]["beta"] == [0.0, 1.0]
    assert rep["kernel_dim"] == 1 and not rep["every_point_fixed"]
    zero = {**CANONICAL, "A": [[0, 0], [0, 0]]}
    code, out, _ = run_cli(capsys, "fixed-points", "--scenario", write(zero))
    assert json.loads(out)["every_point_fixed"]


def test_cli_cubic(capsys, write):
    code, out, _ = run_cli(capsys, "cubic", "--scenario", write(CANONICAL))
    levels = json.loads(out)["levels"]
    assert len(levels) == 4
    assert levels[0][0] == [1.0, 0.5, 0.5, 0.25]


def test_cli_verify_corrupted_entry(capsys, write, tmp_path):
    suite = {"seed": 7, "scenarios": [CANONICAL, {**CANONICAL, "x0": [0.5, 0.6, 0, 0]}],
             "generate": {"count": 2, "m_min": 2, "m_max": 3}}
    dest = tmp_path / "report.json"
    code, out, _ = run_cli(capsys, "verify", "--scenario", write(suite, "suite.json"), "--out", str(dest))
    rep = json.loads(dest.read_text())
    assert code == 1
    assert rep["summary"] == {"scenarios": 4, "failed": 0, "input_errors": 1, "passed": 3}
    assert rep["results"][1]["status"] == "input_error"
    assert "INPUT ERROR" in out


def test_cli_verify_bad_suite(capsys, write):
    code, _, err = run_cli(capsys, "verify", "--scenario", write({"checks": ["nope"]}, "s.json"))
    assert code == 1 and "SuiteParseError" in err


def test_verify_is_deterministic(capsys, tmp_path):
    outs = []
    for i in range(2):
        dest = tmp_path / f"r{i}.json"
        code, _, _ = run_cli(capsys, "verify", "--seed", "99", "--out", str(dest))
        assert code == 0
        outs.append(dest.read_bytes())
    assert outs[0] == outs[1]


def test_default_suite_all_pass():
    seed, checks, entries = load_suite(default_suite())
    assert len(entries) >= 50
    assert {e.m for e in entries} == set(range(2, 9))
    rep = run_suite(seed, checks, entries)
    assert rep["summary"]["failed"] == 0 and rep["summary"]["input_errors"] == 0


def test_predict_and_simulate_agree_on_suite():
    _, _, entries = load_suite(default_suite())
    for sc in entries:
        A = sc.coefficients()
        if not A.strictly_positive_offdiag:
            continue
        r = simulate(A, sc.initial_state(), sc.run)
        assert np.abs(r.final_state - predict_limit(A, sc.initial_state()).limit_x).max() <= 1e-8
