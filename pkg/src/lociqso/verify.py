"""Cross-check battery run over a suite of scenarios.

Each check compares two independent routes to the same quantity and reports
the worst residual against a fixed tolerance.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InputError, SuiteParseError
from .fiber import build_bc, fiber_of, linear_trajectory
from .simplex import (CoefficientMatrix, SimplexPoint, apply_w, apply_w_stochastic_form,
                      build_cubic_matrix, interaction_terms, w_step)
from .scenario import Scenario, random_scenario, simulate

CHECKS = ("form_equivalence", "cubic_reconstruction", "conjugacy",
          "prediction_vs_simulation", "ld_decay")

TOLERANCES = {
    "form_equivalence": 1e-14,
    "cubic_reconstruction": 1e-13,
    "conjugacy": 1e-12,  # per step; single-step residual must also stay under 1e-13
    "prediction_vs_simulation": 1e-8,
    "ld_decay": 1e-8,
}

CONJUGACY_STEPS = 1000


@dataclass
class CheckResult:
    name: str
    residual: float | None
    tolerance: float
    passed: bool
    note: str = ""

    def to_json(self) -> dict:
        out = {"residual": self.residual, "tolerance": self.tolerance, "passed": self.passed}
        if self.note:
            out["note"] = self.note
        return out


def _probe_states(A: CoefficientMatrix, x0: SimplexPoint, count: int = 10) -> list[np.ndarray]:
    states = [x0.coords]
    for _ in range(count - 1):
        states.append(w_step(A.offdiag, states[-1]))
    return states


def check_form_equivalence(A, x0) -> CheckResult:
    res = max(float(np.max(np.abs(apply_w(A, SimplexPoint(s)).coords
                                  - apply_w_stochastic_form(A, SimplexPoint(s)).coords)))
              for s in _probe_states(A, x0))
    tol = TOLERANCES["form_equivalence"]
    return CheckResult("form_equivalence", res, tol, res <= tol)


def check_cubic_reconstruction(A, x0) -> CheckResult:
    cub = build_cubic_matrix(A)
    res = max(float(np.max(np.abs(cub.apply(s) - w_step(A.offdiag, s))))
              for s in _probe_states(A, x0))
    rows = float(np.max(np.abs(cub.P.sum(axis=2) - 1.0)))
    symmetric = bool(np.array_equal(cub.P, cub.P.transpose(1, 0, 2)))
    nonneg = bool(cub.P.min() >= 0.0)
    tol = TOLERANCES["cubic_reconstruction"]
    ok = res <= tol and rows <= 1e-15 and symmetric and nonneg
    note = "" if ok else f"row-sum defect {rows:.3e}, symmetric={symmetric}, nonnegative={nonneg}"
    return CheckResult("cubic_reconstruction", res, tol, ok, note)


def check_conjugacy(A, x0, steps: int = CONJUGACY_STEPS) -> CheckResult:
    """Odd coordinates of ``W^n(x0)`` against ``B_c^n u0``, scaled by ``n``."""
    fiber, u0 = fiber_of(x0)
    B = build_bc(A, fiber)
    lin = linear_trajectory(B, u0, steps)
    x = x0.coords
    worst = 0.0
    single = 0.0
    for n in range(1, steps + 1):
        x = w_step(A.offdiag, x)
        err = float(np.max(np.abs(x[0::2] - lin[n])))
        if n == 1:
            single = err
        worst = max(worst, err / n)
    tol = TOLERANCES["conjugacy"]
    ok = worst <= tol and single <= 1e-13
    return CheckResult("conjugacy", worst, tol, ok, "" if ok else f"single-step residual {single:.3e}")


def check_prediction(A, x0, report) -> CheckResult:
    tol = TOLERANCES["prediction_vs_simulation"]
    if report.prediction is None:
        hypotheses = A.strictly_positive_offdiag and np.all(x0.odd + x0.even > 0)
        if hypotheses:
            return CheckResult("prediction_vs_simulation", None, tol, False, report.refusal["reason"])
        return CheckResult("prediction_vs_simulation", None, tol, True, "skipped: " + report.refusal["reason"])
    res = report.prediction_error
    return CheckResult("prediction_vs_simulation", res, tol, res <= tol)


def check_ld_decay(A, x0, report) -> CheckResult:
    tol = TOLERANCES["ld_decay"]
    final = report.ld_trace[-1]
    if report.converged_at is None:
        return CheckResult("ld_decay", final, tol, False, "trajectory did not converge")
    ok = final <= tol
    note = ""
    if report.prediction is not None:
        at_limit = float(np.max(np.abs(interaction_terms(A.offdiag, report.prediction.limit_x))))
        ok = ok and at_limit <= 1e-12
        note = f"LD at predicted limit {at_limit:.3e}"
    return CheckResult("ld_decay", final, tol, ok, note)


def run_checks(sc: Scenario, checks=CHECKS) -> list[CheckResult]:
    A = sc.coefficients()
    x0 = sc.initial_state()
    results = []
    report = None
    for name in checks:
        if name == "form_equivalence":
            results.append(check_form_equivalence(A, x0))
        elif name == "cubic_reconstruction":
            results.append(check_cubic_reconstruction(A, x0))
        elif name == "conjugacy":
            results.append(check_conjugacy(A, x0))
        else:
            if report is None:
                report = simulate(A, x0, sc.run)
            if name == "prediction_vs_simulation":
                results.append(check_prediction(A, x0, report))
            else:
                results.append(check_ld_decay(A, x0, report))
    return results


def load_suite(data, seed=None):
    """Expand a suite description into ``(seed, checks, entries)``.

    ``entries`` holds either a :class:`Scenario` or the :class:`InputError`
    raised while parsing that scenario, so one bad entry does not sink the
    rest of the suite.
    """
    if not isinstance(data, dict):
        raise SuiteParseError("suite must be a JSON object")
    unknown = set(data) - {"seed", "checks", "scenarios", "generate"}
    if unknown:
        raise SuiteParseError(f"unknown suite fields: {sorted(unknown)}")
    seed = data.get("seed", 0) if seed is None else seed
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise SuiteParseError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    checks = data.get("checks", list(CHECKS))
    if not isinstance(checks, list) or any(ch not in CHECKS for ch in checks):
        raise SuiteParseError(f"checks must be a list drawn from {list(CHECKS)}")
    raw = data.get("scenarios", [])
    if not isinstance(raw, list):
        raise SuiteParseError("scenarios must be a list")
    entries = []
    for item in raw:
        try:
            sc = Scenario.from_dict(item)
            sc.initial_state()
            entries.append(sc)
        except InputError as exc:
            entries.append(exc)
    gen = data.get("generate")
    if gen is not None:
        try:
            count = int(gen["count"])
            m_min, m_max = int(gen.get("m_min", 2)), int(gen.get("m_max", 8))
        except (KeyError, TypeError, ValueError) as exc:
            raise SuiteParseError(f"bad generate block: {exc}") from None
        if count < 0 or not 2 <= m_min <= m_max:
            raise SuiteParseError("generate needs count >= 0 and 2 <= m_min <= m_max")
        rng = np.random.default_rng(seed)
        for i in range(count):
            m = int(rng.integers(m_min, m_max + 1))
            entries.append(random_scenario(rng, m, name=f"random-{i:03d}"))
    return seed, checks, entries


def load_suite_file(path, seed=None):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SuiteParseError(f"cannot read suite {path}: {exc}") from None
    return load_suite(data, seed)


def run_suite(seed, checks, entries) -> dict:
    """Run every check on every scenario; results are ordered by scenario index."""
    results = []
    n_fail = n_input = 0
    for idx, entry in enumerate(entries):
        if isinstance(entry, Exception):
            results.append({"index": idx, "status": "input_error",
                            "error": f"{type(entry).__name__}: {entry}"})
            n_input += 1
            continue
        item = {"index": idx, "name": entry.name, "m": entry.m}
        try:
            checks_out = run_checks(entry, checks)
        except InputError as exc:
            item.update(status="input_error", error=f"{type(exc).__name__}: {exc}")
            n_input += 1
        else:
            failed = [r.name for r in checks_out if not r.passed]
            n_fail += bool(failed)
            item.update(status="fail" if failed else "pass",
                        checks={r.name: r.to_json() for r in checks_out})
        results.append(item)
    return {
        "seed": seed,
        "checks": list(checks),
        "summary": {"scenarios": len(entries), "failed": n_fail, "input_errors": n_input,
                    "passed": len(entries) - n_fail - n_input},
        "results": results,
    }


def format_lines(report: dict) -> list[str]:
    lines = []
    for item in report["results"]:
        label = f"[{item['index']:03d}] {item.get('name') or ''}".rstrip()
        if item["status"] == "input_error":
            lines.append(f"{label}: INPUT ERROR {item['error']}")
            continue
        for name, res in item["checks"].items():
            r = res["residual"]
            rtxt = "n/a" if r is None else f"{r:.3e}"
            verdict = "PASS" if res["passed"] else "FAIL"
            extra = f" ({res['note']})" if res.get("note") else ""
            lines.append(f"{label} {name}: {verdict} residual={rtxt} tol={res['tolerance']:.0e}{extra}")
    s = report["summary"]
    lines.append(f"{s['passed']} passed, {s['failed']} failed, {s['input_errors']} input errors "
                 f"of {s['scenarios']} scenarios")
    return lines
