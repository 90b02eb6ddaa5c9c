"""Scenario files, trajectory simulation and run reports."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NonSimpleEigenvalueOne, NotASimplexPoint, ScenarioParseError
from .fiber import state_from_fiber
from .simplex import EPS_VALID, CoefficientMatrix, SimplexPoint, interaction_terms, validate_state
from .spectral import LimitPrediction, predict_limit

DEFAULT_MAX_ITERS = 10**6
DEFAULT_CONV_TOL = 1e-12


@dataclass
class RunConfig:
    max_iters: int = DEFAULT_MAX_ITERS
    conv_tol: float = DEFAULT_CONV_TOL
    record_every: int = 1

    def __post_init__(self):
        if isinstance(self.max_iters, bool) or not isinstance(self.max_iters, int) or self.max_iters < 1:
            raise ScenarioParseError(f"run.max_iters must be an integer >= 1, got {self.max_iters!r}")
        if isinstance(self.record_every, bool) or not isinstance(self.record_every, int) or self.record_every < 1:
            raise ScenarioParseError(f"run.record_every must be an integer >= 1, got {self.record_every!r}")
        if not isinstance(self.conv_tol, (int, float)) or not self.conv_tol > 0:
            raise ScenarioParseError(f"run.conv_tol must be positive, got {self.conv_tol!r}")
        self.conv_tol = float(self.conv_tol)


@dataclass
class Scenario:
    """One run: coefficients, an initial state and iteration settings.

    The initial state is given either as ``x0`` (``2m`` coordinates) or as the
    fiber ``c`` together with first-allele frequencies ``u0``.
    """

    m: int
    A: list
    x0: list | None = None
    c: list | None = None
    u0: list | None = None
    run: RunConfig = field(default_factory=RunConfig)
    name: str | None = None

    @classmethod
    def from_dict(cls, data) -> "Scenario":
        if not isinstance(data, dict):
            raise ScenarioParseError("scenario must be a JSON object")
        unknown = set(data) - {"m", "A", "x0", "c", "u0", "run", "name"}
        if unknown:
            raise ScenarioParseError(f"unknown scenario fields: {sorted(unknown)}")
        try:
            m = data["m"]
            A = data["A"]
        except KeyError as exc:
            raise ScenarioParseError(f"missing field {exc.args[0]!r}") from None
        if isinstance(m, bool) or not isinstance(m, int) or m < 2:
            raise ScenarioParseError(f"m must be an integer >= 2, got {m!r}")
        run = data.get("run", {})
        if not isinstance(run, dict):
            raise ScenarioParseError("run must be an object")
        try:
            cfg = RunConfig(**run)
        except TypeError as exc:
            raise ScenarioParseError(f"bad run settings: {exc}") from None
        sc = cls(m=m, A=A, x0=data.get("x0"), c=data.get("c"), u0=data.get("u0"),
                 run=cfg, name=data.get("name"))
        sc.coefficients()
        has_x0 = sc.x0 is not None
        has_cu = sc.c is not None or sc.u0 is not None
        if has_x0 == has_cu:
            raise ScenarioParseError("give exactly one of x0 or (c, u0)")
        if has_cu and (sc.c is None or sc.u0 is None):
            raise ScenarioParseError("c and u0 must be given together")
        return sc

    def to_dict(self) -> dict:
        out = {"m": self.m, "A": self.A}
        if self.name is not None:
            out = {"name": self.name, **out}
        if self.x0 is not None:
            out["x0"] = self.x0
        else:
            out["c"] = self.c
            out["u0"] = self.u0
        out["run"] = {"max_iters": self.run.max_iters, "conv_tol": self.run.conv_tol,
                      "record_every": self.run.record_every}
        return out

    def coefficients(self) -> CoefficientMatrix:
        try:
            a = np.array(self.A, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ScenarioParseError(f"A is not a numeric matrix: {exc}") from None
        if a.shape != (self.m, self.m):
            raise ScenarioParseError(f"A must be {self.m}x{self.m}, got shape {a.shape}")
        try:
            return CoefficientMatrix(a)
        except InputError as exc:
            raise ScenarioParseError(str(exc)) from None

    def initial_state(self) -> SimplexPoint:
        if self.x0 is not None:
            if len(self.x0) != 2 * self.m:
                raise ScenarioParseError(f"x0 must have {2 * self.m} entries")
            return validate_state(self.x0)
        try:
            c = np.array(self.c, dtype=float)
            u = np.array(self.u0, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ScenarioParseError(f"c/u0 not numeric: {exc}") from None
        if c.shape != (self.m,) or u.shape != (self.m,):
            raise ScenarioParseError(f"c and u0 must have {self.m} entries")
        if np.any(u < -EPS_VALID) or np.any(u > c + EPS_VALID):
            raise NotASimplexPoint("need 0 <= u0_i <= c_i")
        return validate_state(state_from_fiber(c, np.clip(u, 0.0, c)))


def load_scenario(path) -> Scenario:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioParseError(f"cannot read scenario {path}: {exc}") from None
    return Scenario.from_dict(data)


def random_scenario(rng: np.random.Generator, m: int, name=None, **run) -> Scenario:
    """Off-diagonal ``a_ij ~ U[0.05, 1]`` and ``x0`` uniform on the simplex."""
    a = rng.uniform(0.05, 1.0, size=(m, m))
    np.fill_diagonal(a, 0.0)
    x = rng.exponential(size=2 * m)
    x /= x.sum()
    return Scenario(m=m, A=a.tolist(), x0=x.tolist(), run=RunConfig(**run), name=name)


def _refusal(exc: NonSimpleEigenvalueOne) -> dict:
    return {"refused": True, "reason": str(exc), "frozen_loci": exc.frozen_loci,
            "fallback": "simulate"}


@dataclass
class RunReport:
    m: int
    trajectory: list  # (iteration, state ndarray)
    ld_trace: list
    converged_at: int | None
    iterations: int
    final_state: np.ndarray
    prediction: LimitPrediction | None
    refusal: dict | None

    @property
    def prediction_error(self) -> float | None:
        if self.prediction is None:
            return None
        return float(np.max(np.abs(self.final_state - self.prediction.limit_x)))

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "converged_at": self.converged_at,
            "iterations": self.iterations,
            "final_state": self.final_state.tolist(),
            "prediction": self.prediction.to_json() if self.prediction is not None else self.refusal,
            "prediction_error": self.prediction_error,
            "trajectory": [{"iteration": k, "x": x.tolist()} for k, x in self.trajectory],
            "ld_trace": self.ld_trace,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["iteration", *(f"x{i + 1}" for i in range(2 * self.m)), "ld_sup"])
        for k, x in self.trajectory:
            writer.writerow([k, *(repr(float(v)) for v in x), repr(self.ld_trace[k])])
        return buf.getvalue()


def simulate(A: CoefficientMatrix, x0: SimplexPoint, run: RunConfig | None = None) -> RunReport:
    """Iterate W from ``x0`` until the sup-norm step drops below ``conv_tol``.

    ``ld_trace[k]`` is the LD sup-norm of the ``k``-th state; ``converged_at``
    is the first ``k`` whose outgoing step is below tolerance.
    """
    run = run or RunConfig()
    a_off = A.offdiag
    x = x0.coords.copy()
    trajectory = [(0, x.copy())]
    ld_trace = []
    converged_at = None
    k = 0
    while k < run.max_iters:
        d = interaction_terms(a_off, x)
        ld_trace.append(float(np.max(np.abs(d))))
        nxt = np.empty_like(x)
        nxt[0::2] = x[0::2] + d
        nxt[1::2] = x[1::2] - d
        step = float(np.max(np.abs(nxt - x)))
        x = nxt
        k += 1
        if k % run.record_every == 0:
            trajectory.append((k, x.copy()))
        if step < run.conv_tol:
            converged_at = k - 1
            break
    ld_trace.append(float(np.max(np.abs(interaction_terms(a_off, x)))))
    if trajectory[-1][0] != k:
        trajectory.append((k, x.copy()))
    try:
        prediction, refusal = predict_limit(A, x0), None
    except NonSimpleEigenvalueOne as exc:
        prediction, refusal = None, _refusal(exc)
    return RunReport(A.m, trajectory, ld_trace, converged_at, k, x, prediction, refusal)


def simulate_scenario(sc: Scenario) -> RunReport:
    return simulate(sc.coefficients(), sc.initial_state(), sc.run)
