"""Spectrum of ``B_c``, its left Perron vector and closed-form trajectory limits."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateNormalization, EigensolverFailure, NonSimpleEigenvalueOne
from .fiber import ReducedMatrix, build_bc, embed, fiber_of, reduce_zero_loci
from .simplex import CoefficientMatrix, SimplexPoint

#: distance from 1 within which an eigenvalue counts as "equal to 1"
EPS_LAMBDA = 1e-9
#: hard cap on any step-count estimate
MAX_STEPS = 10**6


@dataclass(frozen=True, eq=False)
class SpectralSummary:
    eigenvalues: np.ndarray  # complex, descending modulus
    w: np.ndarray | None
    spectral_gap: float
    one_is_simple: bool
    ones_count: int

    def to_json(self) -> dict:
        return {
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "w": None if self.w is None else self.w.tolist(),
            "spectral_gap": self.spectral_gap,
            "one_is_simple": self.one_is_simple,
            "ones_count": self.ones_count,
        }


@dataclass(frozen=True, eq=False)
class LimitPrediction:
    beta: float
    limit_u: np.ndarray
    limit_x: np.ndarray
    w: np.ndarray | None
    kept_loci: np.ndarray
    spectral_gap: float

    def to_json(self) -> dict:
        return {
            "beta": self.beta,
            "limit_u": self.limit_u.tolist(),
            "limit_x": self.limit_x.tolist(),
            "w": None if self.w is None else self.w.tolist(),
            "kept_loci": self.kept_loci.tolist(),
            "spectral_gap": self.spectral_gap,
        }


def sort_eigenvalues(ev) -> np.ndarray:
    """Descending modulus, then descending real part, then descending imaginary part."""
    ev = np.asarray(ev, dtype=complex)
    order = np.lexsort((-ev.imag, -ev.real, -np.abs(ev)))
    return ev[order]


def _spectrum(M: np.ndarray) -> np.ndarray:
    try:
        ev = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc
    if not np.all(np.isfinite(ev)):
        raise EigensolverFailure("eigensolver returned non-finite values")
    return sort_eigenvalues(ev)


def _gap(ev: np.ndarray, ones: int) -> float:
    if ones != 1:
        return 0.0
    rest = np.delete(ev, np.argmin(np.abs(ev - 1.0)))
    if rest.size == 0:
        return 1.0
    return float(1.0 - np.abs(rest).max())


def eigen_all(B: ReducedMatrix) -> SpectralSummary:
    """Full spectrum of ``B_c`` plus the left Perron vector when 1 is simple."""
    ev = _spectrum(B.B)
    ones = int(np.count_nonzero(np.abs(ev - 1.0) <= EPS_LAMBDA))
    w = None
    if ones == 1:
        try:
            w = left_perron_vector(B)
        except (NonSimpleEigenvalueOne, DegenerateNormalization):
            w = None
    return SpectralSummary(ev, w, _gap(ev, ones), ones == 1, ones)


def left_perron_vector(B: ReducedMatrix) -> np.ndarray:
    """Solve ``w^T B = w^T`` with ``w^T c = 1``.

    The kernel of ``B^T - I`` is read off a singular value decomposition.

    Raises
    ------
    NonSimpleEigenvalueOne
        The kernel is not one-dimensional or the spectrum has more than one
        eigenvalue at 1.
    DegenerateNormalization
        ``w^T c`` vanishes.
    """
    M = B.B.T - np.eye(B.m)
    _, s, vt = np.linalg.svd(M)
    nullity = int(np.count_nonzero(s <= EPS_LAMBDA * max(1.0, s[0])))
    ones = int(np.count_nonzero(np.abs(_spectrum(B.B) - 1.0) <= EPS_LAMBDA))
    if nullity != 1 or ones != 1:
        raise NonSimpleEigenvalueOne(
            f"eigenvalue 1 is not simple (kernel dim {nullity}, {ones} eigenvalues at 1)",
            ones_count=ones,
        )
    w = vt[-1]
    norm = w @ B.fiber.c
    if abs(norm) <= 1e-14 * np.abs(w).max():
        raise DegenerateNormalization("left eigenvector is orthogonal to c")
    return w / norm


def perron_projection(B: ReducedMatrix, w) -> np.ndarray:
    """Rank-one limit ``c w^T`` of the powers of ``B_c``."""
    return np.outer(B.fiber.c, np.asarray(w, dtype=float))


def steps_to_tolerance(gap: float, tol: float = 1e-9, cap: int = MAX_STEPS) -> int:
    """Iterations until ``(1 - gap)^n`` drops below ``tol``."""
    if gap >= 1.0:
        return 1
    if gap <= 0.0:
        return cap
    return min(cap, max(1, math.ceil(math.log(tol) / math.log1p(-gap))))


def predict_limit(A: CoefficientMatrix, x0: SimplexPoint) -> LimitPrediction:
    """Limit of ``W^n(x0)`` without iterating.

    Zero loci are removed first and come back as zero coordinates.

    Raises
    ------
    NonSimpleEigenvalueOne
        Some locus is frozen (no recombination partner on this fiber), the
        eigenvalue 1 is not simple, or another eigenvalue sits on the unit
        circle.  Simulation is the fallback.
    """
    fiber, u = fiber_of(x0)
    A_red, f_red, u_red, keep = reduce_zero_loci(A, fiber, u)
    m = A.m
    if keep.size == 1:
        # one surviving locus: W is the identity on this fiber
        k = int(keep[0])
        beta = float(u_red[0] / f_red.c[0])
        limit_x = embed(keep, m, x0.coords[2 * k:2 * k + 2])
        return LimitPrediction(beta, limit_x[0::2].copy(), limit_x, None, keep, 1.0)
    frozen = A_red.frozen_loci
    if frozen:
        raise NonSimpleEigenvalueOne(
            "row condition fails on this fiber: frozen loci " + ", ".join(str(int(keep[i])) for i in frozen),
            frozen_loci=[int(keep[i]) for i in frozen],
        )
    B = build_bc(A_red, f_red)
    summary = eigen_all(B)
    if not summary.one_is_simple or summary.w is None:
        raise NonSimpleEigenvalueOne("eigenvalue 1 of B_c is not simple", ones_count=summary.ones_count)
    if summary.spectral_gap <= EPS_LAMBDA:
        raise NonSimpleEigenvalueOne("another eigenvalue lies on the unit circle", ones_count=summary.ones_count)
    w = summary.w
    beta = float(w @ u_red)
    c = f_red.c
    reduced_x = np.empty(2 * c.size)
    reduced_x[0::2] = beta * c
    reduced_x[1::2] = c * (1.0 - beta)
    limit_x = embed(keep, m, reduced_x)
    return LimitPrediction(beta, limit_x[0::2].copy(), limit_x, w, keep, summary.spectral_gap)


def beta_conservation_residual(B, w, trajectory) -> float:
    """``max_n |w^T u^(n) - w^T u^(0)|`` over a linear trajectory."""
    proj = np.asarray(trajectory, dtype=float) @ np.asarray(w, dtype=float)
    return float(np.max(np.abs(proj - proj[0])))
