"""Invariant fibers of W and the linear dynamics living on them.

Pair sums ``c_i = x_{2i-1} + x_{2i}`` never change under W, so the simplex is
foliated into invariant fibers indexed by ``c``.  On a fiber W acts linearly on
the first-allele frequencies ``u_i = x_{2i-1}`` through the matrix ``B_c``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AllLociZero, DimensionMismatch
from .simplex import CoefficientMatrix, SimplexPoint, apply_w

#: fiber coordinates at or below this are treated as absent loci
EPS_ZERO = 1e-12


@dataclass(frozen=True, eq=False)
class Fiber:
    c: np.ndarray
    zero_set: tuple[int, ...] = field(default=None)

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "c", c)
        if self.zero_set is None:
            zs = tuple(int(i) for i in np.flatnonzero(c <= EPS_ZERO))
            object.__setattr__(self, "zero_set", zs)

    @property
    def m(self) -> int:
        return self.c.size


@dataclass(frozen=True, eq=False)
class ReducedMatrix:
    """``B_c`` together with the fiber and coefficients it was built from."""

    B: np.ndarray
    fiber: Fiber
    A: CoefficientMatrix

    @property
    def m(self) -> int:
        return self.B.shape[0]

    @property
    def column_sums(self) -> np.ndarray:
        return self.B.sum(axis=0)

    def to_json(self) -> dict:
        return {
            "B": self.B.tolist(),
            "c": self.fiber.c.tolist(),
            "zero_set": list(self.fiber.zero_set),
            "A": self.A.tolist(),
        }


def fiber_of(x: SimplexPoint) -> tuple[Fiber, np.ndarray]:
    """Pair sums ``c`` and first-allele frequencies ``u`` of a state."""
    u = x.odd.copy()
    return Fiber(x.odd + x.even), u


def state_from_fiber(c, u) -> np.ndarray:
    """Inverse of :func:`fiber_of`: ``(u_1, c_1 - u_1, ..., u_m, c_m - u_m)``."""
    c = np.asarray(c, dtype=float)
    u = np.asarray(u, dtype=float)
    x = np.empty(2 * c.size)
    x[0::2] = u
    x[1::2] = c - u
    return x


def reduce_zero_loci(A: CoefficientMatrix, fiber: Fiber, u):
    """Drop loci with (numerically) zero pair sum.

    Returns
    -------
    A_red, fiber_red, u_red, keep
        ``keep`` holds the original indices of the surviving loci, in order.
        When nothing is dropped the inputs come back unchanged and ``keep`` is
        ``arange(m)``.
    """
    u = np.asarray(u, dtype=float)
    m = fiber.m
    if A.m != m or u.size != m:
        raise DimensionMismatch("A, c and u must share the number of loci")
    if not fiber.zero_set:
        return A, fiber, u, np.arange(m)
    keep = np.setdiff1d(np.arange(m), fiber.zero_set)
    if keep.size == 0:
        raise AllLociZero("every fiber coordinate is zero")
    if keep.size == 1:
        # a single surviving locus cannot be represented as a 2-locus system;
        # W acts as the identity there
        A_red = None
    else:
        A_red = A.submatrix(keep)
    return A_red, Fiber(fiber.c[keep], zero_set=()), u[keep], keep


def embed(keep, m: int, reduced_x) -> np.ndarray:
    """Place a reduced ``2k``-state back into ``2m`` coordinates, zeros elsewhere."""
    reduced_x = np.asarray(reduced_x, dtype=float)
    out = np.zeros(2 * m)
    keep = np.asarray(keep, dtype=int)
    out[2 * keep] = reduced_x[0::2]
    out[2 * keep + 1] = reduced_x[1::2]
    return out


def bc_matrix(a_off: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Raw ``B_c``: ``b_ii = 1 - sum_{j!=i} a_ij c_j`` and ``b_ik = c_i a_ik``."""
    B = c[:, None] * a_off
    B[np.diag_indices_from(B)] = 1.0 - a_off @ c
    return B


def build_bc(A: CoefficientMatrix, fiber: Fiber) -> ReducedMatrix:
    if A.m != fiber.m:
        raise DimensionMismatch(f"A has m={A.m}, fiber has m={fiber.m}")
    B = bc_matrix(A.offdiag, fiber.c)
    B.setflags(write=False)
    return ReducedMatrix(B, fiber, A)


def _as_matrix(B) -> np.ndarray:
    return B.B if isinstance(B, ReducedMatrix) else np.asarray(B, dtype=float)


def iterate_linear(B, u0, n: int) -> np.ndarray:
    """``B^n u0`` by ``n`` repeated matrix-vector products."""
    M = _as_matrix(B)
    u = np.array(u0, dtype=float)
    if u.shape != (M.shape[1],):
        raise DimensionMismatch(f"vector of length {u.size} does not fit a {M.shape} matrix")
    if n < 0:
        raise ValueError("n must be nonnegative")
    for _ in range(n):
        u = M @ u
    return u


def linear_trajectory(B, u0, n: int) -> np.ndarray:
    """All iterates ``u^(0) .. u^(n)`` as rows of an ``(n + 1, m)`` array."""
    M = _as_matrix(B)
    u = np.array(u0, dtype=float)
    if u.shape != (M.shape[1],):
        raise DimensionMismatch(f"vector of length {u.size} does not fit a {M.shape} matrix")
    out = np.empty((n + 1, u.size))
    out[0] = u
    for k in range(n):
        u = M @ u
        out[k + 1] = u
    return out


def restrict_consistency_check(A: CoefficientMatrix, x: SimplexPoint) -> float:
    """Sup-norm gap between W(x) on first alleles and ``B_c u`` on its fiber."""
    fiber, u = fiber_of(x)
    B = build_bc(A, fiber)
    return float(np.max(np.abs(apply_w(A, x).odd - B.B @ u)))
