"""Population states, recombination coefficients and the many-loci operator W.

A state lives on the simplex of ``2m`` gamete frequencies.  Coordinates come in
pairs ``(x[2i], x[2i+1])`` (0-based), one pair per locus ``i``; the even slot
holds the first allele, the odd slot the second.  All functions here are pure.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadDimension, DimensionMismatch, InputError, NotASimplexPoint

#: validation tolerance for raw user states
EPS_VALID = 1e-9


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class SimplexPoint:
    """A point of the simplex ``S^{2m-1}``.

    The constructor stores ``coords`` as given; use :func:`validate_state`
    for untrusted input.
    """

    coords: np.ndarray

    def __post_init__(self):
        coords = _frozen(self.coords)
        if coords.ndim != 1 or coords.size % 2 or coords.size < 4:
            raise BadDimension(f"state must have even length >= 4, got shape {coords.shape}")
        object.__setattr__(self, "coords", coords)

    @property
    def m(self) -> int:
        return self.coords.size // 2

    @property
    def odd(self) -> np.ndarray:
        """First-allele frequencies ``x_1, x_3, ...`` (1-based naming)."""
        return self.coords[0::2]

    @property
    def even(self) -> np.ndarray:
        return self.coords[1::2]

    def tolist(self) -> list[float]:
        return self.coords.tolist()


@dataclass(frozen=True, eq=False)
class CoefficientMatrix:
    """Recombination coefficients ``a_ij`` in ``[0, 1]``.

    Diagonal entries are kept for round-tripping but never used: the
    ``j = i`` term of the operator vanishes identically.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = _frozen(self.entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise BadDimension(f"coefficient matrix must be square, got shape {a.shape}")
        if a.shape[0] < 2:
            raise BadDimension("need at least m = 2 loci")
        if not np.all(np.isfinite(a)) or a.min() < 0.0 or a.max() > 1.0:
            raise InputError("coefficients must lie in [0, 1]")
        object.__setattr__(self, "entries", a)
        off = a.copy()
        np.fill_diagonal(off, 0.0)
        off.setflags(write=False)
        object.__setattr__(self, "offdiag", off)

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.offdiag, self.offdiag.T))

    @property
    def row_sums(self) -> np.ndarray:
        return self.offdiag.sum(axis=1)

    @property
    def satisfies_row_condition(self) -> bool:
        """Every locus recombines with at least one other locus."""
        return bool(np.all(self.row_sums > 0.0))

    @property
    def frozen_loci(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.row_sums == 0.0)]

    @property
    def strictly_positive_offdiag(self) -> bool:
        mask = ~np.eye(self.m, dtype=bool)
        return bool(np.all(self.entries[mask] > 0.0))

    def submatrix(self, keep) -> "CoefficientMatrix":
        keep = np.asarray(keep, dtype=int)
        return CoefficientMatrix(self.entries[np.ix_(keep, keep)])

    def tolist(self) -> list[list[float]]:
        return self.entries.tolist()


@dataclass(frozen=True, eq=False)
class CubicMatrix:
    """Heredity coefficients ``P[i, j, k]``: probability that the pair ``(i, j)``
    produces gamete ``k``."""

    P: np.ndarray

    def level(self, k: int) -> np.ndarray:
        return self.P[:, :, k]

    def apply(self, x) -> np.ndarray:
        """Evaluate the quadratic stochastic operator ``x'_k = sum P_ij,k x_i x_j``."""
        x = np.asarray(x, dtype=float)
        return np.einsum("ijk,i,j->k", self.P, x, x)

    def to_json(self) -> list:
        """Levels ``P_1 .. P_2m`` as row-major nested lists."""
        return [self.level(k).tolist() for k in range(self.P.shape[2])]


def validate_state(raw) -> SimplexPoint:
    """Check a raw coordinate list and return a clean :class:`SimplexPoint`.

    Coordinates within ``EPS_VALID`` of the simplex are clamped to ``[0, 1]``
    and renormalised to sum exactly to one.

    Raises
    ------
    BadDimension
        Odd length or fewer than four coordinates.
    NotASimplexPoint
        A coordinate below ``-EPS_VALID`` or a sum off by more than ``EPS_VALID``.
    """
    try:
        x = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise NotASimplexPoint(f"state is not numeric: {exc}") from exc
    if x.ndim != 1 or x.size % 2 or x.size < 4:
        raise BadDimension(f"state must have even length >= 4, got {x.size if x.ndim == 1 else x.shape}")
    if not np.all(np.isfinite(x)):
        raise NotASimplexPoint("state has non-finite coordinates")
    if x.min() < -EPS_VALID:
        raise NotASimplexPoint(f"negative coordinate {x.min():.3e}")
    total = x.sum()
    if abs(total - 1.0) > EPS_VALID:
        raise NotASimplexPoint(f"coordinates sum to {total!r}, not 1")
    x = np.clip(x, 0.0, 1.0)
    return SimplexPoint(x / x.sum())


def _check_dims(A: CoefficientMatrix, x: SimplexPoint):
    if A.m != x.m:
        raise DimensionMismatch(f"coefficients are for m={A.m} loci, state has m={x.m}")


def interaction_terms(a_off: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``d_i = sum_j a_ij (x_{2i} x_{2j-1} - x_{2i-1} x_{2j})`` on raw arrays.

    ``a_off`` must have a zero diagonal.  Used by the hot loops.
    """
    odd = x[0::2]
    even = x[1::2]
    return even * (a_off @ odd) - odd * (a_off @ even)


def w_step(a_off: np.ndarray, x: np.ndarray) -> np.ndarray:
    """One application of W on a raw array (no validation)."""
    d = interaction_terms(a_off, x)
    out = np.empty_like(x)
    out[0::2] = x[0::2] + d
    out[1::2] = x[1::2] - d
    return out


def apply_w(A: CoefficientMatrix, x: SimplexPoint) -> SimplexPoint:
    """Next-generation state under the many-loci recombination operator."""
    _check_dims(A, x)
    return SimplexPoint(w_step(A.offdiag, x.coords))


def apply_w_stochastic_form(A: CoefficientMatrix, x: SimplexPoint) -> SimplexPoint:
    """Same map evaluated through its homogeneous quadratic (stochastic) form.

    Every coordinate is a sum of nonnegative products, so this form makes
    nonnegativity evident.  It only agrees with :func:`apply_w` on the simplex.
    """
    _check_dims(A, x)
    a = A.offdiag
    odd, even = x.odd, x.even
    s_odd, s_even = odd.sum(), even.sum()
    a_odd, a_even = a @ odd, a @ even
    out = np.empty(2 * x.m)
    out[0::2] = odd * (s_odd + s_even - a_even) + even * a_odd
    out[1::2] = even * (s_even + s_odd - a_odd) + odd * a_even
    return SimplexPoint(out)


def build_cubic_matrix(A: CoefficientMatrix) -> CubicMatrix:
    """Symmetric heredity tensor whose quadratic form reproduces W on the simplex.

    The coefficient of ``x_i x_j`` (``i != j``) in the stochastic form is split
    evenly between ``P[i, j, k]`` and ``P[j, i, k]``.
    """
    m = A.m
    a = A.offdiag
    n = 2 * m
    Q = np.zeros((n, n, n))
    for i in range(m):
        ko, ke = 2 * i, 2 * i + 1
        for j in range(m):
            jo, je = 2 * j, 2 * j + 1
            # first-allele output of locus i
            Q[ko, jo, ko] += 1.0
            Q[ko, je, ko] += 1.0 - a[i, j]
            Q[ke, jo, ko] += a[i, j]
            # second-allele output of locus i
            Q[ke, je, ke] += 1.0
            Q[ke, jo, ke] += 1.0 - a[i, j]
            Q[ko, je, ke] += a[i, j]
    P = 0.5 * (Q + Q.transpose(1, 0, 2))
    P.setflags(write=False)
    return CubicMatrix(P)


def linkage_disequilibrium(A: CoefficientMatrix, x: SimplexPoint) -> np.ndarray:
    """Per-locus interaction terms; ``W(x)`` shifts the first allele of locus i by ``d[i]``."""
    _check_dims(A, x)
    return interaction_terms(A.offdiag, x.coords)
