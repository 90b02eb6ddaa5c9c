"""Fixed points of W on a fiber: the kernel of ``H_c`` inside the box ``0 <= u <= c``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .fiber import Fiber, fiber_of
from .simplex import CoefficientMatrix, SimplexPoint, w_step

#: relative singular-value threshold for numerical rank
EPS_RANK = 1e-10


@dataclass(frozen=True, eq=False)
class FixedPointSet:
    H: np.ndarray
    null_basis: list
    c: np.ndarray
    segment: tuple[float, float]

    @property
    def kernel_dim(self) -> int:
        return len(self.null_basis)

    @property
    def every_point_fixed(self) -> bool:
        return not np.any(self.H)

    def segment_point(self, beta: float) -> np.ndarray:
        """The state ``(beta c_1, (1 - beta) c_1, ...)`` on the fixed segment."""
        out = np.empty(2 * self.c.size)
        out[0::2] = beta * self.c
        out[1::2] = (1.0 - beta) * self.c
        return out

    def to_json(self) -> dict:
        lo, hi = self.segment
        return {
            "H": self.H.tolist(),
            "null_basis": [v.tolist() for v in self.null_basis],
            "kernel_dim": self.kernel_dim,
            "every_point_fixed": self.every_point_fixed,
            "closed_form": self.kernel_dim == 1,
            "Hc_residual": float(np.max(np.abs(self.H @ self.c))),
            "segment": {
                "beta": [lo, hi],
                "endpoints": [self.segment_point(lo).tolist(), self.segment_point(hi).tolist()],
            },
        }


def build_hc(A: CoefficientMatrix, fiber: Fiber) -> np.ndarray:
    """``H[i, i] = sum_{j != i} a_ij c_j`` and ``H[i, k] = -c_i a_ik``."""
    if A.m != fiber.m:
        raise DimensionMismatch(f"A has m={A.m}, fiber has m={fiber.m}")
    c = fiber.c
    H = -c[:, None] * A.offdiag
    H[np.diag_indices_from(H)] = A.offdiag @ c
    return H


def null_space(H) -> list[np.ndarray]:
    """Orthonormal kernel basis; each vector's first nonzero entry is positive."""
    H = np.asarray(H, dtype=float)
    n = H.shape[1]
    _, s, vt = np.linalg.svd(H)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(s > EPS_RANK * smax))
    basis = []
    for v in vt[rank:n]:
        nz = np.flatnonzero(np.abs(v) > 1e-12)
        if nz.size and v[nz[0]] < 0:
            v = -v
        basis.append(v.copy())
    return basis


def fixed_point_set(A: CoefficientMatrix, fiber: Fiber) -> FixedPointSet:
    """Kernel of ``H_c`` and the segment ``{beta c : beta in [0, 1]}`` of fixed points.

    The segment is the part of the line through ``c`` inside the box
    ``0 <= u_i <= c_i``; it is always ``[0, 1]``.  When the kernel has more
    than one dimension the segment is only part of the fixed set.
    """
    H = build_hc(A, fiber)
    return FixedPointSet(H, null_space(H), fiber.c.copy(), (0.0, 1.0))


def fixed_point_residuals(A: CoefficientMatrix, x: SimplexPoint) -> tuple[float, float]:
    """``(||W(x) - x||_inf, ||H_c u||_inf)``; the two agree up to rounding."""
    if A.m != x.m:
        raise DimensionMismatch(f"A has m={A.m}, state has m={x.m}")
    nonlinear = float(np.max(np.abs(w_step(A.offdiag, x.coords) - x.coords)))
    fiber, u = fiber_of(x)
    linear = float(np.max(np.abs(build_hc(A, fiber) @ u)))
    return nonlinear, linear


def is_fixed_point(A: CoefficientMatrix, x: SimplexPoint, tol: float = 1e-12) -> bool:
    return fixed_point_residuals(A, x)[0] <= tol

