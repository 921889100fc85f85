"""Feasible curves along tangent directions: quasi-geodesic and Cayley.

Both families are first-order retractions. The quasi-geodesic curve is
globally defined and costs two small matrix exponentials per evaluation.
The Cayley curve is defined only while its inner linear system stays
invertible; production code uses the low-rank form (a 4p x 4p solve), and
a dense O(n^3) reference is kept for tests.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .manifold import SymplecticStiefel
from .matkit import (
    MatrixOverflowError,
    SingularMatrixError,
    apply_J_left,
    apply_J_right,
    expm,
    solve_dense,
)

__all__ = [
    "DomainError",
    "RetractionKind",
    "QuasiGeodesicStep",
    "CayleyStep",
    "CayleyGradientStep",
    "retract_qgeo",
    "retract_cayley_generic",
    "retract_cayley_lowrank",
    "retract_cayley_dense",
    "cayley_dense_from_S",
]

# Inner systems with condition estimates beyond this are rejected as
# out-of-domain even when the LU pivots pass.
CAYLEY_COND_LIMIT = 1e12


class DomainError(RuntimeError):
    """The Cayley curve is not defined at the requested step size."""


class RetractionKind(Enum):
    QUASI_GEODESIC = "qgeo"
    CAYLEY_LOWRANK = "cayley"
    CAYLEY_DENSE = "cayley-dense"


def _solve_inner(A: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve the small Cayley system, mapping ill-conditioning to DomainError."""
    if np.linalg.cond(A) > CAYLEY_COND_LIMIT:
        raise DomainError("Cayley inner system is numerically singular")
    try:
        return solve_dense(A, rhs)
    except SingularMatrixError as exc:
        raise DomainError("Cayley inner system is numerically singular") from exc


class QuasiGeodesicStep:
    """Quasi-geodesic curve t -> Y(t) through X with initial velocity Z.

    Y(t) = [X, Z] exp(t [[-JW, J Z.T J Z], [I, -JW]]) [I; 0] exp(t JW)
    with W = X.T J Z. The 4p x 4p exponential argument is cached; the two
    exponentials themselves are recomputed at every t.
    """

    def __init__(self, manifold: SymplecticStiefel, X: np.ndarray, Z: np.ndarray):
        n, p = manifold.n, manifold.p
        JZ = apply_J_left(n, Z)
        W = X.T @ JZ
        JW = apply_J_left(p, W)
        JS0 = apply_J_left(p, Z.T @ JZ)
        B = np.zeros((4 * p, 4 * p))
        B[: 2 * p, : 2 * p] = -JW
        B[: 2 * p, 2 * p :] = JS0
        B[2 * p :, : 2 * p] = np.eye(2 * p)
        B[2 * p :, 2 * p :] = -JW
        self._p = p
        self._B = B
        self._JW = JW
        self._XZ = np.concatenate([X, Z], axis=1)

    def at(self, t: float) -> np.ndarray:
        E = expm(t * self._B)
        with np.errstate(over="ignore", invalid="ignore"):
            Y = self._XZ @ (E[:, : 2 * self._p] @ expm(t * self._JW))
        if not np.all(np.isfinite(Y)):
            raise MatrixOverflowError("quasi-geodesic point left the double range")
        return Y


class CayleyStep:
    """Cayley curve along an arbitrary tangent direction Z at X.

    With S = L R.T + R L.T = U V.T (L = (I - XJ X.T J.T / 2) Z, R = XJ,
    U = [L R], V = [R L]) the curve is

        Y(t) = X + t U (I + (t/2) V.T J.T U)^{-1} V.T J X,

    which equals cay((t/2) S J) X wherever that transform is defined. Only
    the 4p x 4p system depends on t, so one instance serves a whole
    backtracking sweep.
    """

    def __init__(self, manifold: SymplecticStiefel, X: np.ndarray, Z: np.ndarray):
        n = manifold.n
        L, R = manifold.tangent_to_factors(X, Z)
        self._U = np.concatenate([L, R], axis=1)
        V = np.concatenate([R, L], axis=1)
        self._K = -(V.T @ apply_J_left(n, self._U))  # V.T J.T U
        self._rhs = V.T @ apply_J_left(n, X)
        self._X = X

    def at(self, t: float) -> np.ndarray:
        A = np.eye(self._K.shape[0]) + (0.5 * t) * self._K
        y = _solve_inner(A, self._rhs)
        return self._X + t * (self._U @ y)


class CayleyGradientStep:
    """Cayley curve along the antigradient, from the gradient factors.

    Given P_f = H_X egrad and E_rho = (rho/2) X.T egrad produced by the
    Riemannian gradient, returns

        R_X(-t grad f(X)) = X + t U (I + (t/2) V.T J.T U)^{-1} V.T J X

    with U = [-P_f, XJ] and V = [XJ, -P_f]. On an exactly feasible point the
    inner blocks reduce to [[E_rho, J.T], [P_f.T J.T P_f, -E_rho.T]] and the
    right-hand side to [I; -E_rho.T J]; we nevertheless compute V.T J.T U and
    V.T J X in full, for the same reason the gradient assembly keeps the
    trivially-identity factor (XJ).T J X: the shortcut blocks feed the
    current feasibility error back into the step and let it snowball over
    long runs, whereas cay((t/2) S J) leaves the residual of X unchanged for
    any symmetric S.
    """

    def __init__(
        self,
        manifold: SymplecticStiefel,
        X: np.ndarray,
        p_f: np.ndarray,
        e_rho: np.ndarray,
    ):
        n, p = manifold.n, manifold.p
        XJ = apply_J_right(X, p)
        self._U = np.concatenate([-p_f, XJ], axis=1)
        V = np.concatenate([XJ, -p_f], axis=1)
        self._M = -(V.T @ apply_J_left(n, self._U))  # V.T J.T U
        self._rhs = V.T @ apply_J_left(n, X)
        self._X = X

    def at(self, t: float) -> np.ndarray:
        A = np.eye(self._M.shape[0]) + (0.5 * t) * self._M
        y = _solve_inner(A, self._rhs)
        return self._X + t * (self._U @ y)


def retract_qgeo(
    manifold: SymplecticStiefel, X: np.ndarray, Z: np.ndarray, t: float
) -> np.ndarray:
    """One-shot quasi-geodesic retraction R_X(t Z)."""
    return QuasiGeodesicStep(manifold, X, Z).at(t)


def retract_cayley_generic(
    manifold: SymplecticStiefel, X: np.ndarray, Z: np.ndarray, t: float
) -> np.ndarray:
    """One-shot low-rank Cayley retraction R_X(t Z) along arbitrary tangent Z."""
    return CayleyStep(manifold, X, Z).at(t)


def retract_cayley_lowrank(
    manifold: SymplecticStiefel,
    X: np.ndarray,
    p_f: np.ndarray,
    e_rho: np.ndarray,
    t: float,
) -> np.ndarray:
    """One-shot low-rank Cayley step R_X(-t grad f) from gradient factors."""
    return CayleyGradientStep(manifold, X, p_f, e_rho).at(t)


def cayley_dense_from_S(X: np.ndarray, S: np.ndarray, t: float) -> np.ndarray:
    """Dense reference cay((t/2) S J) X for an explicit symmetric S (test scale)."""
    two_n = X.shape[0]
    SJ = apply_J_right(S, two_n // 2)
    A = np.eye(two_n) - (0.5 * t) * SJ
    B = X + (0.5 * t) * (SJ @ X)
    try:
        return solve_dense(A, B)
    except SingularMatrixError as exc:
        raise DomainError("Cayley transform undefined: I - (t/2) S J singular") from exc


def retract_cayley_dense(
    manifold: SymplecticStiefel, X: np.ndarray, Z: np.ndarray, t: float
) -> np.ndarray:
    """Dense O(n^3) Cayley reference forming S explicitly. Test oracle only."""
    L, R = manifold.tangent_to_factors(X, Z)
    S = L @ R.T + R @ L.T
    return cayley_dense_from_S(X, S, t)
