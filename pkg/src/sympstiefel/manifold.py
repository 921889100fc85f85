"""Geometry of the symplectic Stiefel manifold Sp(2p, 2n).

Points are 2n x 2p arrays X with X.T J X = J; tangent vectors at X are
2n x 2p arrays Z with Z.T J X + X.T J Z = 0. The metric family g_rho weights
the X-block coordinate of a tangent vector by 1/rho and comes in two
flavours ("I" and "II") that differ in how the complement basis is
orthonormalized. The complement basis itself is never materialized here;
the test suite rebuilds it by brute force to cross-check these formulas.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .matkit import (
    apply_J_left,
    apply_J_right,
    apply_Jt_left,
    as_rng,
    rand_gaussian,
    rand_symplectic,
)

__all__ = [
    "MetricSpec",
    "GradientFactors",
    "SymplecticStiefel",
    "check_symplectic",
    "tangency_residual",
    "FEASIBILITY_TOL",
    "GRAM_COND_WARN",
]

# Residual below which a point is accepted as feasible (repo convention).
FEASIBILITY_TOL = 1e-8
# Gram matrix X.T X conditioning beyond this signals feasibility drift.
GRAM_COND_WARN = 1e12


@dataclass(frozen=True)
class MetricSpec:
    """Metric parameter rho > 0 plus the complement orthonormalization variant."""

    rho: float
    variant: str = "I"

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.variant not in ("I", "II"):
            raise ValueError(f"variant must be 'I' or 'II', got {self.variant!r}")

    @staticmethod
    def default(variant: str = "I") -> "MetricSpec":
        """Per-variant default rho (1/2 for variant I, 1 for variant II)."""
        return MetricSpec(rho=0.5 if variant == "I" else 1.0, variant=variant)


class GradientFactors(NamedTuple):
    """Riemannian gradient plus the factors reused by the Cayley step."""

    grad: np.ndarray   # 2n x 2p tangent vector
    p_f: np.ndarray    # H_X @ egrad, 2n x 2p
    e_rho: np.ndarray  # (rho/2) X.T @ egrad, 2p x 2p


def check_symplectic(X: np.ndarray, n: int, p: int) -> float:
    """Feasibility residual ||X.T J X - J||_F."""
    if X.shape != (2 * n, 2 * p):
        raise ValueError(f"expected shape {(2 * n, 2 * p)}, got {X.shape}")
    C = X.T @ apply_J_left(n, X)
    C[:p, p:] -= np.eye(p)
    C[p:, :p] += np.eye(p)
    return float(np.linalg.norm(C))


def tangency_residual(X: np.ndarray, Z: np.ndarray, n: int, p: int) -> float:
    """||Z.T J X + X.T J Z||_F, zero iff Z is tangent at X."""
    JX = apply_J_left(n, X)
    return float(np.linalg.norm(Z.T @ JX + X.T @ apply_J_left(n, Z)))


def _gram_solve(X: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Solve (X.T X) Y = B by Cholesky, warning when the Gram is ill-conditioned."""
    G = X.T @ X
    if np.linalg.cond(G) > GRAM_COND_WARN:
        # fixed message so repeated occurrences deduplicate
        warnings.warn(
            "Gram matrix X.T X condition exceeds 1e12: the point is far from "
            "column orthonormality (feasibility drift or an extreme start)",
            RuntimeWarning,
            stacklevel=3,
        )
    try:
        c, low = scipy.linalg.cho_factor(G)
    except scipy.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            "X.T X is not positive definite; input point is corrupted"
        ) from exc
    return scipy.linalg.cho_solve((c, low), B)


class SymplecticStiefel:
    """The manifold Sp(2p, 2n) of symplectic 2n x 2p bases."""

    def __init__(self, n: int, p: int):
        if not 1 <= p <= n:
            raise ValueError(f"require 1 <= p <= n, got p={p}, n={n}")
        self.n = n
        self.p = p

    def __repr__(self):
        return f"SymplecticStiefel(n={self.n}, p={self.p})"

    def dimension(self) -> int:
        n, p = self.n, self.p
        return 4 * n * p - p * (2 * p - 1)

    def ambient_shape(self) -> tuple[int, int]:
        return (2 * self.n, 2 * self.p)

    def _check_ambient(self, Y: np.ndarray, name: str = "argument") -> None:
        if Y.shape != self.ambient_shape():
            raise ValueError(
                f"{name} must have shape {self.ambient_shape()}, got {Y.shape}"
            )

    def check_symplectic(self, X: np.ndarray) -> float:
        return check_symplectic(X, self.n, self.p)

    def tangency_residual(self, X: np.ndarray, Z: np.ndarray) -> float:
        return tangency_residual(X, Z, self.n, self.p)

    def is_feasible(self, X: np.ndarray, tol: float = FEASIBILITY_TOL) -> bool:
        return self.check_symplectic(X) <= tol

    # -- projections ---------------------------------------------------

    def project_tangent(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Orthogonal (w.r.t. g_rho, any rho) projection of Y onto the tangent space.

        P(Y) = XJ sym(X.T J.T Y) + (I - XJ X.T J.T) Y; independent of rho and
        of the complement orthonormalization.
        """
        self._check_ambient(Y)
        XJ = apply_J_right(X, self.p)
        A = X.T @ apply_Jt_left(self.n, Y)
        return XJ @ (0.5 * (A + A.T)) + Y - XJ @ A

    def project_normal(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Complementary projection XJ skew(X.T J.T Y) onto the normal space."""
        self._check_ambient(Y)
        XJ = apply_J_right(X, self.p)
        A = X.T @ apply_Jt_left(self.n, Y)
        return XJ @ (0.5 * (A - A.T))

    def tangent_to_factors(
        self, X: np.ndarray, Z: np.ndarray, tol: float = 1e-6
    ) -> tuple[np.ndarray, np.ndarray]:
        """Factors (L, R) with Z = S J X for the symmetric S = L R.T + R L.T.

        L = (I - XJ X.T J.T / 2) Z and R = XJ; S has rank at most 4p and is
        only densified by tests and the dense Cayley oracle.
        """
        self._check_ambient(Z, "tangent vector")
        res = self.tangency_residual(X, Z)
        if res > tol * (1.0 + float(np.linalg.norm(Z))):
            raise ValueError(
                f"input is not tangent at X: residual {res:.3e} exceeds tolerance"
            )
        XJ = apply_J_right(X, self.p)
        L = Z - 0.5 * (XJ @ (X.T @ apply_Jt_left(self.n, Z)))
        return L, XJ

    # -- metric ---------------------------------------------------------

    def metric_apply(self, X: np.ndarray, spec: MetricSpec, Y: np.ndarray) -> np.ndarray:
        """Apply the metric operator B_X to Y without forming the complement basis.

        Variant I:  B_X = (1/rho) J X X.T J.T - (J X J X.T J.T - J)^2.
        Variant II: B_X = (1/rho) J X X.T J.T + I - X (X.T X)^{-1} X.T.
        """
        self._check_ambient(Y)
        n, p = self.n, self.p
        lead = apply_J_left(n, X @ (X.T @ apply_Jt_left(n, Y))) / spec.rho
        if p == n:
            # the complement basis is empty: its term is structurally zero
            # and both variants coincide
            return lead
        if spec.variant == "I":

            def a_op(V):
                # (J X J X.T J.T - J) V
                XJ_w = apply_J_right(X, p) @ (X.T @ apply_Jt_left(n, V))
                return apply_J_left(n, XJ_w - V)

            return lead - a_op(a_op(Y))
        return lead + Y - X @ _gram_solve(X, X.T @ Y)

    def inner(
        self, X: np.ndarray, spec: MetricSpec, Z1: np.ndarray, Z2: np.ndarray
    ) -> float:
        """g_rho(Z1, Z2) = tr(Z1.T B_X Z2) for tangent vectors at X."""
        return float(np.sum(Z1 * self.metric_apply(X, spec, Z2)))

    def norm(self, X: np.ndarray, spec: MetricSpec, Z: np.ndarray) -> float:
        return float(np.sqrt(max(self.inner(X, spec, Z, Z), 0.0)))

    # -- gradient ---------------------------------------------------------

    def riemannian_gradient(
        self, X: np.ndarray, egrad: np.ndarray, spec: MetricSpec
    ) -> GradientFactors:
        """Riemannian gradient of f at X from the Euclidean gradient egrad.

        Assembled as P_f @ ((XJ).T J X) + XJ @ (P_f.T J X) with P_f = H_X egrad,
        where (XJ).T J X is computed explicitly rather than replaced by its
        exact value I: dropping it degrades the feasibility of quasi-geodesic
        iterates.

        H_X is (rho/2) X X.T plus the complement term of the active variant:
            I:  J (I - X (X.T X)^{-1} X.T) J.T
            II: (I - XJ X.T J.T)(I - XJ X.T J.T).T
        """
        self._check_ambient(egrad, "Euclidean gradient")
        n, p = self.n, self.p
        XJ = apply_J_right(X, p)
        w = X.T @ egrad
        e_rho = (0.5 * spec.rho) * w

        if p == n:
            # empty complement basis: H_X = (rho/2) X X.T for both variants
            comp = 0.0
        elif spec.variant == "I":
            u = apply_Jt_left(n, egrad)
            comp = apply_J_left(n, u - X @ _gram_solve(X, X.T @ u))
        else:
            # (I - XJ X.T J.T).T egrad = egrad - J X J.T X.T egrad
            t = egrad - apply_J_left(n, X @ apply_Jt_left(p, w))
            comp = t - XJ @ (X.T @ apply_Jt_left(n, t))
        p_f = X @ ((0.5 * spec.rho) * w) + comp

        JX = apply_J_left(n, X)
        grad = p_f @ (XJ.T @ JX) + XJ @ (p_f.T @ JX)
        return GradientFactors(grad=grad, p_f=p_f, e_rho=e_rho)

    # -- sampling ---------------------------------------------------------

    def random_point(self, strategy: int = 2, seed=0) -> np.ndarray:
        return rand_symplectic(self.n, self.p, strategy, seed)

    def random_tangent(self, X: np.ndarray, seed=0, scale: float = 1.0) -> np.ndarray:
        """Tangent vector obtained by projecting a Gaussian ambient matrix."""
        rng = as_rng(seed)
        Y = scale * rand_gaussian(2 * self.n, 2 * self.p, rng)
        return self.project_tangent(X, Y)
