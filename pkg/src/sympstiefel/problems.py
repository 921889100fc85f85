"""Benchmark objective families on Sp(2p, 2n), generators and oracles.

Three families: nearest symplectic matrix, extrinsic mean of a symplectic
sample cloud (reduces to the first), and trace minimization tr(X.T A X),
whose minimum over Sp(2p, 2n) for SPD A equals twice the sum of the p
smallest symplectic eigenvalues of A.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .matkit import (
    apply_J_left,
    apply_Jt_left,
    as_rng,
    expm,
    rand_gaussian,
    rand_orthogonal,
    sym_part,
)

__all__ = [
    "ProblemDef",
    "nearest_symplectic",
    "extrinsic_mean",
    "brockett_trace",
    "symplectic_eig_smallest",
    "symplectic_eig_oracle",
    "extract_eigenvalues",
    "spd_with_decay",
    "gallery",
    "sample_cloud",
    "scale_target",
    "fd_gradient_check",
]


@dataclass(frozen=True)
class ProblemDef:
    """Objective-value and Euclidean-gradient contract with dimensions.

    matrix holds the symmetric matrix of trace problems (None otherwise),
    so post-processing such as eigenvalue extraction can reach it.
    """

    n: int
    p: int
    f: Callable[[np.ndarray], float]
    egrad: Callable[[np.ndarray], np.ndarray]
    descriptor: dict = field(default_factory=dict)
    matrix: np.ndarray | None = None


def _dims_from_target(A: np.ndarray) -> tuple[int, int]:
    if A.ndim != 2 or A.shape[0] % 2 or A.shape[1] % 2:
        raise ValueError(f"target must be 2n x 2p with even sides, got {A.shape}")
    return A.shape[0] // 2, A.shape[1] // 2


def nearest_symplectic(A: np.ndarray, descriptor: dict | None = None) -> ProblemDef:
    """min ||X - A||_F^2 over Sp(2p, 2n) for a 2n x 2p target A."""
    A = np.asarray(A, dtype=float)
    n, p = _dims_from_target(A)

    def f(X):
        return float(np.sum((X - A) ** 2))

    def egrad(X):
        return 2.0 * (X - A)

    desc = {"kind": "nearest", **(descriptor or {})}
    return ProblemDef(n=n, p=p, f=f, egrad=egrad, descriptor=desc)


def extrinsic_mean(
    samples: Sequence[np.ndarray], descriptor: dict | None = None
) -> ProblemDef:
    """min (1/N) sum_i ||X - X_i||_F^2; same minimizers as nearest with the mean target.

    The reported objective is the mean of squared distances, which exceeds
    ||X - mean||_F^2 by the constant sample scatter.
    """
    if len(samples) == 0:
        raise ValueError("need at least one sample")
    shape = samples[0].shape
    if any(S.shape != shape for S in samples):
        raise ValueError("samples must share a common shape")
    A = np.mean(samples, axis=0)
    n, p = _dims_from_target(A)
    scatter = float(np.mean([np.sum((S - A) ** 2) for S in samples]))

    def f(X):
        return float(np.sum((X - A) ** 2)) + scatter

    def egrad(X):
        return 2.0 * (X - A)

    desc = {"kind": "extrinsic-mean", "num_samples": len(samples), **(descriptor or {})}
    return ProblemDef(n=n, p=p, f=f, egrad=egrad, descriptor=desc)


def brockett_trace(A: np.ndarray, p: int, descriptor: dict | None = None) -> ProblemDef:
    """min tr(X.T A X) over Sp(2p, 2n) for a symmetric 2n x 2n matrix A."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] % 2:
        raise ValueError(f"A must be square 2n x 2n, got {A.shape}")
    n = A.shape[0] // 2
    if not 1 <= p <= n:
        raise ValueError(f"require 1 <= p <= n, got p={p}, n={n}")
    skew_norm = float(np.linalg.norm(A - A.T))
    if skew_norm > 1e-12 * max(float(np.linalg.norm(A)), 1.0):
        warnings.warn(
            f"matrix is not symmetric (skew part {skew_norm:.2e}); symmetrizing",
            RuntimeWarning,
            stacklevel=2,
        )
    A = sym_part(A)

    def f(X):
        return float(np.sum(X * (A @ X)))

    def egrad(X):
        return 2.0 * (A @ X)

    desc = {"kind": "brockett", **(descriptor or {})}
    return ProblemDef(n=n, p=p, f=f, egrad=egrad, descriptor=desc, matrix=A)


def _assert_spd(M: np.ndarray) -> None:
    try:
        scipy.linalg.cho_factor(M)
    except scipy.linalg.LinAlgError as exc:
        raise ValueError("matrix must be symmetric positive definite") from exc


def symplectic_eig_smallest(
    M: np.ndarray, p: int, descriptor: dict | None = None
) -> ProblemDef:
    """Trace-minimization problem whose optimum is twice the sum of the p
    smallest symplectic eigenvalues of the SPD matrix M."""
    M = np.asarray(M, dtype=float)
    _assert_spd(sym_part(M))
    desc = {"kind": "sympeig", **(descriptor or {})}
    return brockett_trace(M, p, descriptor=desc)


def extract_eigenvalues(X: np.ndarray, M: np.ndarray) -> tuple[np.ndarray, float]:
    """Read the p symplectic eigenvalues off a solution X of the trace problem.

    Returns (d, pairing_residual): d_j is the mean of the paired diagonal
    entries (j, j) and (p+j, p+j) of T = X.T M X, and the residual is the
    off-diagonal Frobenius mass of T, a quality metric for how close the
    solver got to a diagonalizing configuration.
    """
    T = X.T @ (M @ X)
    p = T.shape[0] // 2
    diag = np.diag(T)
    d = 0.5 * (diag[:p] + diag[p:])
    residual = float(np.linalg.norm(T - np.diag(diag)))
    return d, residual


def symplectic_eig_oracle(M: np.ndarray) -> np.ndarray:
    """All n symplectic eigenvalues of an SPD 2n x 2n matrix, ascending.

    They coincide with the positive imaginary parts of the eigenvalues of
    the real matrix J.T M, which are purely imaginary for SPD M. Dense
    eigensolve: validation use, 2n <= 1000 scale.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
        raise ValueError(f"M must be square 2n x 2n, got {M.shape}")
    n = M.shape[0] // 2
    ev = scipy.linalg.eigvals(apply_Jt_left(n, M))
    off_axis = float(np.max(np.abs(ev.real)))
    if off_axis > 1e-8 * max(1.0, float(np.max(np.abs(ev)))):
        raise ValueError(
            f"eigenvalues stray {off_axis:.2e} off the imaginary axis; M is not SPD"
        )
    d = np.sort(ev.imag[ev.imag > 0])
    if d.size != n:
        raise ValueError("expected n positive imaginary eigenvalue pairs; M is not SPD")
    return d


# -- instance generators -------------------------------------------------


def spd_with_decay(n: int, lam: float, seed) -> np.ndarray:
    """Q diag(lam^(1-i)) Q.T with random orthogonal Q, i = 1..2n, lam >= 1."""
    if lam < 1:
        raise ValueError(f"decay parameter must satisfy lam >= 1, got {lam}")
    Q = rand_orthogonal(2 * n, seed)
    diag = lam ** (1.0 - np.arange(1, 2 * n + 1, dtype=float))
    return sym_part((Q * diag) @ Q.T)


def gallery(name: str, size: int) -> np.ndarray:
    """Named SPD test matrices of a given side length.

    lehmer:        L_ij = min(i, j) / max(i, j).
    wilkinson_sq:  W.T W for the symmetric tridiagonal Wilkinson matrix
                   (diagonal |i - (size-1)/2|, unit off-diagonals).
    companion_sq:  C.T C for the companion matrix of the polynomial with
                   coefficients 1..size+1.
    central_diff:  tridiagonal (-1, 2, -1) second-difference matrix.

    The Wilkinson and companion matrices are indefinite, hence squared.
    """
    if size <= 0:
        raise ValueError("size must be positive")
    if name == "lehmer":
        i = np.arange(1, size + 1, dtype=float)
        return np.minimum.outer(i, i) / np.maximum.outer(i, i)
    if name == "wilkinson_sq":
        d = np.abs(np.arange(size, dtype=float) - (size - 1) / 2.0)
        W = np.diag(d) + np.eye(size, k=1) + np.eye(size, k=-1)
        return W.T @ W
    if name == "companion_sq":
        coeffs = np.arange(1, size + 2, dtype=float)
        C = np.zeros((size, size))
        C[0, :] = -coeffs[1:] / coeffs[0]
        C[1:, :-1] += np.eye(size - 1)
        return C.T @ C
    if name == "central_diff":
        return 2.0 * np.eye(size) - np.eye(size, k=1) - np.eye(size, k=-1)
    raise ValueError(f"unknown gallery matrix {name!r}")


def sample_cloud(center: np.ndarray, N: int, spread: float, seed) -> list[np.ndarray]:
    """N symplectic samples center @ exp(J (W_i + W_i.T)), W_i = spread * Gaussian."""
    if N <= 0:
        raise ValueError("need a positive number of samples")
    p = center.shape[1] // 2
    rng = as_rng(seed)
    out = []
    for _ in range(N):
        W = spread * rand_gaussian(2 * p, 2 * p, rng)
        out.append(center @ expm(apply_J_left(p, W + W.T)))
    return out


def scale_target(A: np.ndarray, mode: str) -> np.ndarray:
    """Scale a target matrix: 'spectral' A/||A||_2, 'spectral2x' 2A/||A||_2,
    'maxabs' A/max|A_ij|, or 'none'."""
    if mode == "none":
        return A
    if mode == "spectral":
        return A / np.linalg.norm(A, 2)
    if mode == "spectral2x":
        return 2.0 * A / np.linalg.norm(A, 2)
    if mode == "maxabs":
        return A / np.max(np.abs(A))
    raise ValueError(f"unknown scaling mode {mode!r}")


def fd_gradient_check(
    problem: ProblemDef, X: np.ndarray, seed=0, num_dirs: int = 5
) -> float:
    """Max relative error of egrad against central differences at X.

    Probes random ambient directions with step h = 1e-6 (1 + ||X||_F).
    """
    rng = as_rng(seed)
    g = problem.egrad(X)
    h = 1e-6 * (1.0 + float(np.linalg.norm(X)))
    worst = 0.0
    for _ in range(num_dirs):
        E = rng.standard_normal(X.shape)
        E /= np.linalg.norm(E)
        fd = (problem.f(X + h * E) - problem.f(X - h * E)) / (2.0 * h)
        exact = float(np.sum(g * E))
        worst = max(worst, abs(fd - exact) / (1.0 + abs(exact)))
    return worst
