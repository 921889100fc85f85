"""Dense matrix kernels and seeded random generators.

All structured products with the skew-symmetric matrix

    J_{2m} = [[0, I_m], [-I_m, 0]]

are computed by row/column permutation and sign flips; J is never stored
densely outside of tests.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

__all__ = [
    "MatrixOverflowError",
    "SingularMatrixError",
    "apply_J_left",
    "apply_Jt_left",
    "apply_J_right",
    "J_dense",
    "sym_part",
    "skew_part",
    "expm",
    "solve_dense",
    "as_rng",
    "rand_gaussian",
    "rand_orthogonal",
    "rand_symplectic",
    "canonical_basis_point",
]

# LU pivots below this fraction of max|A| are treated as a rank deficiency.
PIVOT_RTOL = 1e-14


class MatrixOverflowError(ArithmeticError):
    """Matrix function left the representable floating-point range."""


class SingularMatrixError(np.linalg.LinAlgError):
    """Linear system is numerically singular (pivot below threshold)."""


def _check_even_rows(m: int, A: np.ndarray) -> None:
    if A.ndim != 2 or A.shape[0] != 2 * m:
        raise ValueError(f"expected a matrix with {2 * m} rows, got shape {A.shape}")


def apply_J_left(m: int, A: np.ndarray) -> np.ndarray:
    """Return J_{2m} @ A using a row swap and sign flip."""
    _check_even_rows(m, A)
    out = np.empty_like(A)
    out[:m] = A[m:]
    out[m:] = -A[:m]
    return out


def apply_Jt_left(m: int, A: np.ndarray) -> np.ndarray:
    """Return J_{2m}.T @ A, i.e. -J_{2m} @ A."""
    _check_even_rows(m, A)
    out = np.empty_like(A)
    out[:m] = -A[m:]
    out[m:] = A[:m]
    return out


def apply_J_right(A: np.ndarray, m: int) -> np.ndarray:
    """Return A @ J_{2m} using a column swap and sign flip."""
    if A.ndim != 2 or A.shape[1] != 2 * m:
        raise ValueError(f"expected a matrix with {2 * m} columns, got shape {A.shape}")
    out = np.empty_like(A)
    out[:, :m] = -A[:, m:]
    out[:, m:] = A[:, :m]
    return out


def J_dense(m: int) -> np.ndarray:
    """Materialize J_{2m}. Intended for tests and tiny (2p) blocks only."""
    J = np.zeros((2 * m, 2 * m))
    J[:m, m:] = np.eye(m)
    J[m:, :m] = -np.eye(m)
    return J


def sym_part(A: np.ndarray) -> np.ndarray:
    """Symmetric part (A + A.T) / 2 of a square matrix."""
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return 0.5 * (A + A.T)


def skew_part(A: np.ndarray) -> np.ndarray:
    """Skew-symmetric part (A - A.T) / 2 of a square matrix."""
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return 0.5 * (A - A.T)


def expm(A: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring with Pade approximants.

    Delegates to scipy's implementation of that algorithm. Raises
    MatrixOverflowError when the input is non-finite or the result leaves
    the double-precision range.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise MatrixOverflowError("matrix exponential of non-finite input")
    with np.errstate(over="ignore", invalid="ignore"):
        E = scipy.linalg.expm(A)
    if not np.all(np.isfinite(E)):
        raise MatrixOverflowError("matrix exponential overflowed the double range")
    return E


def solve_dense(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Solve A X = B by pivoted LU.

    Raises SingularMatrixError when any pivot magnitude falls below
    PIVOT_RTOL * max|A|, so callers can treat near-rank-deficient systems
    explicitly instead of consuming garbage.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square system matrix, got shape {A.shape}")
    with warnings.catch_warnings():
        # exact singularity is reported via SingularMatrixError below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    pivots = np.abs(np.diag(lu))
    threshold = PIVOT_RTOL * max(np.max(np.abs(A)), np.finfo(float).tiny)
    if np.min(pivots) < threshold:
        raise SingularMatrixError(
            f"matrix not invertible: pivot {np.min(pivots):.3e} below {threshold:.3e}"
        )
    return scipy.linalg.lu_solve((lu, piv), B)


def as_rng(seed) -> np.random.Generator:
    """Coerce an int seed (or pass through a Generator) to a PCG64 generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def rand_gaussian(rows: int, cols: int, seed) -> np.ndarray:
    """I.i.d. standard normal matrix from a seeded deterministic generator."""
    if rows <= 0 or cols <= 0:
        raise ValueError("dimensions must be positive")
    return as_rng(seed).standard_normal((rows, cols))


def rand_orthogonal(m: int, seed) -> np.ndarray:
    """Q factor of a Gaussian matrix, sign-fixed so that R_ii >= 0."""
    G = rand_gaussian(m, m, seed)
    Q, R = np.linalg.qr(G)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def canonical_basis_point(n: int, p: int) -> np.ndarray:
    """Columns {1..p, n+1..n+p} of I_{2n}: the 'identity' symplectic basis."""
    if not 1 <= p <= n:
        raise ValueError(f"require 1 <= p <= n, got p={p}, n={n}")
    E = np.zeros((2 * n, 2 * p))
    for j in range(p):
        E[j, j] = 1.0
        E[n + j, p + j] = 1.0
    return E


def rand_symplectic(n: int, p: int, strategy: int, seed) -> np.ndarray:
    """Random feasible 2n x 2p point with X.T J X = J.

    strategy 1: the canonical basis point.
    strategy 2: canonical point times exp(J (W + W.T)) with W a 2p x 2p Gaussian.
    strategy 3: columns {1..p, n+1..n+p} of exp(J (W + W.T)), W a 2n x 2n Gaussian.
    """
    if not 1 <= p <= n:
        raise ValueError(f"require 1 <= p <= n, got p={p}, n={n}")
    E = canonical_basis_point(n, p)
    if strategy == 1:
        return E
    rng = as_rng(seed)
    if strategy == 2:
        W = rand_gaussian(2 * p, 2 * p, rng)
        return E @ expm(apply_J_left(p, W + W.T))
    if strategy == 3:
        W = rand_gaussian(2 * n, 2 * n, rng)
        U = expm(apply_J_left(n, W + W.T))
        return np.concatenate([U[:, :p], U[:, n : n + p]], axis=1)
    raise ValueError(f"unknown initialization strategy {strategy!r}, expected 1, 2 or 3")
