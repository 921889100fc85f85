"""MatrixMarket (.mtx) reading and writing for dense real matrices.

Supports the coordinate and array formats with real or integer fields and
general, symmetric or skew-symmetric storage. Complex and pattern fields
are rejected explicitly. Writing uses 17 significant digits so that a
written matrix re-parses to identical floats.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "MatrixMarketError",
    "UnsupportedFormatError",
    "parse_matrix_market",
    "read_matrix_market",
    "write_matrix_market",
]


class MatrixMarketError(ValueError):
    """Malformed MatrixMarket content."""


class UnsupportedFormatError(MatrixMarketError):
    """Well-formed but unsupported MatrixMarket variant (complex, pattern, ...)."""


def parse_matrix_market(data: bytes | str) -> np.ndarray:
    """Parse MatrixMarket text into a dense float matrix.

    Symmetric and skew-symmetric storage is expanded; 1-based coordinate
    indices are converted; comment lines are skipped. Raises
    MatrixMarketError for malformed input and UnsupportedFormatError for
    complex/pattern fields.
    """
    if isinstance(data, bytes):
        data = data.decode("ascii", errors="replace")
    lines = data.splitlines()
    if not lines or not lines[0].startswith("%%MatrixMarket"):
        raise MatrixMarketError("missing '%%MatrixMarket' banner")
    banner = lines[0].split()
    if len(banner) != 5 or banner[1].lower() != "matrix":
        raise MatrixMarketError(f"malformed banner: {lines[0]!r}")
    fmt, fieldname, symmetry = (w.lower() for w in banner[2:5])
    if fmt not in ("coordinate", "array"):
        raise MatrixMarketError(f"unknown format {fmt!r}")
    if fieldname in ("complex", "pattern"):
        raise UnsupportedFormatError(f"unsupported field {fieldname!r}")
    if fieldname not in ("real", "integer"):
        raise MatrixMarketError(f"unknown field {fieldname!r}")
    if symmetry == "hermitian":
        raise UnsupportedFormatError("unsupported symmetry 'hermitian'")
    if symmetry not in ("general", "symmetric", "skew-symmetric"):
        raise MatrixMarketError(f"unknown symmetry {symmetry!r}")

    body = [ln for ln in lines[1:] if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise MatrixMarketError("missing size line")
    size_tokens = body[0].split()
    entries = body[1:]

    if fmt == "coordinate":
        if len(size_tokens) != 3:
            raise MatrixMarketError(f"coordinate size line needs 3 values: {body[0]!r}")
        rows, cols, nnz = (int(tok) for tok in size_tokens)
        if len(entries) != nnz:
            raise MatrixMarketError(f"expected {nnz} entries, found {len(entries)}")
        A = np.zeros((rows, cols))
        for ln in entries:
            tok = ln.split()
            if len(tok) != 3:
                raise MatrixMarketError(f"bad coordinate entry: {ln!r}")
            i, j, v = int(tok[0]), int(tok[1]), float(tok[2])
            if not (1 <= i <= rows and 1 <= j <= cols):
                raise MatrixMarketError(f"index ({i}, {j}) outside {rows} x {cols}")
            if symmetry == "symmetric" and i < j:
                raise MatrixMarketError(
                    f"symmetric storage holds only the lower triangle, got ({i}, {j})"
                )
            if symmetry == "skew-symmetric" and i <= j:
                raise MatrixMarketError(
                    f"skew-symmetric storage is strictly lower triangular, got ({i}, {j})"
                )
            A[i - 1, j - 1] += v
            if symmetry == "symmetric" and i != j:
                A[j - 1, i - 1] += v
            elif symmetry == "skew-symmetric":
                A[j - 1, i - 1] -= v
        return A

    if len(size_tokens) != 2:
        raise MatrixMarketError(f"array size line needs 2 values: {body[0]!r}")
    rows, cols = (int(tok) for tok in size_tokens)
    values = [float(tok) for ln in entries for tok in ln.split()]
    A = np.zeros((rows, cols))
    pos = 0
    for j in range(cols):
        if symmetry == "general":
            col_rows = range(rows)
        elif symmetry == "symmetric":
            col_rows = range(j, rows)
        else:
            col_rows = range(j + 1, rows)
        for i in col_rows:
            if pos >= len(values):
                raise MatrixMarketError("array data ended early")
            A[i, j] = values[pos]
            if symmetry == "symmetric":
                A[j, i] = values[pos]
            elif symmetry == "skew-symmetric":
                A[j, i] = -values[pos]
            pos += 1
    if pos != len(values):
        raise MatrixMarketError(f"{len(values) - pos} extra array values")
    return A


def read_matrix_market(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return parse_matrix_market(fh.read())


def write_matrix_market(path, A: np.ndarray, comment: str | None = None) -> None:
    """Write a dense matrix in array/real/general format with 17 significant digits."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError("can only write 2-d matrices")
    with open(path, "w") as fh:
        fh.write("%%MatrixMarket matrix array real general\n")
        if comment:
            for ln in comment.splitlines():
                fh.write(f"% {ln}\n")
        fh.write(f"{A.shape[0]} {A.shape[1]}\n")
        for j in range(A.shape[1]):
            for i in range(A.shape[0]):
                fh.write(f"{A[i, j]:.17g}\n")
