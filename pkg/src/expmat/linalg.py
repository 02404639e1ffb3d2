"""Dense linear algebra over F_p on numpy int64 arrays.

Everything is exact: entries are kept reduced mod p and p is small, so
products of two entries never overflow int64.
"""
from __future__ import annotations

import numpy as np

from .errors import DivisionByZero, ShapeError


def as_mat(a, p: int) -> np.ndarray:
    m = np.array(a, dtype=np.int64)
    if m.ndim == 1:
        m = m.reshape(1, -1) if m.size else m.reshape(0, 0)
    return m % p


def rref(a, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns."""
    m = as_mat(a, p).copy()
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            m[[r, k]] = m[[k, r]]
        m[r] = m[r] * pow(int(m[r, c]), -1, p) % p
        col = m[:, c].copy()
        col[r] = 0
        nzr = np.nonzero(col)[0]
        if nzr.size:
            m[nzr] = (m[nzr] - np.outer(col[nzr], m[r])) % p
        pivots.append(c)
        r += 1
    return m, pivots


def rank(a, p: int) -> int:
    m = as_mat(a, p)
    if m.size == 0:
        return 0
    return len(rref(m, p)[1])


def nullspace(a, p: int) -> np.ndarray:
    """Basis of {x : a x = 0}, returned as columns of an (ncols, k) array."""
    m = as_mat(a, p)
    cols = m.shape[1]
    if m.shape[0] == 0:
        return np.eye(cols, dtype=np.int64)
    r, piv = rref(m, p)
    free = [c for c in range(cols) if c not in piv]
    basis = np.zeros((cols, len(free)), dtype=np.int64)
    for k, f in enumerate(free):
        basis[f, k] = 1
        for i, pc in enumerate(piv):
            basis[pc, k] = (-r[i, f]) % p
    return basis


def solve(a, b, p: int) -> np.ndarray | None:
    """One solution x of a x = b (free variables set to 0), or None.

    b may be a vector or a matrix of right-hand sides.
    """
    m = as_mat(a, p)
    bb = np.array(b, dtype=np.int64) % p
    vec = bb.ndim == 1
    if vec:
        bb = bb.reshape(-1, 1)
    rows, cols = m.shape
    if bb.shape[0] != rows:
        raise ShapeError("right-hand side has wrong length")
    aug = np.concatenate([m, bb], axis=1)
    r, piv = rref(aug, p)
    if any(c >= cols for c in piv):
        return None
    x = np.zeros((cols, bb.shape[1]), dtype=np.int64)
    for i, c in enumerate(piv):
        x[c] = r[i, cols:]
    return x[:, 0] if vec else x


def inv(a, p: int) -> np.ndarray:
    m = as_mat(a, p)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ShapeError("inverse of non-square matrix")
    r, piv = rref(np.concatenate([m, np.eye(n, dtype=np.int64)], axis=1), p)
    if len(piv) < n or piv[n - 1] != n - 1:
        raise DivisionByZero("singular matrix")
    return r[:, n:].copy()


def det(a, p: int) -> int:
    m = as_mat(a, p).copy()
    n = m.shape[0]
    d = 1
    for c in range(n):
        nz = np.nonzero(m[c:, c])[0]
        if nz.size == 0:
            return 0
        k = c + int(nz[0])
        if k != c:
            m[[c, k]] = m[[k, c]]
            d = -d
        d = d * int(m[c, c]) % p
        iv = pow(int(m[c, c]), -1, p)
        for i in range(c + 1, n):
            if m[i, c]:
                m[i] = (m[i] - m[i, c] * iv % p * m[c]) % p
    return d % p


def is_invertible(a, p: int) -> bool:
    m = as_mat(a, p)
    return m.shape[0] == m.shape[1] and rank(m, p) == m.shape[0]


def row_basis(a, p: int) -> np.ndarray:
    """Nonzero rows of the RREF: a canonical basis of the row space."""
    m = as_mat(a, p)
    if m.size == 0:
        return m.reshape(0, m.shape[1] if m.ndim == 2 else 0)
    r, piv = rref(m, p)
    return r[: len(piv)]


def in_span(rows, v, p: int) -> bool:
    rows = as_mat(rows, p)
    if rows.size == 0:
        return not np.any(np.asarray(v) % p)
    return rank(np.vstack([rows, np.asarray(v).reshape(1, -1)]), p) == rank(rows, p)


def extend_basis(cols, n: int, p: int) -> np.ndarray:
    """Extend independent columns to a basis of F_p^n using standard vectors."""
    cur = [np.asarray(c, dtype=np.int64) % p for c in np.asarray(cols).T] if np.size(cols) else []
    r = rank(np.array(cur).reshape(len(cur), n), p) if cur else 0
    for i in range(n):
        if r == n:
            break
        e = np.zeros(n, dtype=np.int64)
        e[i] = 1
        trial = cur + [e]
        if rank(np.array(trial), p) > r:
            cur = trial
            r += 1
    return np.array(cur, dtype=np.int64).T.reshape(n, len(cur))


def matmul(a, b, p: int) -> np.ndarray:
    return (np.asarray(a, dtype=np.int64) @ np.asarray(b, dtype=np.int64)) % p
