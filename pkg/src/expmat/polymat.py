"""Matrices over F_p[T], stored as a stack of constant coefficient matrices.

``coeffs[d]`` is the matrix of T^d coefficients. The stack always has at
least one layer and no trailing zero layers.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from . import linalg
from .errors import NotUnipotentError, ShapeError
from .field import lucas
from .poly import MAX_DEGREE, Poly, _lucas_submultiples


class PolyMatrix:
    __slots__ = ("p", "coeffs")

    def __init__(self, p: int, coeffs):
        c = np.array(coeffs, dtype=np.int64) % p
        if c.ndim == 2:
            c = c[None]
        if c.ndim != 3:
            raise ShapeError("coefficient stack must be 3-dimensional")
        nz = np.nonzero(c.reshape(c.shape[0], -1).any(axis=1))[0]
        top = int(nz[-1]) + 1 if nz.size else 1
        if top - 1 > MAX_DEGREE:
            raise ShapeError("degree too large")
        c = c[:top].copy()
        c.setflags(write=False)
        self.p = int(p)
        self.coeffs = c

    # construction
    @classmethod
    def const(cls, p: int, m) -> "PolyMatrix":
        return cls(p, np.array(m, dtype=np.int64)[None])

    @classmethod
    def identity(cls, p: int, n: int) -> "PolyMatrix":
        return cls(p, np.eye(n, dtype=np.int64)[None])

    @classmethod
    def zero(cls, p: int, rows: int, cols: int | None = None) -> "PolyMatrix":
        return cls(p, np.zeros((1, rows, rows if cols is None else cols), dtype=np.int64))

    @classmethod
    def from_entries(cls, p: int, grid: Sequence[Sequence]) -> "PolyMatrix":
        rows = len(grid)
        cols = len(grid[0]) if rows else 0
        polys = []
        for row in grid:
            if len(row) != cols:
                raise ShapeError("ragged matrix")
            polys.append([_to_poly(p, e) for e in row])
        D = max([f.deg + 1 for row in polys for f in row] + [1])
        c = np.zeros((D, rows, cols), dtype=np.int64)
        for i, row in enumerate(polys):
            for j, f in enumerate(row):
                c[: f.deg + 1, i, j] = f.coeffs
        return cls(p, c)

    @classmethod
    def from_terms(cls, p: int, terms: dict) -> "PolyMatrix":
        """Build sum_d T^d M_d from {d: M_d}."""
        first = next(iter(terms.values()))
        shape = np.asarray(first).shape
        D = max(terms) + 1
        c = np.zeros((D,) + shape, dtype=np.int64)
        for d, m in terms.items():
            c[d] = (c[d] + np.asarray(m)) % p
        return cls(p, c)

    # shape and access
    @property
    def shape(self) -> tuple[int, int]:
        return self.coeffs.shape[1], self.coeffs.shape[2]

    @property
    def n(self) -> int:
        r, c = self.shape
        if r != c:
            raise ShapeError("matrix is not square")
        return r

    @property
    def deg(self) -> int:
        if not self.coeffs.any():
            return -1
        return self.coeffs.shape[0] - 1

    def is_square(self) -> bool:
        return self.shape[0] == self.shape[1]

    def entry(self, i: int, j: int) -> Poly:
        return Poly(self.p, tuple(int(x) for x in self.coeffs[:, i, j]))

    def entries(self) -> list[list[Poly]]:
        r, c = self.shape
        return [[self.entry(i, j) for j in range(c)] for i in range(r)]

    def layer(self, d: int) -> np.ndarray:
        if 0 <= d < self.coeffs.shape[0]:
            return self.coeffs[d]
        return np.zeros(self.shape, dtype=np.int64)

    def nonzero_degrees(self) -> list[int]:
        return [int(d) for d in np.nonzero(self.coeffs.reshape(self.coeffs.shape[0], -1).any(axis=1))[0]]

    def is_constant(self) -> bool:
        return self.coeffs.shape[0] == 1

    def const_part(self) -> np.ndarray:
        return self.coeffs[0].copy()

    def submatrix(self, rows, cols) -> "PolyMatrix":
        return PolyMatrix(self.p, self.coeffs[:, rows][:, :, cols])

    # arithmetic
    def _same(self, other: "PolyMatrix"):
        if not isinstance(other, PolyMatrix):
            raise TypeError("expected PolyMatrix")
        if other.p != self.p:
            raise ShapeError("mixed characteristics")

    def _padded(self, D: int) -> np.ndarray:
        c = np.zeros((D,) + self.shape, dtype=np.int64)
        c[: self.coeffs.shape[0]] = self.coeffs
        return c

    def __add__(self, other: "PolyMatrix") -> "PolyMatrix":
        self._same(other)
        if self.shape != other.shape:
            raise ShapeError("dimension mismatch in add")
        D = max(self.coeffs.shape[0], other.coeffs.shape[0])
        return PolyMatrix(self.p, self._padded(D) + other._padded(D))

    def __neg__(self) -> "PolyMatrix":
        return PolyMatrix(self.p, -self.coeffs)

    def __sub__(self, other: "PolyMatrix") -> "PolyMatrix":
        return self + (-other)

    def scalar(self, c) -> "PolyMatrix":
        if isinstance(c, Poly):
            return PolyMatrix.const(self.p, np.eye(self.shape[0], dtype=np.int64)).scale_poly(c) * self
        return PolyMatrix(self.p, self.coeffs * (int(c) % self.p))

    def scale_poly(self, f: Poly) -> "PolyMatrix":
        terms: dict = {}
        for d, c in f.terms().items():
            for e in self.nonzero_degrees():
                terms[d + e] = terms.get(d + e, 0) + c * self.coeffs[e]
        if not terms:
            return PolyMatrix.zero(self.p, *self.shape)
        return PolyMatrix.from_terms(self.p, terms)

    def __mul__(self, other) -> "PolyMatrix":
        if not isinstance(other, PolyMatrix):
            return self.scalar(other)
        self._same(other)
        if self.shape[1] != other.shape[0]:
            raise ShapeError("dimension mismatch in mul")
        p = self.p
        da, db = self.nonzero_degrees(), other.nonzero_degrees()
        D = (max(da) if da else 0) + (max(db) if db else 0) + 1
        out = np.zeros((D, self.shape[0], other.shape[1]), dtype=np.int64)
        for i in da:
            for j in db:
                out[i + j] = (out[i + j] + self.coeffs[i] @ other.coeffs[j]) % p
        return PolyMatrix(p, out)

    def __matmul__(self, other):
        return self * other

    def __pow__(self, e: int) -> "PolyMatrix":
        out = PolyMatrix.identity(self.p, self.n)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return self.p == other.p and self.coeffs.shape == other.coeffs.shape and bool(
            np.array_equal(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash((self.p, self.coeffs.shape, self.coeffs.tobytes()))

    def is_identity(self) -> bool:
        return self.is_square() and self == PolyMatrix.identity(self.p, self.n)

    # transposes and substitutions
    def transpose(self) -> "PolyMatrix":
        return PolyMatrix(self.p, self.coeffs.transpose(0, 2, 1))

    def other_transpose(self) -> "PolyMatrix":
        """Reflect across the anti-diagonal: entry (i, j) becomes a_{n-j+1, n-i+1}."""
        n = self.n
        return PolyMatrix(self.p, self.coeffs[:, ::-1, ::-1].transpose(0, 2, 1))

    def substitute_zero(self) -> np.ndarray:
        return self.coeffs[0].copy()

    def at_neg(self) -> "PolyMatrix":
        """A(-T)."""
        sign = np.where(np.arange(self.coeffs.shape[0]) % 2 == 0, 1, -1)
        return PolyMatrix(self.p, self.coeffs * sign[:, None, None])

    def substitute(self, f: Poly) -> "PolyMatrix":
        """A(f(T)) by entrywise composition."""
        out = PolyMatrix.zero(self.p, *self.shape)
        power = Poly.const(self.p, 1)
        for d in range(self.coeffs.shape[0]):
            if self.coeffs[d].any():
                out = out + PolyMatrix.const(self.p, self.coeffs[d]).scale_poly(power)
            power = power * f
        return out

    def bivariate_product(self) -> dict:
        """A(T) A(T') as a sparse map (i, j) -> constant matrix."""
        p = self.p
        out = {}
        for i in self.nonzero_degrees():
            for j in self.nonzero_degrees():
                m = self.coeffs[i] @ self.coeffs[j] % p
                if m.any():
                    out[(i, j)] = m
        return out

    def bivariate_shift(self) -> dict:
        """A(T + T') as a sparse map (i, j) -> constant matrix, via Lucas."""
        p = self.p
        out: dict = {}
        for d in self.nonzero_degrees():
            for k in _lucas_submultiples(d, p):
                key = (k, d - k)
                m = out.get(key, 0) + lucas(d, k, p) * self.coeffs[d]
                out[key] = m % p
        return {k: v for k, v in out.items() if v.any()}

    def conj(self, P) -> "PolyMatrix":
        """P^{-1} A P for a constant invertible P."""
        P = np.asarray(P, dtype=np.int64) % self.p
        Pi = linalg.inv(P, self.p)
        return PolyMatrix(self.p, np.einsum("ab,dbc,ce->dae", Pi, self.coeffs, P) % self.p)

    # serialization
    def to_json(self) -> dict:
        r, c = self.shape
        return {"p": self.p, "rows": r, "cols": c,
                "entries": [[self.entry(i, j).to_json() for j in range(c)] for i in range(r)]}

    @classmethod
    def from_json(cls, data: dict) -> "PolyMatrix":
        for key in ("p", "rows", "cols", "entries"):
            if key not in data:
                raise ShapeError(f"matrix JSON missing {key!r}")
        p = int(data["p"])
        ents = data["entries"]
        if len(ents) != data["rows"] or any(len(r) != data["cols"] for r in ents):
            raise ShapeError("entries do not match rows/cols")
        return cls.from_entries(p, [[Poly.from_json(p, e) for e in row] for row in ents])

    def __repr__(self) -> str:
        rows = ["[" + ", ".join(repr(e) for e in row) + "]" for row in self.entries()]
        return f"PolyMatrix(p={self.p}, [" + ", ".join(rows) + "])"


def _to_poly(p: int, e) -> Poly:
    if isinstance(e, Poly):
        if e.p != p:
            raise ShapeError("mixed characteristics")
        return e
    if isinstance(e, (list, tuple)):
        return Poly(p, tuple(e))
    return Poly(p, (int(e),))


def direct_sum(*mats: PolyMatrix) -> PolyMatrix:
    p = mats[0].p
    rows = sum(m.shape[0] for m in mats)
    cols = sum(m.shape[1] for m in mats)
    D = max(m.coeffs.shape[0] for m in mats)
    c = np.zeros((D, rows, cols), dtype=np.int64)
    r0 = c0 = 0
    for m in mats:
        r, k = m.shape
        c[: m.coeffs.shape[0], r0:r0 + r, c0:c0 + k] = m.coeffs
        r0 += r
        c0 += k
    return PolyMatrix(p, c)


def block(grid: Sequence[Sequence[PolyMatrix]]) -> PolyMatrix:
    p = grid[0][0].p
    D = max(m.coeffs.shape[0] for row in grid for m in row)
    rows = [np.concatenate([m._padded(D) for m in row], axis=2) for row in grid]
    return PolyMatrix(p, np.concatenate(rows, axis=1))


def nu(p: int, n: int) -> np.ndarray:
    """The nilpotent shift with ones on the superdiagonal."""
    return np.eye(n, k=1, dtype=np.int64)


def is_upper_unipotent(A: PolyMatrix) -> bool:
    if not A.is_square():
        return False
    n = A.n
    c = A.coeffs
    if not np.array_equal(c[0].diagonal(), np.ones(n, dtype=np.int64)):
        return False
    if np.any(c[1:].diagonal(axis1=1, axis2=2)):
        return False
    return not np.any(np.tril(np.ones((n, n), dtype=bool), -1) & c.any(axis=0))


def ordered_partition(A: PolyMatrix) -> list[int]:
    if not is_upper_unipotent(A):
        raise NotUnipotentError("matrix is not unipotent upper triangular")
    n = A.n
    parts = []
    last = 0
    for i in range(1, n):
        if not A.coeffs[:, i - 1, i].any():
            parts.append(i - last)
            last = i
    parts.append(n - last)
    return parts


def fixed_space_dims(A: PolyMatrix) -> tuple[int, int]:
    """Dimensions of {v : A v = v} and {w : w A = w} over F_p."""
    p, n = A.p, A.n
    dev = A - PolyMatrix.identity(p, n)
    stack = dev.coeffs.reshape(-1, n)
    right = n - linalg.rank(stack, p)
    stack_t = dev.coeffs.transpose(0, 2, 1).reshape(-1, n)
    left = n - linalg.rank(stack_t, p)
    return right, left


def fixed_vectors(A: PolyMatrix) -> np.ndarray:
    n = A.n
    dev = A - PolyMatrix.identity(A.p, n)
    return linalg.nullspace(dev.coeffs.reshape(-1, n), A.p)
