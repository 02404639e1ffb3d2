"""Polynomials over F_p: dense univariate, p-polynomials and sparse bivariate."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .errors import ResourceError, ShapeError
from .field import Fp, digits, lucas, sigma_p

MAX_DEGREE = 10**6


def _trim(cs) -> tuple[int, ...]:
    cs = list(cs)
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


@dataclass(frozen=True)
class Poly:
    p: int
    coeffs: tuple[int, ...] = ()

    def __post_init__(self):
        cs = _trim(int(c) % self.p for c in self.coeffs)
        if len(cs) - 1 > MAX_DEGREE:
            raise ResourceError(f"degree {len(cs) - 1} exceeds {MAX_DEGREE}")
        object.__setattr__(self, "coeffs", cs)

    @classmethod
    def zero(cls, p: int) -> "Poly":
        return cls(p, ())

    @classmethod
    def const(cls, p: int, c: int) -> "Poly":
        return cls(p, (c,))

    @classmethod
    def monomial(cls, p: int, d: int, c: int = 1) -> "Poly":
        return cls(p, (0,) * d + (c,))

    @classmethod
    def T(cls, p: int) -> "Poly":
        return cls.monomial(p, 1)

    @classmethod
    def from_terms(cls, p: int, terms: dict[int, int]) -> "Poly":
        if not terms:
            return cls.zero(p)
        cs = [0] * (max(terms) + 1)
        for d, c in terms.items():
            cs[d] = (cs[d] + c) % p
        return cls(p, cs)

    @property
    def deg(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def ord(self) -> int | None:
        """Lowest degree with a nonzero coefficient; None for zero."""
        for d, c in enumerate(self.coeffs):
            if c:
                return d
        return None

    def coeff(self, d: int) -> int:
        return self.coeffs[d] if 0 <= d < len(self.coeffs) else 0

    def terms(self) -> dict[int, int]:
        return {d: c for d, c in enumerate(self.coeffs) if c}

    def _check(self, other: "Poly"):
        if other.p != self.p:
            raise ShapeError("mixed characteristics")

    def _lift(self, other) -> "Poly":
        if isinstance(other, Poly):
            self._check(other)
            return other
        if isinstance(other, Fp):
            other = other.value
        return Poly(self.p, (int(other),))

    def __add__(self, other) -> "Poly":
        o = self._lift(other)
        n = max(len(self.coeffs), len(o.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = o.coeffs + (0,) * (n - len(o.coeffs))
        return Poly(self.p, tuple(x + y for x, y in zip(a, b)))

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.p, tuple(-c for c in self.coeffs))

    def __sub__(self, other) -> "Poly":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "Poly":
        return self._lift(other) - self

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            c = int(other.value if isinstance(other, Fp) else other)
            return Poly(self.p, tuple(x * c for x in self.coeffs))
        self._check(other)
        if not self.coeffs or not other.coeffs:
            return Poly.zero(self.p)
        prod_ = np.convolve(np.array(self.coeffs, dtype=np.int64),
                            np.array(other.coeffs, dtype=np.int64)) % self.p
        return Poly(self.p, tuple(int(x) for x in prod_))

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "Poly":
        out = Poly.const(self.p, 1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __call__(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % self.p
        return acc

    def scale(self, c: int) -> "Poly":
        return self * c

    def vector(self, length: int) -> np.ndarray:
        v = np.zeros(length, dtype=np.int64)
        v[: len(self.coeffs)] = self.coeffs
        return v

    def to_json(self) -> list[int]:
        return list(self.coeffs)

    @classmethod
    def from_json(cls, p: int, data: Sequence[int]) -> "Poly":
        if not isinstance(data, (list, tuple)) or not all(isinstance(c, int) for c in data):
            raise ShapeError("polynomial must be a list of integers")
        return cls(p, tuple(data))

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for d, c in enumerate(self.coeffs):
            if not c:
                continue
            mono = "" if d == 0 else ("T" if d == 1 else f"T^{d}")
            if not mono:
                parts.append(str(c))
            else:
                parts.append(mono if c == 1 else f"{c}{mono}")
        return " + ".join(parts)


@dataclass(frozen=True)
class PPoly:
    """p-polynomial sum_e c_e T^{p^e}, stored by its Frobenius coefficients."""
    p: int
    frobenius_coeffs: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "frobenius_coeffs",
                           _trim(int(c) % self.p for c in self.frobenius_coeffs))

    def to_poly(self) -> Poly:
        return Poly.from_terms(self.p, {self.p**e: c for e, c in enumerate(self.frobenius_coeffs) if c})

    @classmethod
    def from_poly(cls, f: Poly) -> "PPoly":
        if not is_p_polynomial(f):
            raise ShapeError(f"{f} is not a p-polynomial")
        out = []
        e = 0
        while f.p**e <= f.deg:
            out.append(f.coeff(f.p**e))
            e += 1
        return cls(f.p, tuple(out))


def is_p_monomial_degree(d: int, p: int) -> bool:
    return d >= 1 and sigma_p(d, p) == 1


def is_p_polynomial(f: Poly) -> bool:
    return all(is_p_monomial_degree(d, f.p) for d in f.terms())


def p_part(f: Poly) -> Poly:
    """The sum of the p-monomial terms of f."""
    return Poly.from_terms(f.p, {d: c for d, c in f.terms().items() if is_p_monomial_degree(d, f.p)})


def random_ppoly(rng, p: int, max_e: int = 2, density: float = 0.6) -> Poly:
    terms = {p**e: int(rng.integers(1, p)) for e in range(max_e + 1) if rng.random() < density}
    return Poly.from_terms(p, terms)


@dataclass(frozen=True)
class BiPoly:
    """Sparse polynomial in T, T' keyed by (deg_T, deg_T')."""
    p: int
    terms: tuple[tuple[tuple[int, int], int], ...] = ()

    @classmethod
    def from_dict(cls, p: int, d: dict) -> "BiPoly":
        return cls(p, tuple(sorted((k, v % p) for k, v in d.items() if v % p)))

    def as_dict(self) -> dict:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "BiPoly") -> "BiPoly":
        d = self.as_dict()
        for k, v in other.terms:
            d[k] = d.get(k, 0) + v
        return BiPoly.from_dict(self.p, d)

    def __neg__(self) -> "BiPoly":
        return BiPoly.from_dict(self.p, {k: -v for k, v in self.terms})

    def __sub__(self, other: "BiPoly") -> "BiPoly":
        return self + (-other)

    def swap(self) -> "BiPoly":
        return BiPoly.from_dict(self.p, {(j, i): v for (i, j), v in self.terms})


def _lucas_submultiples(d: int, p: int) -> Iterable[int]:
    """All k with C(d, k) != 0 mod p, i.e. k digit-wise <= d."""
    ds = digits(d, p)
    for choice in product(*[range(x + 1) for x in ds]):
        yield sum(c * p**i for i, c in enumerate(choice))


def shift_sub(f: Poly) -> BiPoly:
    """f(T + T') - f(T) - f(T')."""
    p = f.p
    out: dict = {}
    for d, c in f.terms().items():
        if d == 0:
            out[(0, 0)] = out.get((0, 0), 0) - c
            continue
        for k in _lucas_submultiples(d, p):
            if 0 < k < d:
                out[(k, d - k)] = out.get((k, d - k), 0) + c * lucas(d, k, p)
    return BiPoly.from_dict(p, out)


def pairing_bipoly(a: Sequence[Poly], b: Sequence[Poly]) -> BiPoly:
    """sum_i a_i(T) b_i(T')."""
    if len(a) != len(b):
        raise ShapeError("pairing needs equal lengths")
    if not a:
        raise ShapeError("empty pairing")
    p = a[0].p
    out: dict = {}
    for ai, bi in zip(a, b):
        ta, tb = ai.terms(), bi.terms()
        for i, x in ta.items():
            for j, y in tb.items():
                out[(i, j)] = out.get((i, j), 0) + x * y
    return BiPoly.from_dict(p, out)


def is_symmetric(s: BiPoly) -> bool:
    d = s.as_dict()
    return all(d.get((j, i), 0) == v for (i, j), v in d.items())


def coeff_matrix(fs: Sequence[Poly], length: int | None = None) -> np.ndarray:
    """Rows are the coefficient vectors of fs."""
    if length is None:
        length = max((f.deg + 1 for f in fs), default=0)
    return np.array([f.vector(length) for f in fs], dtype=np.int64).reshape(len(fs), length)


def span_rank(fs: Sequence[Poly], p: int) -> int:
    if not fs:
        return 0
    m = coeff_matrix(fs)
    return linalg.rank(m, p) if m.size else 0


def lin_indep(fs: Sequence[Poly]) -> bool:
    if not fs:
        return True
    return span_rank(fs, fs[0].p) == len(fs)


def solve_combination(target: Poly, fs: Sequence[Poly]) -> np.ndarray | None:
    """Scalars c with target = sum c_i f_i, or None."""
    p = target.p
    if not fs:
        return np.zeros(0, dtype=np.int64) if target.is_zero() else None
    n = max([target.deg + 1] + [f.deg + 1 for f in fs])
    if n == 0:
        return np.zeros(len(fs), dtype=np.int64)
    a = coeff_matrix(fs, n).T
    return linalg.solve(a, target.vector(n), p)


def proportional(g: Poly, f: Poly) -> int | None:
    """c with g = c f (f nonzero), or None."""
    c = solve_combination(g, [f])
    return None if c is None else int(c[0])


def combine(cs, fs: Sequence[Poly], p: int) -> Poly:
    out = Poly.zero(p)
    for c, f in zip(cs, fs):
        if int(c) % p:
            out = out + f * int(c)
    return out
