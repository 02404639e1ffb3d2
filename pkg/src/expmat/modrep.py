"""Modular representations of (Z/pZ)^r as commuting unipotent tuples, the
bijection with exponential matrices, the nilpotent algebras whose tuples
exponentiate into each family, and 4-dimensional classification."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .errors import InvalidRepError, MembershipError, MixedAlgebraError, ShapeError
from .expcore import exp_monomial, factor_frobenius
from .field import Prime
from .heisenberg import HeisProfile
from .polymat import PolyMatrix, nu


def _mpow(M: np.ndarray, k: int, p: int) -> np.ndarray:
    out = np.eye(M.shape[0], dtype=np.int64)
    for _ in range(k):
        out = out @ M % p
    return out


@dataclass
class Rep:
    """Images U_1..U_r of the standard generators e_1..e_r."""
    p: int
    n: int
    gens: list

    def __post_init__(self):
        Prime(self.p)
        p, n = self.p, self.n
        self.gens = [np.asarray(U, dtype=np.int64) % p for U in self.gens]
        I = np.eye(n, dtype=np.int64)
        for U in self.gens:
            if U.shape != (n, n):
                raise InvalidRepError("generator has the wrong shape")
            if not np.array_equal(_mpow(U, p, p), I):
                raise InvalidRepError("generator does not have order dividing p")
        for i, U in enumerate(self.gens):
            for V in self.gens[i + 1:]:
                if not np.array_equal(U @ V % p, V @ U % p):
                    raise InvalidRepError("generators do not commute")

    @property
    def r(self) -> int:
        return len(self.gens)

    def nil_parts(self) -> list[np.ndarray]:
        return [(U - np.eye(self.n, dtype=np.int64)) % self.p for U in self.gens]

    def trimmed(self) -> "Rep":
        """Drop trailing identity generators."""
        gens = list(self.gens)
        I = np.eye(self.n, dtype=np.int64)
        while gens and np.array_equal(gens[-1], I):
            gens.pop()
        return Rep(self.p, self.n, gens)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Rep) and (self.p, self.n, self.r) == (other.p, other.n, other.r)
                and all(np.array_equal(a, b) for a, b in zip(self.gens, other.gens)))

    def rho(self, exps: Sequence[int]) -> np.ndarray:
        """Image of the group element (i_1, ..., i_r)."""
        out = np.eye(self.n, dtype=np.int64)
        for U, k in zip(self.gens, exps):
            out = out @ _mpow(U, int(k) % self.p, self.p) % self.p
        return out

    def to_json(self) -> dict:
        return {"p": self.p, "n": self.n, "r": self.r, "gens": [U.tolist() for U in self.gens]}

    @classmethod
    def from_json(cls, data: dict) -> "Rep":
        if set(data) - {"p", "n", "r", "gens", "schema"}:
            raise ShapeError("unknown fields in representation")
        rep = cls(int(data["p"]), int(data["n"]), data["gens"])
        if "r" in data and data["r"] != rep.r:
            raise InvalidRepError("r does not match the number of generators")
        return rep


@dataclass
class NilTuple:
    p: int
    n: int
    parts: list

    def __post_init__(self):
        Rep(self.p, self.n, [(np.eye(self.n, dtype=np.int64) + N) for N in self.parts])
        self.parts = [np.asarray(N, dtype=np.int64) % self.p for N in self.parts]

    @property
    def r(self) -> int:
        return len(self.parts)


def nil_to_exp(parts: Sequence[np.ndarray], p: int, n: int | None = None) -> PolyMatrix:
    """prod_i Exp(T^{p^(i-1)} N_i)."""
    if n is None:
        if not parts:
            raise ShapeError("size needed for an empty tuple")
        n = np.asarray(parts[0]).shape[0]
    out = PolyMatrix.identity(p, n)
    for e, N in enumerate(parts):
        N = np.asarray(N, dtype=np.int64) % p
        if N.any():
            out = out * exp_monomial(p, e, N)
    return out


def rep_to_exp(rep: Rep) -> PolyMatrix:
    return nil_to_exp(rep.nil_parts(), rep.p, rep.n)


def exp_to_rep(A: PolyMatrix) -> Rep:
    w = factor_frobenius(A)
    p, n = A.p, A.n
    r = 1 + max((e for e, _ in w.frob_parts), default=-1)
    gens = [np.eye(n, dtype=np.int64) for _ in range(r)]
    for e, N in w.frob_parts:
        gens[e] = (gens[e] + N) % p
    return Rep(p, n, gens)


# ---------------------------------------------------------------- algebras

class Algebra:
    """A commutative algebra of nilpotent constant matrices."""
    n: int
    name: str = ""

    def contains(self, N: np.ndarray, p: int) -> bool:
        raise NotImplementedError

    def basis(self, p: int) -> list[np.ndarray]:
        raise NotImplementedError

    def nil_index(self, p: int) -> int:
        """k with N^k = 0 for every element N."""
        raise NotImplementedError

    def sample(self, rng, p: int) -> np.ndarray:
        out = np.zeros((self.n, self.n), dtype=np.int64)
        for B in self.basis(p):
            out = (out + int(rng.integers(0, p)) * B) % p
        return out

    def key(self) -> tuple:
        return (type(self).__name__, self.name)


def _in_span(N, basis, p) -> bool:
    if not basis:
        return not np.any(N % p)
    return linalg.in_span(np.array([B.ravel() for B in basis]), np.asarray(N).ravel() % p, p)


def _unit(n: int, i: int, j: int) -> np.ndarray:
    E = np.zeros((n, n), dtype=np.int64)
    E[i, j] = 1
    return E


class JAlg(Algebra):
    """Span of nu_n, ..., nu_n^{n-1}."""
    def __init__(self, n: int):
        self.n, self.name = n, f"j[{n}]"

    def basis(self, p):
        v = nu(p, self.n)
        return [np.linalg.matrix_power(v, i) % p for i in range(1, self.n)]

    def contains(self, N, p):
        return np.asarray(N).shape == (self.n, self.n) and _in_span(N, self.basis(p), p)

    def nil_index(self, p):
        return self.n


class Jn1Alg(Algebra):
    """(sum s_i nu_n^i | s_n e_1 ; 0 | 0) of size n + 1."""
    def __init__(self, n: int):
        self.n, self.k, self.name = n + 1, n, f"j[{n},1]"

    def basis(self, p):
        k = self.k
        out = []
        for B in JAlg(k).basis(p):
            M = np.zeros((k + 1, k + 1), dtype=np.int64)
            M[:k, :k] = B
            out.append(M)
        out.append(_unit(k + 1, 0, k))
        return out

    def contains(self, N, p):
        return np.asarray(N).shape == (self.n, self.n) and _in_span(N, self.basis(p), p)

    def nil_index(self, p):
        return self.k


class J1nAlg(Algebra):
    """(0 | s_n e_n^t ; 0 | sum s_i nu_n^i) of size n + 1."""
    def __init__(self, n: int):
        self.n, self.k, self.name = n + 1, n, f"j[1,{n}]"

    def basis(self, p):
        k = self.k
        out = []
        for B in JAlg(k).basis(p):
            M = np.zeros((k + 1, k + 1), dtype=np.int64)
            M[1:, 1:] = B
            out.append(M)
        out.append(_unit(k + 1, 0, k))
        return out

    def contains(self, N, p):
        return np.asarray(N).shape == (self.n, self.n) and _in_span(N, self.basis(p), p)

    def nil_index(self, p):
        return self.k


class AAlg(Algebra):
    """Matrices supported on the (i1, i3) corner block."""
    def __init__(self, i1: int, i2: int, i3: int):
        if i1 < 1 or i3 < 1 or i2 < 0:
            raise ShapeError("need i1, i3 >= 1 and i2 >= 0")
        self.i1, self.i2, self.i3 = i1, i2, i3
        self.n, self.name = i1 + i2 + i3, f"a({i1},{i2},{i3})"

    def basis(self, p):
        c = self.i1 + self.i2
        return [_unit(self.n, i, c + j) for i in range(self.i1) for j in range(self.i3)]

    def contains(self, N, p):
        N = np.asarray(N) % p
        if N.shape != (self.n, self.n):
            return False
        M = N.copy()
        M[: self.i1, self.i1 + self.i2:] = 0
        return not M.any()

    def nil_index(self, p):
        return 2


def _eta_const(N: np.ndarray, m: int):
    """(x, y, z) of a constant N = eta(...) - I, or None if N has another shape."""
    N = np.asarray(N)
    if N.shape != (m + 2, m + 2):
        return None
    M = N.copy()
    M[0, 1:] = 0
    M[1:m + 1, m + 1] = 0
    if M.any():
        return None
    return N[0, 1:m + 1], N[1:m + 1, m + 1], int(N[0, m + 1])


class HAlg(Algebra):
    """eta(a) - I with (a_{m+1}..a_{m+r1}) = (a_1..a_{r1}) S and the profile's zero pattern."""
    def __init__(self, profile: HeisProfile, S):
        self.profile = profile
        self.S = np.asarray(S, dtype=np.int64)
        self.n, self.name = profile.m + 2, f"h{(profile.ell, profile.r1, profile.r2)}"

    def key(self):
        pr = self.profile
        return ("h", pr.m, pr.ell, pr.r1, pr.r2, tuple(self.S.ravel().tolist()))

    def basis(self, p):
        pr, m = self.profile, self.profile.m
        out = []
        for i in range(pr.ell):
            N = _unit(m + 2, 0, 1 + i)
            if i < pr.r1:
                N[1:pr.r1 + 1, m + 1] = self.S[i] % p
            out.append(N)
        for i in range(pr.r2):
            out.append(_unit(m + 2, 1 + pr.ell + i, m + 1))
        out.append(_unit(m + 2, 0, m + 1))
        return out

    def contains(self, N, p):
        pr, m = self.profile, self.profile.m
        c = _eta_const(np.asarray(N) % p, m)
        if c is None:
            return False
        x, y, _ = c
        if x[pr.ell:].any() or y[pr.r1:pr.ell].any() or y[pr.ell + pr.r2:].any():
            return False
        return np.array_equal(y[:pr.r1] % p, x[:pr.r1] @ self.S % p)

    def nil_index(self, p):
        return 2 if p == 2 else 3


class DalethFlat(Algebra):
    """eta(x, y, z) - I with x supported on slots i..m and y on slots 1..i-1 (1-based)."""
    def __init__(self, m: int, i: int):
        if not 1 <= i <= m + 1:
            raise ShapeError("window index must lie in 1..m+1")
        self.m, self.i = m, i
        self.n, self.name = m + 2, f"daleth{m + 2}({i})"

    def basis(self, p):
        m, i = self.m, self.i
        out = [_unit(m + 2, 0, k) for k in range(i, m + 1)]
        out += [_unit(m + 2, k, m + 1) for k in range(1, i)]
        out.append(_unit(m + 2, 0, m + 1))
        return out

    def contains(self, N, p):
        c = _eta_const(np.asarray(N) % p, self.m)
        if c is None:
            return False
        x, y, _ = c
        return not x[: self.i - 1].any() and not y[self.i - 1:].any()

    def nil_index(self, p):
        return 2


def require_tuple_in(Ns: Sequence[np.ndarray], alg: Algebra, p: int) -> None:
    for N in Ns:
        if not alg.contains(N, p):
            raise MembershipError(f"matrix is not in {alg.name}")


def heis_rep(Ns: Sequence[np.ndarray], algebras, p: int) -> Rep:
    """The representation e_i -> I + N_i for N_i in one Heisenberg-type algebra.

    algebras is one algebra or a list giving the algebra of each N_i."""
    if isinstance(algebras, Algebra):
        algebras = [algebras] * len(Ns)
    if len(algebras) != len(Ns):
        raise ShapeError("one algebra per matrix expected")
    if not Ns:
        raise ShapeError("at least one matrix needed")
    if len({a.key() for a in algebras}) > 1:
        raise MixedAlgebraError("matrices come from different algebras")
    alg = algebras[0]
    if not isinstance(alg, (HAlg, DalethFlat)):
        raise MembershipError("heis_rep needs a Heisenberg or daleth algebra")
    require_tuple_in(Ns, alg, p)
    n = alg.n
    return Rep(p, n, [(np.eye(n, dtype=np.int64) + np.asarray(N)) % p for N in Ns])


def sample_tuple(rng, alg: Algebra, p: int, r: int) -> list[np.ndarray]:
    return [alg.sample(rng, p) for _ in range(r)]


def classify_rep4(rep: Rep):
    """Class of a 4-dimensional representation via its exponential.

    Returns (label, P) with P^-1 U_i P the generators of the representative."""
    from .classify4 import classify4
    if rep.n != 4:
        raise ShapeError("classify_rep4 needs 4x4 generators")
    return classify4(rep_to_exp(rep))


def conj_rep(rep: Rep, P) -> Rep:
    p = rep.p
    Pi = linalg.inv(P, p)
    return Rep(p, rep.n, [Pi @ U % p @ np.asarray(P) % p for U in rep.gens])
