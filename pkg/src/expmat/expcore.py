"""Exponential matrices: truncated exponential, the two exponentiality
tests, Frobenius factorization and simultaneous triangulation."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import InvariantError, NotExponentialError, ShapeError
from .field import binom_mod_p, inv_factorials
from .poly import Poly, _lucas_submultiples, is_p_polynomial
from .polymat import PolyMatrix, is_upper_unipotent

MODES = ("bivariate", "coefficientwise")


def truncated_exp(A: PolyMatrix) -> PolyMatrix:
    p, n = A.p, A.n
    facs = inv_factorials(p)
    out = PolyMatrix.identity(p, n)
    power = PolyMatrix.identity(p, n)
    for i in range(1, p):
        power = power * A
        out = out + power.scalar(facs[i])
    return out


def const_exp(N: np.ndarray, p: int) -> np.ndarray:
    """Truncated exponential of a constant matrix."""
    N = np.asarray(N, dtype=np.int64) % p
    n = N.shape[0]
    facs = inv_factorials(p)
    out = np.eye(n, dtype=np.int64)
    power = np.eye(n, dtype=np.int64)
    for i in range(1, p):
        power = power @ N % p
        out = (out + facs[i] * power) % p
    return out


def _verify_bivariate(A: PolyMatrix) -> bool:
    if not np.array_equal(A.substitute_zero(), np.eye(A.n, dtype=np.int64)):
        return False
    lhs = A.bivariate_product()
    rhs = A.bivariate_shift()
    if lhs.keys() != rhs.keys():
        return False
    return all(np.array_equal(lhs[k], rhs[k]) for k in lhs)


def _verify_coefficientwise(A: PolyMatrix) -> bool:
    # N_0 = I and N_i N_j = C(i+j, i) N_{i+j} for all i, j >= 0.
    p, n = A.p, A.n
    N = {d: A.layer(d) for d in A.nonzero_degrees()}
    if 0 not in N or not np.array_equal(N[0], np.eye(n, dtype=np.int64)):
        return False
    zero = np.zeros((n, n), dtype=np.int64)
    for i in N:
        for j in N:
            b = binom_mod_p(i + j, i, p).value
            if not np.array_equal(N[i] @ N[j] % p, b * N.get(i + j, zero) % p):
                return False
    # pairs where a factor vanishes: C(k, i) N_k must vanish as well
    for k in N:
        for i in _lucas_submultiples(k, p):
            if (i not in N or k - i not in N) and binom_mod_p(k, i, p).value:
                return False
    return True


def verify_exponential(A: PolyMatrix, mode: str = "bivariate") -> bool:
    if not A.is_square():
        raise ShapeError("exponential matrices are square")
    if mode == "bivariate":
        return _verify_bivariate(A)
    if mode == "coefficientwise":
        return _verify_coefficientwise(A)
    raise ValueError(f"unknown mode {mode!r}")


def require_exponential(A: PolyMatrix) -> None:
    if not verify_exponential(A):
        raise NotExponentialError("matrix is not exponential")


@dataclass
class ExpWitness:
    matrix: PolyMatrix
    frob_parts: list = field(default_factory=list)

    def reassemble(self) -> PolyMatrix:
        p, n = self.matrix.p, self.matrix.n
        out = PolyMatrix.identity(p, n)
        for e, N in self.frob_parts:
            out = out * exp_monomial(p, e, N)
        return out

    def to_json(self) -> dict:
        return {"matrix": self.matrix.to_json(),
                "frob_parts": [{"e": e, "N": N.tolist()} for e, N in self.frob_parts]}


def exp_monomial(p: int, e: int, N: np.ndarray) -> PolyMatrix:
    """Exp(T^{p^e} N) for a constant nilpotent N."""
    N = np.asarray(N, dtype=np.int64) % p
    n = N.shape[0]
    facs = inv_factorials(p)
    terms = {0: np.eye(n, dtype=np.int64)}
    power = np.eye(n, dtype=np.int64)
    for i in range(1, p):
        power = power @ N % p
        if power.any():
            terms[i * p**e] = facs[i] * power % p
    return PolyMatrix.from_terms(p, terms)


def factor_frobenius(A: PolyMatrix) -> ExpWitness:
    require_exponential(A)
    p, n = A.p, A.n
    parts = []
    e = 0
    while p**e <= max(A.deg, 0):
        N = A.layer(p**e)
        if N.any():
            if _mpow(N, p, p).any():
                raise InvariantError("Frobenius coefficient is not nilpotent of order p")
            parts.append((e, N.copy()))
        e += 1
    w = ExpWitness(A, parts)
    if w.reassemble() != A:
        raise InvariantError("factorization does not reassemble")
    return w


def _mpow(N: np.ndarray, k: int, p: int) -> np.ndarray:
    out = np.eye(N.shape[0], dtype=np.int64)
    for _ in range(k):
        out = out @ N % p
    return out


def _annihilator(B: np.ndarray, n: int, p: int) -> np.ndarray:
    """Rows spanning {c : c w = 0 for all columns w of B}."""
    if B.shape[1] == 0:
        return np.eye(n, dtype=np.int64)
    return linalg.nullspace(B.T, p).T


def triangulate(A: PolyMatrix) -> np.ndarray:
    """P with P^{-1} A P unipotent upper triangular."""
    require_exponential(A)
    p, n = A.p, A.n
    if is_upper_unipotent(A):
        return np.eye(n, dtype=np.int64)
    Ns = [A.layer(d) for d in A.nonzero_degrees() if d > 0]
    flag = np.zeros((n, 0), dtype=np.int64)
    while flag.shape[1] < n:
        C = _annihilator(flag, n, p)
        stack = np.vstack([C @ N % p for N in Ns]) if C.size else np.zeros((0, n), dtype=np.int64)
        K = linalg.nullspace(stack, p) if stack.size else np.eye(n, dtype=np.int64)
        rows = linalg.row_basis(K.T, p)
        chosen = None
        for v in rows[::-1]:
            if flag.shape[1] == 0 or not linalg.in_span(flag.T, v, p):
                chosen = v
                break
        if chosen is None:
            raise InvariantError("no common invariant vector found")
        flag = np.concatenate([flag, chosen.reshape(n, 1)], axis=1)
    P = flag % p
    U = A.conj(P)
    if not is_upper_unipotent(U):
        raise InvariantError("triangulation failed")
    for i in range(n - 1):
        if not is_p_polynomial(U.entry(i, i + 1)):
            raise InvariantError("superdiagonal entry is not a p-polynomial")
    return P
