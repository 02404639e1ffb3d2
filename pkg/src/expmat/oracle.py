"""Brute-force ground truth for small cases: GL(n, p) enumeration,
conjugacy search, nil-tuple enumeration and disjointness reports."""
from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterator, Sequence

import numpy as np

from . import linalg
from .errors import BudgetExceeded, ShapeError
from .polymat import PolyMatrix

DEFAULT_BUDGET = 10**7


def default_budget() -> int:
    env = os.environ.get("EXPMAT_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


@dataclass(frozen=True)
class SearchBudget:
    max_group_order: int = DEFAULT_BUDGET
    max_candidates: int = DEFAULT_BUDGET
    seed: int = 0

    def __post_init__(self):
        if self.max_group_order <= 0 or self.max_candidates <= 0:
            raise ValueError("budget bounds must be positive")

    @classmethod
    def from_env(cls, seed: int = 0) -> "SearchBudget":
        b = default_budget()
        return cls(b, b, seed)


def gl_order(n: int, p: int) -> int:
    out = 1
    for i in range(n):
        out *= p**n - p**i
    return out


def _vectors(n: int, p: int) -> list[tuple]:
    return list(product(range(p), repeat=n))


def enumerate_gl(n: int, p: int, budget: int | None = None) -> Iterator[np.ndarray]:
    """Every invertible n x n matrix over F_p once, in lexicographic order of
    the flattened entries."""
    budget = default_budget() if budget is None else budget
    if gl_order(n, p) > budget:
        raise BudgetExceeded(f"|GL({n},{p})| = {gl_order(n, p)} exceeds budget {budget}")
    yield from gl_array(n, p)


@lru_cache(maxsize=8)
def gl_array(n: int, p: int) -> np.ndarray:
    vecs = _vectors(n, p)
    out: list = []

    def rec(rows: list, span: set):
        if len(rows) == n:
            out.append(np.array(rows, dtype=np.int64))
            return
        for v in vecs:
            if v in span:
                continue
            new_span = {tuple((a + c * b) % p for a, b in zip(s, v)) for s in span for c in range(p)}
            rec(rows + [v], new_span)

    rec([], {tuple([0] * n)})
    arr = np.array(out, dtype=np.int64).reshape(len(out), n, n)
    arr.setflags(write=False)
    return arr


def brute_equiv(A: PolyMatrix, B: PolyMatrix, budget: int | None = None) -> np.ndarray | None:
    """Lexicographically first P in GL(n, p) with P^{-1} A P = B, else None."""
    if A.shape != B.shape or A.p != B.p or not A.is_square():
        raise ShapeError("brute_equiv needs square matrices of equal size and p")
    p, n = A.p, A.n
    budget = default_budget() if budget is None else budget
    if gl_order(n, p) > budget:
        raise BudgetExceeded(f"|GL({n},{p})| exceeds budget {budget}")
    if A.coeffs.shape[0] != B.coeffs.shape[0]:
        return None
    G = gl_array(n, p)
    ok = np.ones(G.shape[0], dtype=bool)
    degs = sorted(set(A.nonzero_degrees()) | set(B.nonzero_degrees()))
    for d in degs:
        Ad, Bd = A.layer(d), B.layer(d)
        lhs = np.einsum("ij,gjk->gik", Ad, G) % p
        rhs = np.einsum("gij,jk->gik", G, Bd) % p
        ok &= (lhs == rhs).all(axis=(1, 2))
        if not ok.any():
            return None
    idx = np.nonzero(ok)[0]
    return G[int(idx[0])].copy() if idx.size else None


def simultaneous_conjugate(As: Sequence[np.ndarray], Bs: Sequence[np.ndarray], p: int,
                           budget: int | None = None) -> np.ndarray | None:
    """First P with P^{-1} A_i P = B_i for every i (constant matrices)."""
    if len(As) != len(Bs):
        return None
    n = np.asarray(As[0]).shape[0] if As else np.asarray(Bs[0]).shape[0]
    budget = default_budget() if budget is None else budget
    if gl_order(n, p) > budget:
        raise BudgetExceeded("group too large")
    G = gl_array(n, p)
    ok = np.ones(G.shape[0], dtype=bool)
    for a, b in zip(As, Bs):
        lhs = np.einsum("ij,gjk->gik", np.asarray(a), G) % p
        rhs = np.einsum("gij,jk->gik", G, np.asarray(b)) % p
        ok &= (lhs == rhs).all(axis=(1, 2))
    idx = np.nonzero(ok)[0]
    return G[int(idx[0])].copy() if idx.size else None


def _mpow(N, k, p):
    out = np.eye(N.shape[0], dtype=np.int64)
    for _ in range(k):
        out = out @ N % p
    return out


def nilpotent_matrices(n: int, p: int, budget: int | None = None) -> np.ndarray:
    """All n x n matrices N over F_p with N^p = 0, lexicographic."""
    budget = default_budget() if budget is None else budget
    total = p ** (n * n)
    if total > budget:
        raise BudgetExceeded(f"{total} candidate matrices exceed budget {budget}")
    allm = np.array(list(product(range(p), repeat=n * n)), dtype=np.int64).reshape(-1, n, n)
    power = allm.copy()
    for _ in range(p - 1):
        power = np.einsum("gij,gjk->gik", power, allm) % p
    return allm[~power.any(axis=(1, 2))]


def _strict_upper_commutant(Us: list[np.ndarray], n: int, p: int) -> np.ndarray:
    """Basis (as flattened rows) of strictly upper V commuting with all Us."""
    idx = [(i, j) for i in range(n) for j in range(i + 1, n)]
    cols = []
    for (i, j) in idx:
        E = np.zeros((n, n), dtype=np.int64)
        E[i, j] = 1
        cols.append(np.concatenate([((U @ E - E @ U) % p).ravel() for U in Us]) if Us else np.zeros(0))
    if not Us:
        return np.eye(len(idx), dtype=np.int64)
    M = np.array(cols, dtype=np.int64).T
    return linalg.nullspace(M, p).T


def sample_nil_tuple(n: int, p: int, r: int, rng) -> list[np.ndarray]:
    """A random r-tuple of commuting N with N^p = 0, drawn via a common
    triangular basis."""
    P = _random_gl(n, p, rng)
    Pi = linalg.inv(P, p)
    idx = [(i, j) for i in range(n) for j in range(i + 1, n)]
    Us: list[np.ndarray] = []
    for _ in range(r):
        basis = _strict_upper_commutant(Us, n, p)
        for _attempt in range(50):
            c = rng.integers(0, p, size=basis.shape[0])
            if rng.random() < 0.15:
                c = np.zeros_like(c)
            flat = c @ basis % p if basis.size else np.zeros(len(idx), dtype=np.int64)
            V = np.zeros((n, n), dtype=np.int64)
            for k, (i, j) in enumerate(idx):
                V[i, j] = flat[k]
            if not _mpow(V, p, p).any():
                break
        else:
            V = np.zeros((n, n), dtype=np.int64)
        Us.append(V)
    return [P @ U @ Pi % p for U in Us]


def _random_gl(n: int, p: int, rng) -> np.ndarray:
    while True:
        M = rng.integers(0, p, size=(n, n))
        if linalg.is_invertible(M, p):
            return M.astype(np.int64)


def enumerate_exp_reps(n: int, p: int, r: int, budget: int | None = None,
                       seed: int = 0, sample_size: int = 200) -> Iterator[list[np.ndarray]]:
    """Commuting r-tuples with N_i^p = 0, each giving a distinct exponential
    matrix. Exhaustive when the candidate count fits the budget, otherwise a
    seeded sample of at most sample_size tuples."""
    budget = default_budget() if budget is None else budget
    if r == 0:
        yield []
        return
    exhaustive = p ** (n * n) <= budget
    if exhaustive:
        nil = nilpotent_matrices(n, p, budget)
        exhaustive = len(nil) ** r <= budget
    if exhaustive:
        def rec(prefix):
            if len(prefix) == r:
                yield [m.copy() for m in prefix]
                return
            for N in nil:
                if all(np.array_equal(N @ M % p, M @ N % p) for M in prefix):
                    yield from rec(prefix + [N])
        yield from rec([])
        return
    from .modrep import nil_to_exp
    rng = np.random.default_rng(seed)
    seen = set()
    tries = 0
    while len(seen) < sample_size and tries < 50 * sample_size:
        tries += 1
        t = sample_nil_tuple(n, p, r, rng)
        key = nil_to_exp(t, p)
        if key in seen:
            continue
        seen.add(key)
        yield t


def certify_disjoint(reprs_a: Sequence[PolyMatrix], reprs_b: Sequence[PolyMatrix],
                     budget: int | None = None, seed: int = 0) -> dict:
    budget = default_budget() if budget is None else budget
    checked = 0
    violations = []
    for i, A in enumerate(reprs_a):
        for j, B in enumerate(reprs_b):
            checked += 1
            P = brute_equiv(A, B, budget)
            if P is not None:
                violations.append({"a": i, "b": j, "P": P.tolist()})
    return {"checked": checked, "violations": violations, "seed": seed, "budget": budget}
