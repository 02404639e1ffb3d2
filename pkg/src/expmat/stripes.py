"""Stripe families J_[n], J_[n,1], J_[1,n] and corner blocks Lambda(i1,i2,i3; alpha):
constructors, the groups Q_[n] and Q_[n,1], and equivalence deciders."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Sequence

import numpy as np

from . import linalg
from .errors import (InvariantError, RankDeficientError, ResourceError,
                     ShapeError)
from .field import inv_factorials
from .poly import Poly, coeff_matrix, is_p_polynomial, lin_indep, solve_combination
from .polymat import PolyMatrix, block, nu

KINDS = ("J_n", "J_n1_0", "J_n1_1", "J_1n_1")
ABLOCK_GATE = 10**7


# ---------------------------------------------------------------- stripes

def _partitions(total: int, max_part: int):
    """Multiplicity vectors (i_1..i_max) with sum k*i_k = total."""
    def rec(rem, k):
        if k == 0:
            if rem == 0:
                yield ()
            return
        for i in range(rem // k + 1):
            for rest in rec(rem - i * k, k - 1):
                yield rest + (i,)
    yield from rec(total, max_part)


def stripe_coeffs(fs: Sequence[Poly], n: int) -> list[Poly]:
    """Coefficients a_0..a_{n-1} of nu_n^l in Exp(sum f_i nu_n^i), by the
    closed partition formula sum prod f_k^{i_k} / i_k!."""
    if not fs:
        raise ShapeError("need at least one stripe polynomial")
    p = fs[0].p
    if not 2 <= n <= p:
        raise InvariantError(f"stripe size {n} outside 2..{p}")
    fs = list(fs)[: n - 1] + [Poly.zero(p)] * max(0, n - 1 - len(fs))
    facs = inv_factorials(p)
    out = [Poly.const(p, 1)]
    for ell in range(1, n):
        acc = Poly.zero(p)
        for mult in _partitions(ell, ell):
            term = Poly.const(p, 1)
            for k, i in enumerate(mult, start=1):
                if i:
                    term = term * (fs[k - 1] ** i) * facs[i]
            acc = acc + term
        out.append(acc)
    return out


def toeplitz(p: int, cs: Sequence[Poly], n: int) -> PolyMatrix:
    """sum_l cs[l] nu_n^l."""
    out = PolyMatrix.zero(p, n)
    for ell, c in enumerate(cs[:n]):
        if c:
            out = out + PolyMatrix.const(p, np.linalg.matrix_power(nu(p, n), ell)).scale_poly(c)
    return out


@dataclass(frozen=True)
class StripeForm:
    n: int
    kind: str
    fs: tuple

    def __post_init__(self):
        object.__setattr__(self, "fs", tuple(self.fs))
        n, fs = self.n, self.fs
        if self.kind not in KINDS:
            raise InvariantError(f"unknown stripe kind {self.kind!r}")
        if not fs:
            raise InvariantError("empty stripe data")
        p = fs[0].p
        if not 2 <= n <= p:
            raise InvariantError(f"stripe size {n} must satisfy 2 <= n <= p = {p}")
        if any(not is_p_polynomial(f) for f in fs):
            raise InvariantError("stripe entries must be p-polynomials")
        want = n - 1 if self.kind == "J_n" else n
        if self.kind == "J_n1_0" and len(fs) == n - 1:
            object.__setattr__(self, "fs", fs + (Poly.zero(p),))
        elif len(fs) != want:
            raise InvariantError(f"{self.kind} needs {want} polynomials, got {len(fs)}")
        if self.kind == "J_n1_0" and self.fs[-1]:
            raise InvariantError("J_n1_0 has no corner polynomial")
        if not fs[0]:
            raise InvariantError("f_1 must be nonzero")
        if self.kind in ("J_n1_1", "J_1n_1") and not lin_indep([self.fs[0], self.fs[-1]]):
            raise InvariantError("f_1 and f_n must be linearly independent")

    @property
    def p(self) -> int:
        return self.fs[0].p

    @property
    def stripe(self) -> tuple:
        return self.fs[: self.n - 1]


def build_stripe(sf: StripeForm) -> PolyMatrix:
    p, n = sf.p, sf.n
    J = toeplitz(p, stripe_coeffs(list(sf.stripe), n), n)
    if sf.kind == "J_n":
        return J
    one = PolyMatrix.identity(p, 1)
    col = PolyMatrix.from_entries(p, [[sf.fs[-1]]] + [[0]] * (n - 1))
    if sf.kind in ("J_n1_0", "J_n1_1"):
        return block([[J, col], [PolyMatrix.zero(p, 1, n), one]])
    row = PolyMatrix.from_entries(p, [[0] * (n - 1) + [sf.fs[-1]]])
    return block([[one, row], [PolyMatrix.zero(p, n, 1), J]])


def _stripe_fs(first_row: Sequence[Poly], n: int) -> list[Poly]:
    """Invert stripe_coeffs: recover f_1..f_{n-1} from the first row of the stripe."""
    p = first_row[0].p
    fs: list[Poly] = []
    for ell in range(1, n):
        known = stripe_coeffs(fs + [Poly.zero(p)], n)[ell] if fs else Poly.zero(p)
        fs.append(first_row[ell] - known)
    return fs


def stripe_form_of(A: PolyMatrix) -> StripeForm | None:
    """The stripe form A is built from, trying J_n, then J_[n,1], then J_[1,n]."""
    N = A.n
    for kind, k, off in (("J_n", N, 0), ("J_n1", N - 1, 0), ("J_1n_1", N - 1, 1)):
        if k < 2:
            continue
        try:
            fs = _stripe_fs([A.entry(off, off + j) for j in range(k)], k)
            if kind == "J_n":
                cands = [StripeForm(k, "J_n", fs)]
            else:
                corner = A.entry(0, N - 1)
                if kind == "J_n1":
                    cands = [StripeForm(k, "J_n1_0" if corner.is_zero() else "J_n1_1", fs + [corner])]
                else:
                    cands = [StripeForm(k, kind, fs + [corner])]
        except (InvariantError, ShapeError):
            continue
        for sf in cands:
            if build_stripe(sf) == A:
                return sf
    return None


# ---------------------------------------------------------------- Q_[n]

def q_entries(ys: Sequence[int], p: int) -> np.ndarray:
    """q_ij = sum over compositions l_1+..+l_i = j of y_l1 ... y_li."""
    L = len(ys)
    q = np.zeros((L, L), dtype=np.int64)
    q[0] = np.array(ys, dtype=np.int64) % p
    for i in range(1, L):
        for j in range(i, L):
            # q[i][j] (0-based) = sum_k y_k q[i-1][j-k]
            q[i, j] = sum(int(ys[k]) * int(q[i - 1, j - k - 1]) for k in range(0, j - i + 1)) % p
    return q


def q_recursive(ys: Sequence[int], p: int) -> np.ndarray:
    """Q_l = diag(1, Q_{l-1}) J(y_1..y_l), built by the defining recursion."""
    Q = np.array([[int(ys[0]) % p]], dtype=np.int64)
    for ell in range(2, len(ys) + 1):
        D = np.eye(ell, dtype=np.int64)
        D[1:, 1:] = Q
        J = sum(int(ys[i]) * np.linalg.matrix_power(np.eye(ell, k=1, dtype=np.int64), i)
                for i in range(ell))
        Q = D @ J % p
    return Q


@dataclass(frozen=True)
class QnElement:
    n: int
    ys: tuple
    p: int

    def __post_init__(self):
        ys = tuple(int(y) % self.p for y in self.ys)
        object.__setattr__(self, "ys", ys)
        if len(ys) != self.n - 1:
            raise ShapeError("Q_[n] element needs n-1 parameters")
        if ys[0] == 0:
            raise InvariantError("y_1 must be nonzero")

    def matrix(self) -> np.ndarray:
        return q_entries(self.ys, self.p)

    @classmethod
    def identity(cls, n: int, p: int) -> "QnElement":
        return cls(n, (1,) + (0,) * (n - 2), p)


def qn_matrix(q: QnElement) -> np.ndarray:
    return q.matrix()


def qn_membership(M, p: int) -> QnElement | None:
    M = np.asarray(M, dtype=np.int64) % p
    ys = tuple(int(x) for x in M[0])
    if ys[0] == 0:
        return None
    q = QnElement(M.shape[0] + 1, ys, p)
    return q if np.array_equal(q.matrix(), M) else None


def qn_mul(a: QnElement, b: QnElement) -> QnElement:
    m = qn_membership(a.matrix() @ b.matrix() % a.p, a.p)
    if m is None:
        raise InvariantError("product left Q_[n]")
    return m


def qn_inv(a: QnElement) -> QnElement:
    m = qn_membership(linalg.inv(a.matrix(), a.p), a.p)
    if m is None:
        raise InvariantError("inverse left Q_[n]")
    return m


@dataclass(frozen=True)
class Qn1Element:
    """(Q_flat | u e_1 ; v e_{n-1}^t | w) with Q_flat in Q_[n]."""
    qflat: QnElement
    u: int
    v: int
    w: int

    def __post_init__(self):
        p = self.qflat.p
        object.__setattr__(self, "u", int(self.u) % p)
        object.__setattr__(self, "v", int(self.v) % p)
        object.__setattr__(self, "w", int(self.w) % p)
        if self.w == 0:
            raise InvariantError("w must be nonzero")

    @property
    def n(self) -> int:
        return self.qflat.n

    @property
    def p(self) -> int:
        return self.qflat.p

    def matrix(self) -> np.ndarray:
        n = self.n
        M = np.zeros((n, n), dtype=np.int64)
        M[: n - 1, : n - 1] = self.qflat.matrix()
        M[0, n - 1] = self.u
        M[n - 1, n - 2] = self.v
        M[n - 1, n - 1] = self.w
        return M % self.p

    @classmethod
    def identity(cls, n: int, p: int) -> "Qn1Element":
        return cls(QnElement.identity(n, p), 0, 0, 1)


def qn1_membership(M, p: int) -> Qn1Element | None:
    M = np.asarray(M, dtype=np.int64) % p
    n = M.shape[0]
    qf = qn_membership(M[: n - 1, : n - 1], p)
    if qf is None or M[n - 1, n - 1] == 0:
        return None
    e = Qn1Element(qf, M[0, n - 1], M[n - 1, n - 2], M[n - 1, n - 1])
    return e if np.array_equal(e.matrix(), M) else None


def qn1_mul(a: Qn1Element, b: Qn1Element) -> Qn1Element:
    m = qn1_membership(a.matrix() @ b.matrix() % a.p, a.p)
    if m is None:
        raise InvariantError("product left Q_[n,1]")
    return m


def qn1_inv(a: Qn1Element) -> Qn1Element:
    m = qn1_membership(linalg.inv(a.matrix(), a.p), a.p)
    if m is None:
        raise InvariantError("inverse left Q_[n,1]")
    return m


# ---------------------------------------------------------------- deciders

@dataclass
class Witness:
    element: object
    P: np.ndarray
    extra: dict = field(default_factory=dict)


def _check_conj(A: PolyMatrix, B: PolyMatrix, P: np.ndarray) -> None:
    if A.conj(P) != B:
        raise InvariantError("decider produced an invalid conjugator")


def _solve_ys(f: Sequence[Poly], g: Sequence[Poly], L: int, last_extra: Poly | None = None):
    """Solve g_l = [(f_1..f_L) Q_L(y)]_l for l = 1..L sequentially.

    When last_extra is given the final column may also absorb v * last_extra.
    Returns (ys, v) or None.
    """
    p = f[0].p
    ys: list[int] = []
    v = 0
    for ell in range(1, L + 1):
        rest = g[ell - 1]
        if ell > 1:
            q = q_entries(ys + [0], p)
            for i in range(2, ell + 1):
                c = int(q[i - 1, ell - 1])
                if c:
                    rest = rest - f[i - 1] * c
        basis = [f[0]]
        if last_extra is not None and ell == L:
            basis.append(last_extra)
        c = solve_combination(rest, basis)
        if c is None:
            return None
        y = int(c[0])
        if ell == 1 and y == 0:
            return None
        ys.append(y)
        if len(c) > 1:
            v = int(c[1])
    return ys, v


def _same_shape(a: StripeForm, b: StripeForm, kinds) -> None:
    if a.kind not in kinds or b.kind not in kinds:
        raise ShapeError(f"expected stripe kind in {kinds}")
    if a.n != b.n or a.p != b.p:
        raise ShapeError("stripe forms differ in size or characteristic")


def equiv_J_n(A: StripeForm, B: StripeForm) -> Witness | None:
    _same_shape(A, B, ("J_n",))
    p, n = A.p, A.n
    sol = _solve_ys(A.stripe, B.stripe, n - 1)
    if sol is None:
        return None
    q = QnElement(n, sol[0], p)
    P = np.eye(n, dtype=np.int64)
    P[1:, 1:] = q.matrix()
    _check_conj(build_stripe(A), build_stripe(B), P)
    return Witness(q, P)


def equiv_J_n1_0(A: StripeForm, B: StripeForm) -> Witness | None:
    _same_shape(A, B, ("J_n1_0",))
    p, n = A.p, A.n
    sol = _solve_ys(A.stripe, B.stripe, n - 1)
    if sol is None:
        return None
    q = QnElement(n, sol[0], p)
    P = np.eye(n + 1, dtype=np.int64)
    P[1:n, 1:n] = q.matrix()
    _check_conj(build_stripe(A), build_stripe(B), P)
    return Witness(q, P)


def _equiv_n1_core(f: Sequence[Poly], g: Sequence[Poly], n: int, p: int):
    """Transport data and conjugator for the column-corner form."""
    if n == 2:
        # the row (f_1, f_2) moves under all of GL(2)
        G = solve_combination_matrix(list(f), list(g), p)
        if G is None or not linalg.is_invertible(G, p):
            return None
        P = np.eye(3, dtype=np.int64)
        P[1:, 1:] = G
        return G, P
    c = solve_combination(g[n - 1], [f[0], f[n - 1]])
    if c is None or int(c[1]) == 0:
        return None
    u, w = int(c[0]), int(c[1])
    sol = _solve_ys(f[: n - 1], g[: n - 1], n - 1, last_extra=f[n - 1])
    if sol is None:
        return None
    ys, v = sol
    elem = Qn1Element(QnElement(n, ys, p), u, v, w)
    y1 = ys[0]
    P1 = np.eye(n + 1, dtype=np.int64)
    P1[1:n, 1:n] = elem.qflat.matrix()
    P1[n, n] = w
    P3 = np.eye(n + 1, dtype=np.int64)
    P3[n, n - 1] = v * pow(w, -1, p) % p
    P2 = np.eye(n + 1, dtype=np.int64)
    P2[1, n] = u * pow(y1, -1, p) % p
    return elem, P1 @ P3 @ P2 % p


def solve_combination_matrix(f: Sequence[Poly], g: Sequence[Poly], p: int) -> np.ndarray | None:
    """G with (g_1..g_k) = (f_1..f_k) G, or None when some g_j is outside span(f)."""
    cols = []
    for gj in g:
        c = solve_combination(gj, f)
        if c is None:
            return None
        cols.append(c)
    return np.array(cols, dtype=np.int64).T % p


def equiv_J_n1_1(A: StripeForm, B: StripeForm) -> Witness | None:
    _same_shape(A, B, ("J_n1_1",))
    res = _equiv_n1_core(A.fs, B.fs, A.n, A.p)
    if res is None:
        return None
    elem, P = res
    _check_conj(build_stripe(A), build_stripe(B), P)
    return Witness(elem, P)


def equiv_J_1n_1(A: StripeForm, B: StripeForm) -> Witness | None:
    _same_shape(A, B, ("J_1n_1",))
    res = _equiv_n1_core(A.fs, B.fs, A.n, A.p)
    if res is None:
        return None
    elem, Pp = res
    # tau(P'^{-1} X P') = tau(P') tau(X) tau(P')^{-1}
    tP = PolyMatrix.const(A.p, Pp).other_transpose().const_part()
    P = linalg.inv(tP, A.p)
    _check_conj(build_stripe(A), build_stripe(B), P)
    return Witness(elem, P)


# ---------------------------------------------------------------- corner blocks

@dataclass(frozen=True)
class ABlock:
    i1: int
    i2: int
    i3: int
    alpha: tuple  # i1 rows of i3 Poly

    def __post_init__(self):
        alpha = tuple(tuple(r) for r in self.alpha)
        object.__setattr__(self, "alpha", alpha)
        if self.i1 < 1 or self.i3 < 1 or self.i2 < 0:
            raise ShapeError("need i1, i3 >= 1 and i2 >= 0")
        if len(alpha) != self.i1 or any(len(r) != self.i3 for r in alpha):
            raise ShapeError("alpha has the wrong shape")

    @property
    def p(self) -> int:
        return self.alpha[0][0].p

    @property
    def n(self) -> int:
        return self.i1 + self.i2 + self.i3

    def matrix(self) -> PolyMatrix:
        return build_ablock(self)

    def stack(self) -> np.ndarray:
        """alpha as a coefficient stack of shape (D, i1, i3)."""
        return PolyMatrix.from_entries(self.p, self.alpha).coeffs


def build_ablock(a: ABlock) -> PolyMatrix:
    p, n = a.p, a.n
    grid = [[Poly.zero(p) for _ in range(n)] for _ in range(n)]
    for i in range(n):
        grid[i][i] = Poly.const(p, 1)
    for i in range(a.i1):
        for j in range(a.i3):
            grid[i][a.i1 + a.i2 + j] = a.alpha[i][j]
    return PolyMatrix.from_entries(p, grid)


def ablock_from_matrix(A: PolyMatrix, i1: int, i2: int, i3: int) -> ABlock:
    n = A.n
    if i1 + i2 + i3 != n:
        raise ShapeError("block sizes do not add up")
    if A != build_ablock(ABlock(i1, i2, i3, [[A.entry(i, i1 + i2 + j) for j in range(i3)]
                                                for i in range(i1)])):
        raise ShapeError("matrix is not a corner block of that shape")
    return ABlock(i1, i2, i3, [[A.entry(i, i1 + i2 + j) for j in range(i3)] for i in range(i1)])


def _rows_flat(stack: np.ndarray) -> np.ndarray:
    D, r, c = stack.shape
    return stack.transpose(1, 0, 2).reshape(r, D * c)


def rank_pair(alpha, p: int | None = None) -> tuple[int, int]:
    """(row rank, column rank) over F_p of a polynomial matrix."""
    if isinstance(alpha, ABlock):
        stack, p = alpha.stack(), alpha.p
    elif isinstance(alpha, PolyMatrix):
        stack, p = alpha.coeffs, alpha.p
    else:
        rows = [list(r) for r in alpha]
        p = rows[0][0].p
        stack = PolyMatrix.from_entries(p, rows).coeffs
    return (linalg.rank(_rows_flat(stack), p),
            linalg.rank(_rows_flat(stack.transpose(0, 2, 1)), p))


def gl_order(n: int, p: int) -> int:
    out = 1
    for i in range(n):
        out *= p**n - p**i
    return out


@lru_cache(maxsize=None)
def _gl_list(n: int, p: int) -> tuple:
    from .oracle import enumerate_gl
    return tuple(enumerate_gl(n, p))


def equiv_ablock(A: ABlock, B: ABlock, gate: int = ABLOCK_GATE) -> Witness | None:
    """(Q, R) with beta = Q alpha R, enumerating the smaller GL factor."""
    if (A.i1, A.i2, A.i3) != (B.i1, B.i2, B.i3) or A.p != B.p:
        return None
    p = A.p
    for blk in (A, B):
        if rank_pair(blk) != (blk.i1, blk.i3):
            raise RankDeficientError("corner block is not of full rank; shrink it first")
    if gl_order(A.i1, p) * gl_order(A.i3, p) > gate:
        raise ResourceError("corner-block search exceeds the size gate")
    a, b = A.stack(), B.stack()
    D = max(a.shape[0], b.shape[0])
    a = np.concatenate([a, np.zeros((D - a.shape[0],) + a.shape[1:], dtype=np.int64)])
    b = np.concatenate([b, np.zeros((D - b.shape[0],) + b.shape[1:], dtype=np.int64)])
    found = None
    if gl_order(A.i1, p) <= gl_order(A.i3, p):
        for Q in _gl_list(A.i1, p):
            Qa = np.einsum("ij,djk->dik", Q, a) % p
            R = linalg.solve(Qa.reshape(-1, A.i3), b.reshape(-1, A.i3), p)
            if R is not None and linalg.is_invertible(R, p):
                found = (np.array(Q), R)
                break
    else:
        for R in _gl_list(A.i3, p):
            aR = np.einsum("dij,jk->dik", a, R) % p
            # Q aR = b  <=>  aR^t Q^t = b^t
            Qt = linalg.solve(aR.transpose(0, 2, 1).reshape(-1, A.i1),
                              b.transpose(0, 2, 1).reshape(-1, A.i1), p)
            if Qt is not None and linalg.is_invertible(Qt.T, p):
                found = (Qt.T % p, np.array(R))
                break
    if found is None:
        return None
    Q, R = found
    n = A.n
    P = np.eye(n, dtype=np.int64)
    P[: A.i1, : A.i1] = linalg.inv(Q, p)
    P[n - A.i3:, n - A.i3:] = R
    _check_conj(A.matrix(), B.matrix(), P)
    return Witness((Q, R), P)


def _left_reducer(M: np.ndarray, p: int) -> tuple[np.ndarray, int]:
    """Invertible E with E M in row echelon form (zero rows last) and the rank."""
    r = M.shape[0]
    aug = np.concatenate([M % p, np.eye(r, dtype=np.int64)], axis=1)
    R, piv = rref(aug, p)
    rk = sum(1 for c in piv if c < M.shape[1])
    return R[:, M.shape[1]:], rk


def rref(a, p):
    return linalg.rref(a, p)


def shrink_ablock(A: ABlock) -> tuple[ABlock | None, np.ndarray]:
    """Conjugate to a full-rank corner block; None marks the identity."""
    p, n = A.p, A.n
    stack = A.stack()
    Q, i = _left_reducer(_rows_flat(stack), p)
    s1 = np.einsum("ij,djk->dik", Q, stack) % p
    E, j = _left_reducer(_rows_flat(s1.transpose(0, 2, 1)), p)
    R = E.T % p
    s2 = np.einsum("dij,jk->dik", s1, R) % p
    if i == 0:
        return None, np.eye(n, dtype=np.int64)
    P0 = np.eye(n, dtype=np.int64)
    P0[: A.i1, : A.i1] = linalg.inv(Q, p)
    P0[n - A.i3:, n - A.i3:] = R
    # new order: kept rows of block 1, dropped rows of block 1, middle,
    # dropped columns of block 3, kept columns of block 3
    c3 = A.i1 + A.i2
    order = (list(range(i)) + list(range(i, A.i1)) + list(range(A.i1, c3))
             + list(range(c3 + j, n)) + list(range(c3, c3 + j)))
    Pi = np.zeros((n, n), dtype=np.int64)
    for new, old in enumerate(order):
        Pi[old, new] = 1
    P = P0 @ Pi % p
    core = PolyMatrix(p, s2[:, :i, :j]).entries()
    out = ABlock(i, n - i - j, j, core)
    _check_conj(A.matrix(), out.matrix(), P)
    return out, P
