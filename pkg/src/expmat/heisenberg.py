"""Heisenberg matrices eta(x, y, z): coordinates, the exponentiality test,
symmetric-matrix extraction, the daleth classes, the correction term Delta
and the star action deciding equivalence of exponential elements."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .errors import (DependentError, InvariantError, MembershipError,
                     NotDalethError, NotHeisenbergError, NotSymmetricError,
                     ShapeError)
from .poly import (Poly, coeff_matrix, combine, is_p_polynomial, is_symmetric,
                   lin_indep, pairing_bipoly, shift_sub, solve_combination,
                   span_rank)
from .polymat import PolyMatrix
from .stripes import ABlock, Witness, equiv_ablock, shrink_ablock


# ---------------------------------------------------------------- coordinates

@dataclass(frozen=True)
class HeisCoords:
    m: int
    xs: tuple
    ys: tuple
    z: Poly

    def __post_init__(self):
        object.__setattr__(self, "xs", tuple(self.xs))
        object.__setattr__(self, "ys", tuple(self.ys))
        if self.m < 1 or len(self.xs) != self.m or len(self.ys) != self.m:
            raise ShapeError("need m >= 1 and m entries in x and y")

    @property
    def p(self) -> int:
        return self.z.p


def eta(h: HeisCoords) -> PolyMatrix:
    p, m = h.p, h.m
    n = m + 2
    grid = [[Poly.const(p, int(i == j)) for j in range(n)] for i in range(n)]
    for i in range(m):
        grid[0][1 + i] = h.xs[i]
        grid[1 + i][n - 1] = h.ys[i]
    grid[0][n - 1] = h.z
    return PolyMatrix.from_entries(p, grid)


def eta_inv(A: PolyMatrix) -> HeisCoords:
    r, c = A.shape
    if r != c or r < 3:
        raise NotHeisenbergError("Heisenberg matrices are square of size >= 3")
    n, p = r, A.p
    m = n - 2
    h = HeisCoords(m, [A.entry(0, 1 + i) for i in range(m)],
                   [A.entry(1 + i, n - 1) for i in range(m)], A.entry(0, n - 1))
    if eta(h) != A:
        raise NotHeisenbergError("matrix is not of Heisenberg shape")
    return h


def heis_is_exponential(h: HeisCoords) -> bool:
    if not all(is_p_polynomial(f) for f in h.xs + h.ys):
        return False
    return shift_sub(h.z) == pairing_bipoly(h.xs, h.ys)


def heis_invariants(h: HeisCoords) -> tuple[int, int, int]:
    """(l, r, t): ranks of span{x}, span{y} and of all 2m+1 entries."""
    p = h.p
    return (span_rank(list(h.xs), p), span_rank(list(h.ys), p),
            span_rank(list(h.xs) + list(h.ys) + [h.z], p))


def predicted_fixed_dims(m: int, ell: int, r: int, t: int) -> tuple[int, int]:
    """Predicted (right, left) fixed-space dimensions of eta(x, y, z)."""
    if ell == 0 and r == 0:
        return m - t + 2, m - t + 2
    if ell == 0:
        return m + 1, m - t + 2
    if r == 0:
        return m - t + 2, m + 1
    return m - ell + 1, m - r + 1


# ---------------------------------------------------------------- helpers

def _cols(fs: Sequence[Poly], D: int | None = None) -> np.ndarray:
    """Coefficient matrix with one column per polynomial."""
    return coeff_matrix(list(fs), D).T


def _vec_mul(fs: Sequence[Poly], M, p: int) -> list[Poly]:
    """Row vector of polynomials times a constant matrix."""
    M = np.asarray(M, dtype=np.int64) % p
    if M.shape[1] == 0:
        return []
    if not fs:
        return [Poly.zero(p)] * M.shape[1]
    X = _cols(fs, max(f.deg + 1 for f in fs) or 1)
    Y = X @ M % p
    return [Poly(p, tuple(int(v) for v in Y[:, k])) for k in range(Y.shape[1])]


def _transport(fs: Sequence[Poly], gs: Sequence[Poly], p: int) -> np.ndarray | None:
    """The matrix g with gs = fs g, assuming fs independent; None if none exists."""
    if not fs:
        return np.zeros((0, len(gs)), dtype=np.int64) if all(g.is_zero() for g in gs) else None
    if not gs:
        return np.zeros((len(fs), 0), dtype=np.int64)
    D = max([f.deg + 1 for f in fs] + [g.deg + 1 for g in gs] + [1])
    return linalg.solve(_cols(fs, D), _cols(gs, D), p)


def _col_reducer(fs: Sequence[Poly], p: int) -> tuple[np.ndarray, int]:
    """Invertible M with fs M = (independent part, zeros), and the rank."""
    n = len(fs)
    X = _cols(fs, max([f.deg + 1 for f in fs] + [1]))
    aug = np.concatenate([X.T % p, np.eye(n, dtype=np.int64)], axis=1)
    R, piv = linalg.rref(aug, p)
    rk = sum(1 for c in piv if c < X.shape[0])
    return R[:, X.shape[0]:].T % p, rk


def _inv_t(M, p: int) -> np.ndarray:
    return linalg.inv(M, p).T % p


def _conj_coords(h: HeisCoords, M) -> HeisCoords:
    """Coordinates after conjugating by diag(1, M, 1)."""
    p = h.p
    return HeisCoords(h.m, _vec_mul(h.xs, M, p), _vec_mul(h.ys, _inv_t(M, p), p), h.z)


def _embed(M, m: int) -> np.ndarray:
    P = np.eye(m + 2, dtype=np.int64)
    P[1:m + 1, 1:m + 1] = M
    return P


# ---------------------------------------------------------------- symmetric extraction

def _check_pair(a: Sequence[Poly], b: Sequence[Poly]) -> int:
    if len(a) != len(b):
        raise ShapeError("a and b must have the same length")
    if not a:
        return 0
    if not is_symmetric(pairing_bipoly(a, b)):
        raise NotSymmetricError("sum a_i(T) b_i(T') is not symmetric")
    if not lin_indep(list(a)):
        raise DependentError("a_1..a_n are linearly dependent")
    return a[0].p


def extract_symmetric(a: Sequence[Poly], b: Sequence[Poly]) -> np.ndarray:
    """The symmetric S with b = a S, by one linear solve over the entries s_ij, i <= j."""
    p = _check_pair(a, b)
    n = len(a)
    if n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    D = max([f.deg + 1 for f in list(a) + list(b)] + [1])
    A, B = _cols(a, D), _cols(b, D)
    idx = {}
    for i in range(n):
        for j in range(i, n):
            idx[(i, j)] = len(idx)
    rows, rhs = [], []
    for k in range(n):
        for d in range(D):
            row = np.zeros(len(idx), dtype=np.int64)
            for i in range(n):
                row[idx[(min(i, k), max(i, k))]] += A[d, i]
            rows.append(row % p)
            rhs.append(B[d, k])
    sol = linalg.solve(np.array(rows), np.array(rhs), p)
    if sol is None:
        raise InvariantError("no symmetric solution although the pairing is symmetric")
    S = np.zeros((n, n), dtype=np.int64)
    for (i, j), c in idx.items():
        S[i, j] = S[j, i] = sol[c]
    return S


def _swap_perm(n: int, i: int, j: int) -> np.ndarray:
    P = np.eye(n, dtype=np.int64)
    P[[i, j]] = P[[j, i]]
    return P


def _order_reduce(a: list[Poly], b: list[Poly], p: int) -> np.ndarray:
    n = len(a)
    if n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if not lin_indep(b):
        # drop a dependent b_i, folding its partner a_i into the others
        i = next(k for k in reversed(range(n))
                 if solve_combination(b[k], b[:k] + b[k + 1:]) is not None)
        Pi = _swap_perm(n, i, n - 1)
        a2 = [a[k] for k in Pi.argmax(axis=1)]
        b2 = [b[k] for k in Pi.argmax(axis=1)]
        c = solve_combination(b2[-1], b2[:-1])
        A = [a2[k] + a2[-1] * int(c[k]) for k in range(n - 1)]
        S = _order_reduce(A, b2[:-1], p)
        Sc = S @ c % p
        Sp = np.zeros((n, n), dtype=np.int64)
        Sp[:-1, :-1] = S
        Sp[:-1, -1] = Sc
        Sp[-1, :-1] = Sc
        Sp[-1, -1] = int(c @ Sc) % p
        return Pi @ Sp @ Pi % p
    orders = [(f.ord(), 0, k) for k, f in enumerate(a)] + [(f.ord(), 1, k) for k, f in enumerate(b)]
    _, side, k = min(orders)
    if side == 1:
        # b is independent and holds the lowest order: solve a = b S' instead
        return linalg.inv(_order_reduce(b, a, p), p)
    Pi = _swap_perm(n, 0, k)
    a2 = [a[j] for j in Pi.argmax(axis=1)]
    b2 = [b[j] for j in Pi.argmax(axis=1)]
    d = a2[0].ord()
    lead = pow(a2[0].coeff(d), -1, p)
    lam = np.array([f.coeff(d) * lead % p for f in a2[1:]], dtype=np.int64)
    mu = np.array([f.coeff(d) * lead % p for f in b2], dtype=np.int64)
    A = [a2[j] - a2[0] * int(lam[j - 1]) for j in range(1, n)]
    B = [b2[j] - a2[0] * int(mu[j]) for j in range(1, n)]
    S = _order_reduce(A, B, p)
    v = (mu[1:] - S @ lam) % p
    St = np.zeros((n, n), dtype=np.int64)
    St[1:, 1:] = S
    St[0, 1:] = v
    St[1:, 0] = v
    St[0, 0] = (mu[0] - lam @ v) % p
    return Pi @ St @ Pi % p


def extract_symmetric_recursive(a: Sequence[Poly], b: Sequence[Poly]) -> np.ndarray:
    """Same result as extract_symmetric, via recursive reduction on orders."""
    p = _check_pair(a, b)
    if not a:
        return np.zeros((0, 0), dtype=np.int64)
    S = _order_reduce(list(a), list(b), p)
    if _vec_mul(a, S, p) != list(b) or np.any((S - S.T) % p):
        raise InvariantError("order reduction did not reproduce b")
    return S


# ---------------------------------------------------------------- exponential data

@dataclass(frozen=True)
class HeisProfile:
    m: int
    ell: int
    r1: int
    r2: int

    def __post_init__(self):
        if not (1 <= self.ell <= self.m and 1 <= self.r1 <= self.ell
                and 0 <= self.r2 <= self.m - self.ell):
            raise InvariantError(f"{(self.ell, self.r1, self.r2)} is not in Omega_{self.m}")


def _quad(S: np.ndarray, a1: Sequence[Poly], p: int) -> Poly:
    """sum_{i<j} s_ij a_i a_j at p = 2, (1/2) a S a^t otherwise."""
    out = Poly.zero(p)
    r = len(a1)
    if p == 2:
        for i in range(r):
            for j in range(i + 1, r):
                if S[i, j] % 2:
                    out = out + a1[i] * a1[j]
        return out
    half = pow(2, -1, p)
    for i in range(r):
        for j in range(r):
            if S[i, j] % p:
                out = out + a1[i] * a1[j] * (int(S[i, j]) * half)
    return out


@dataclass
class HeisExpData:
    """A point (S, a1, a2, alpha2, alpha) parametrizing an exponential
    element of the given profile. strict=False drops the frame
    independence conditions."""
    profile: HeisProfile
    S: np.ndarray
    a1: tuple
    a2: tuple
    alpha2: tuple
    alpha: Poly
    strict: bool = True

    def __post_init__(self):
        pr = self.profile
        p = self.alpha.p
        self.S = np.asarray(self.S, dtype=np.int64) % p
        self.a1, self.a2, self.alpha2 = tuple(self.a1), tuple(self.a2), tuple(self.alpha2)
        if self.S.shape != (pr.r1, pr.r1):
            raise ShapeError("S must be r1 x r1")
        if len(self.a1) != pr.r1 or len(self.a2) != pr.ell - pr.r1 or len(self.alpha2) != pr.r2:
            raise ShapeError("frame lengths do not match the profile")
        if np.any((self.S - self.S.T) % p) or not linalg.is_invertible(self.S, p):
            raise InvariantError("S must be symmetric and invertible")
        if p == 2 and np.any(np.diag(self.S) % 2):
            raise InvariantError("S must have zero diagonal in characteristic 2")
        if not all(is_p_polynomial(f) for f in self.a1 + self.a2 + self.alpha2 + (self.alpha,)):
            raise InvariantError("entries must be p-polynomials")
        if self.strict:
            if not lin_indep(list(self.a1 + self.a2)) or not lin_indep(list(self.a1 + self.alpha2)):
                raise InvariantError("frames (a1, a2) and (a1, alpha2) must be independent")

    @property
    def p(self) -> int:
        return self.alpha.p

    def alpha1(self) -> list[Poly]:
        return _vec_mul(self.a1, self.S, self.p)

    def phi(self) -> Poly:
        return self.alpha + _quad(self.S, self.a1, self.p)

    def same(self, other: "HeisExpData") -> bool:
        return (self.profile == other.profile and np.array_equal(self.S, other.S)
                and self.a1 == other.a1 and self.a2 == other.a2
                and self.alpha2 == other.alpha2 and self.alpha == other.alpha)

    def to_json(self) -> dict:
        pr = self.profile
        return {"profile": [pr.ell, pr.r1, pr.r2], "m": pr.m, "S": self.S.tolist(),
                "a1": [f.to_json() for f in self.a1], "a2": [f.to_json() for f in self.a2],
                "alpha2": [f.to_json() for f in self.alpha2], "alpha": self.alpha.to_json()}


def heis_coords(d: HeisExpData) -> HeisCoords:
    pr, p = d.profile, d.p
    zero = Poly.zero(p)
    xs = list(d.a1) + list(d.a2) + [zero] * (pr.m - pr.ell)
    ys = d.alpha1() + [zero] * (pr.ell - pr.r1) + list(d.alpha2) + [zero] * (pr.m - pr.ell - pr.r2)
    return HeisCoords(pr.m, xs, ys, d.phi())


def heis_build(d: HeisExpData) -> PolyMatrix:
    return eta(heis_coords(d))


# ---------------------------------------------------------------- daleth classes

DALETH_LABELS = ("I", "II", "III", "IV", "V", "VI", "VII")


@dataclass
class DalethClass:
    """Normal form of a daleth element. block is the corner block (None for I);
    P conjugates the classified matrix to the normal form."""
    label: str
    m: int
    p: int
    params: dict
    block: ABlock | None
    P: np.ndarray | None = None

    def matrix(self) -> PolyMatrix:
        if self.block is None:
            return PolyMatrix.identity(self.p, self.m + 2)
        return self.block.matrix()

    def key(self) -> tuple:
        return (self.label, self.m, self.p, tuple(sorted(self.params.items())))

    def to_json(self) -> dict:
        out = {"label": self.label, "m": self.m, "params": self.params}
        if self.block is not None:
            b = self.block
            out["block"] = {"shape": [b.i1, b.i2, b.i3],
                            "alpha": [[f.to_json() for f in row] for row in b.alpha]}
        return out


def _L_block(xs: Sequence[Poly], ys: Sequence[Poly], z: Poly, m: int) -> ABlock:
    """Lambda(j+1, m-i-j, i+1; L(x | y | z)) with i = len(xs), j = len(ys)."""
    p = z.p
    i, j = len(xs), len(ys)
    rows = [list(xs) + [z]] + [[Poly.zero(p)] * i + [y] for y in ys]
    return ABlock(j + 1, m - i - j, i + 1, rows)


def _window(h: HeisCoords) -> tuple[np.ndarray, int, int]:
    """M with x M supported on the last s slots and y M^{-t} on the first t."""
    p, m = h.p, h.m
    Cx = linalg.row_basis(_rowvecs(h.xs, m), p)
    Cy = linalg.row_basis(_rowvecs(h.ys, m), p)
    s, t = len(Cx), len(Cy)
    perp = linalg.nullspace(Cx, p) if s else np.eye(m, dtype=np.int64)
    cols = extend_within(Cy.T if t else np.zeros((m, 0), dtype=np.int64), perp, p)
    G = linalg.extend_basis(cols, m, p)
    return G, s, t


def _rowvecs(fs: Sequence[Poly], m: int) -> np.ndarray:
    """Coefficient vectors of the vector of polynomials fs, one row per degree."""
    D = max([f.deg + 1 for f in fs] + [1])
    return _cols(fs, D)


def extend_within(cols: np.ndarray, space: np.ndarray, p: int) -> np.ndarray:
    """Extend independent columns lying in span(space) to a basis of span(space)."""
    cur = cols.copy()
    for k in range(space.shape[1]):
        trial = np.concatenate([cur, space[:, k:k + 1]], axis=1)
        if linalg.rank(trial.T, p) > (linalg.rank(cur.T, p) if cur.shape[1] else 0):
            cur = trial
    return cur


def classify_daleth(A: PolyMatrix) -> DalethClass:
    try:
        h = eta_inv(A)
    except NotHeisenbergError as e:
        raise NotDalethError(str(e)) from None
    if not pairing_bipoly(h.xs, h.ys).is_zero():
        raise NotDalethError("x and y coefficient spaces are not orthogonal")
    p, m = h.p, h.m
    G, s, t = _window(h)
    hw = _conj_coords(h, G)
    P = _embed(G, m)
    if s == 0 and t == 0:
        if h.z.is_zero():
            return DalethClass("I", m, p, {}, None, P)
        return DalethClass("II", m, p, {"j": 1}, ABlock(1, m, 1, [[h.z]]), P)
    if t == 0:
        core, P2 = shrink_ablock(ABlock(1, 0, m + 1, [list(hw.xs) + [hw.z]]))
        return DalethClass("II", m, p, {"j": core.i3}, core, P @ P2 % p)
    if s == 0:
        core, P2 = shrink_ablock(ABlock(m + 1, 0, 1, [[hw.z]] + [[y] for y in hw.ys]))
        if core.i1 == 1:
            return DalethClass("II", m, p, {"j": 1}, core, P @ P2 % p)
        return DalethClass("III", m, p, {"i": core.i1}, core, P @ P2 % p)
    xs, ys, z = list(hw.xs[m - s:]), list(hw.ys[:t]), hw.z
    if s + t >= 3:
        return DalethClass("VI", m, p, {"i": s, "j": t}, _L_block(xs, ys, z, m), P)
    c, d = xs[0], ys[0]
    if lin_indep([c, d, z]):
        return DalethClass("V", m, p, {}, _L_block(xs, ys, z, m), P)
    if lin_indep([c, d]):
        lam, mu = (int(v) for v in solve_combination(z, [c, d]))
        Q = np.array([[1, -mu], [0, 1]]) % p
        R = np.array([[1, -lam], [0, 1]]) % p
    else:
        lam = solve_combination(z, [c])
        if lam is None:
            return DalethClass("VII", m, p, {}, _L_block(xs, ys, z, m), P)
        Q = np.eye(2, dtype=np.int64)
        R = np.array([[1, -int(lam[0])], [0, 1]]) % p
    blk = _L_block(xs, ys, Poly.zero(p), m)
    P2 = np.eye(m + 2, dtype=np.int64)
    P2[:2, :2] = linalg.inv(Q, p)
    P2[m:, m:] = R
    out = DalethClass("IV", m, p, {}, blk, P @ P2 % p)
    if A.conj(out.P) != out.matrix():
        raise InvariantError("corner elimination failed")
    return out


def _lam_P(n: int, i1: int, i3: int, Q, R, p: int) -> np.ndarray:
    P = np.eye(n, dtype=np.int64)
    P[:i1, :i1] = linalg.inv(Q, p)
    P[n - i3:, n - i3:] = R
    return P % p


def equiv_daleth(A: DalethClass, B: DalethClass) -> Witness | None:
    """Witness P with A.matrix().conj(P) == B.matrix(), or None."""
    if A.key() != B.key():
        return None
    p, n = A.p, A.m + 2
    if A.label == "I":
        return Witness(None, np.eye(n, dtype=np.int64))
    a, b = A.block, B.block
    if (a.i1, a.i2, a.i3) != (b.i1, b.i2, b.i3):
        return None
    P = None
    element = None
    if A.label == "II":
        Q = _transport(list(a.alpha[0]), list(b.alpha[0]), p)
        if Q is not None and linalg.is_invertible(Q, p):
            P, element = _lam_P(n, 1, a.i3, [[1]], Q, p), Q
    elif A.label == "III":
        Qt = _transport([r[0] for r in a.alpha], [r[0] for r in b.alpha], p)
        if Qt is not None and linalg.is_invertible(Qt, p):
            P, element = _lam_P(n, a.i1, 1, Qt.T, [[1]], p), Qt.T % p
    elif A.label == "IV":
        a1, a2 = a.alpha[0][0], a.alpha[1][1]
        b1, b2 = b.alpha[0][0], b.alpha[1][1]
        g11 = solve_combination(b1, [a1])
        g22 = solve_combination(b2, [a2])
        if g11 is not None and g22 is not None and g11[0] and g22[0]:
            element = np.diag([int(g11[0]), int(g22[0])])
            P = _lam_P(n, 2, 2, np.diag([1, int(g22[0])]), np.diag([int(g11[0]), 1]), p)
        else:
            g21 = solve_combination(b1, [a2])
            g12 = solve_combination(b2, [a1])
            if g21 is not None and g12 is not None and g21[0] and g12[0]:
                element = np.array([[0, int(g12[0])], [int(g21[0]), 0]])
                P = _lam_P(n, 2, 2, [[0, 1], [1, 0]], element.T, p)
    elif A.label in ("V", "VI"):
        res = _v_group_solve(a, b, p)
        if res is not None:
            element, Q, R = res
            P = _lam_P(n, a.i1, a.i3, Q, R, p)
    elif A.label == "VII":
        w = equiv_ablock(a, b)
        if w is not None:
            return w
    if P is None:
        return None
    if A.matrix().conj(P) != B.matrix():
        raise InvariantError("daleth decider produced an invalid conjugator")
    return Witness(element, P)


def _v_group_solve(a: ABlock, b: ABlock, p: int):
    """g = [[g11, 0, g13], [0, g22, g23], [0, 0, g33]] with (bx, by, b) = (ax, ay, a) g."""
    i, j = a.i3 - 1, a.i1 - 1
    ax, ay, az = list(a.alpha[0][:i]), [r[i] for r in a.alpha[1:]], a.alpha[0][i]
    bx, by, bz = list(b.alpha[0][:i]), [r[i] for r in b.alpha[1:]], b.alpha[0][i]
    g11 = _transport(ax, bx, p)
    g22 = _transport(ay, by, p)
    if g11 is None or g22 is None or not linalg.is_invertible(g11, p) or not linalg.is_invertible(g22, p):
        return None
    frame = ax + ay + [az]
    D = max([f.deg + 1 for f in frame + [bz]] + [1])
    M = _cols(frame, D)
    u = linalg.solve(M, bz.vector(D), p)
    if u is None:
        return None
    if u[-1] % p == 0:
        N = linalg.nullspace(M, p)
        k = next((c for c in range(N.shape[1]) if N[-1, c] % p), None)
        if k is None:
            return None
        u = (u + N[:, k]) % p
    g13, g23, g33 = u[:i], u[i:i + j], int(u[-1])
    g = np.zeros((i + j + 1, i + j + 1), dtype=np.int64)
    g[:i, :i], g[i:i + j, i:i + j] = g11, g22
    g[:i, -1], g[i:i + j, -1], g[-1, -1] = g13, g23, g33
    c = pow(g33, -1, p)
    Q = np.zeros((j + 1, j + 1), dtype=np.int64)
    Q[0, 0] = 1
    Q[0, 1:] = g23 * c % p
    Q[1:, 1:] = g22.T * c % p
    R = np.zeros((i + 1, i + 1), dtype=np.int64)
    R[:i, :i], R[:i, i], R[i, i] = g11, g13, g33
    return g, Q, R


def equiv_daleth_matrices(A: PolyMatrix, B: PolyMatrix) -> np.ndarray | None:
    """Conjugator P with A.conj(P) == B for two daleth matrices, or None."""
    ca, cb = classify_daleth(A), classify_daleth(B)
    w = equiv_daleth(ca, cb)
    if w is None:
        return None
    p = A.p
    P = ca.P @ w.P % p @ linalg.inv(cb.P, p) % p
    if A.conj(P) != B:
        raise InvariantError("composed daleth conjugator is invalid")
    return P


# ---------------------------------------------------------------- decomposition

@dataclass
class HeisDecomposition:
    """Either exponential data or a daleth class, plus P with A.conj(P) in normal form."""
    data: HeisExpData | None
    daleth: DalethClass | None
    P: np.ndarray

    @property
    def kind(self) -> str:
        return "heis" if self.data is not None else "daleth"

    def normal_form(self) -> PolyMatrix:
        return heis_build(self.data) if self.data is not None else self.daleth.matrix()


def heis_decompose(A: PolyMatrix) -> HeisDecomposition:
    from .errors import NotExponentialError
    h = eta_inv(A)
    if not heis_is_exponential(h):
        raise NotExponentialError("Heisenberg matrix is not exponential")
    p, m = h.p, h.m
    if pairing_bipoly(h.xs, h.ys).is_zero():
        d = classify_daleth(A)
        return HeisDecomposition(None, d, d.P)
    # x -> (a, 0)
    M0, ell = _col_reducer(h.xs, p)
    h1 = _conj_coords(h, M0)
    a, yh = list(h1.xs[:ell]), list(h1.ys[:ell])
    S0 = extract_symmetric(a, yh)
    K = linalg.nullspace(S0, p)
    B = linalg.extend_basis(K, ell, p)
    B = np.concatenate([B[:, K.shape[1]:], B[:, :K.shape[1]]], axis=1)
    r1 = ell - K.shape[1]
    S = B[:, :r1].T @ S0 @ B[:, :r1] % p
    M1 = np.eye(m, dtype=np.int64)
    M1[:ell, :ell] = _inv_t(B, p)
    h2 = _conj_coords(h1, M1)
    # tail of y reduced modulo alpha1, then echelon
    alpha1 = list(h2.ys[:r1])
    tail = list(h2.ys[ell:])
    k = m - ell
    E = np.eye(k, dtype=np.int64)
    F = np.zeros((r1, k), dtype=np.int64)
    chosen: list[int] = []
    for j in range(k):
        c = solve_combination(tail[j], alpha1 + [tail[q] for q in chosen])
        if c is None:
            chosen.append(j)
            continue
        ca, cc = c[:r1], c[r1:]
        tail[j] = tail[j] - combine(ca, alpha1, p) - combine(cc, [tail[q] for q in chosen], p)
        for q, cq in zip(chosen, cc):
            E[:, j] = (E[:, j] - cq * E[:, q]) % p
            F[:, j] = (F[:, j] + cq * F[:, q]) % p
        F[:, j] = (F[:, j] + ca) % p
    order = chosen + [j for j in range(k) if j not in chosen]
    E, F = E[:, order], F[:, order]
    N = np.eye(m, dtype=np.int64)
    N[:r1, ell:] = -F % p
    N[ell:, ell:] = E
    M2 = _inv_t(N, p)
    M = M0 @ M1 % p @ M2 % p
    h3 = _conj_coords(h, M)
    r2 = len(chosen)
    prof = HeisProfile(m, ell, r1, r2)
    a1, a2 = list(h3.xs[:r1]), list(h3.xs[r1:ell])
    alpha2 = list(h3.ys[ell:ell + r2])
    data = HeisExpData(prof, S, a1, a2, alpha2, h3.z - _quad(S, a1, p))
    P = _embed(M, m)
    if A.conj(P) != heis_build(data):
        raise InvariantError("normal-position reduction failed")
    return HeisDecomposition(data, None, P)


# ---------------------------------------------------------------- Delta

def seq_pairs(n: int) -> list[tuple[int, int]]:
    """(l, u) with l < u, ordered by u then l (0-based)."""
    return [(l, u) for u in range(n) for l in range(u)]


def delta(a: Sequence[Poly], Q, Sigma) -> Poly:
    """Tr(diag(a) Q Sigma_+ Q^t diag(a)), Sigma_+ the strictly upper part; 0 for p >= 3."""
    if not a:
        raise ShapeError("a must be nonempty")
    p = a[0].p
    Q = np.asarray(Q, dtype=np.int64) % p
    Sg = np.asarray(Sigma, dtype=np.int64) % p
    if Q.shape[0] != len(a) or Sg.shape != (Q.shape[1], Q.shape[1]):
        raise ShapeError("shapes of a, Q and Sigma do not agree")
    if p != 2:
        return Poly.zero(p)
    W = Q @ np.triu(Sg, 1) @ Q.T % 2
    return combine(np.diag(W), [f * f for f in a], 2)


def circ(Q) -> np.ndarray:
    """Rows i, columns seq pairs (l, u): q_il q_iu."""
    Q = np.asarray(Q, dtype=np.int64)
    pairs = seq_pairs(Q.shape[1])
    out = np.zeros((Q.shape[0], len(pairs)), dtype=np.int64)
    for c, (l, u) in enumerate(pairs):
        out[:, c] = Q[:, l] * Q[:, u]
    return out


def join(R) -> np.ndarray:
    """Rows seq pairs (i, j) of rows, columns seq pairs (l, u): r_il r_ju + r_iu r_jl."""
    R = np.asarray(R, dtype=np.int64)
    rp, cp = seq_pairs(R.shape[0]), seq_pairs(R.shape[1])
    out = np.zeros((len(rp), len(cp)), dtype=np.int64)
    for r, (i, j) in enumerate(rp):
        for c, (l, u) in enumerate(cp):
            out[r, c] = R[i, l] * R[j, u] + R[i, u] * R[j, l]
    return out


def square(Q) -> np.ndarray:
    Q = np.asarray(Q, dtype=np.int64)
    return Q * Q


def sigma_seq(Sigma) -> np.ndarray:
    Sg = np.asarray(Sigma, dtype=np.int64)
    return np.array([Sg[l, u] for l, u in seq_pairs(Sg.shape[0])], dtype=np.int64)


def delta_closed(a: Sequence[Poly], Q, Sigma) -> Poly:
    """Delta as (a_i^2) . circ(Q) . sigma_seq(Sigma)."""
    p = a[0].p
    if p != 2:
        return Poly.zero(p)
    v = circ(np.asarray(Q) % 2) @ sigma_seq(np.asarray(Sigma) % 2) % 2
    return combine(v, [f * f for f in a], 2)


# ---------------------------------------------------------------- the group and the star action

BLOCKS = ("g11", "g22", "g23", "g24", "g25", "g33", "g35", "g44", "g45", "g55")


@dataclass
class GElement:
    """Block upper-triangular element acting on HeisExpData of a fixed profile."""
    profile: HeisProfile
    p: int
    blocks: dict = field(default_factory=dict)

    def __post_init__(self):
        pr, p = self.profile, self.p
        r1, r3, r2 = pr.r1, pr.ell - pr.r1, pr.r2
        shapes = {"g11": (r1, r1), "g22": (r1, r1), "g23": (r1, r3), "g24": (r1, r2),
                  "g25": (r1, 1), "g33": (r3, r3), "g35": (r3, 1), "g44": (r2, r2),
                  "g45": (r2, 1), "g55": (1, 1)}
        for k, sh in shapes.items():
            v = np.asarray(self.blocks.get(k, np.zeros(sh)), dtype=np.int64) % p
            self.blocks[k] = v.reshape(sh)

    def __getitem__(self, k: str) -> np.ndarray:
        return self.blocks[k]

    @property
    def g55(self) -> int:
        return int(self.blocks["g55"][0, 0])

    def sizes(self) -> list[int]:
        pr = self.profile
        return [pr.r1, pr.r1, pr.ell - pr.r1, pr.r2, 1]

    def matrix(self) -> np.ndarray:
        sz = self.sizes()
        off = np.cumsum([0] + sz)
        G = np.zeros((off[-1], off[-1]), dtype=np.int64)
        for k, v in self.blocks.items():
            i, j = int(k[1]) - 1, int(k[2]) - 1
            G[off[i]:off[i + 1], off[j]:off[j + 1]] = v
        return G

    @classmethod
    def from_matrix(cls, profile: HeisProfile, p: int, G) -> "GElement":
        tmp = cls(profile, p)
        off = np.cumsum([0] + tmp.sizes())
        G = np.asarray(G, dtype=np.int64) % p
        blocks = {k: G[off[int(k[1]) - 1]:off[int(k[1])], off[int(k[2]) - 1]:off[int(k[2])]]
                  for k in BLOCKS}
        g = cls(profile, p, blocks)
        if not np.array_equal(g.matrix(), G):
            raise MembershipError("matrix has entries outside the block pattern")
        return g

    @classmethod
    def identity(cls, profile: HeisProfile, p: int) -> "GElement":
        pr = profile
        r3 = pr.ell - pr.r1
        return cls(profile, p, {"g11": np.eye(pr.r1), "g22": np.eye(pr.r1), "g33": np.eye(r3),
                                "g44": np.eye(pr.r2), "g55": [[1]]})

    def __mul__(self, other: "GElement") -> "GElement":
        if self.profile != other.profile:
            raise ShapeError("group elements of different profiles")
        return GElement.from_matrix(self.profile, self.p, self.matrix() @ other.matrix() % self.p)


def is_member(g: GElement) -> bool:
    p = g.p
    for k in ("g11", "g22", "g33", "g44"):
        if g[k].size and not linalg.is_invertible(g[k], p):
            return False
    c = g.g55
    if c == 0:
        return False
    return np.array_equal(g["g11"] @ g["g22"].T % p, c * np.eye(g.profile.r1, dtype=np.int64) % p)


def require_member(g: GElement) -> None:
    if not is_member(g):
        raise MembershipError("element is not in the acting group")


def star_action(x: HeisExpData, g: GElement) -> HeisExpData:
    require_member(g)
    if g.profile != x.profile or g.p != x.p:
        raise MembershipError("group element does not match the profile")
    p = x.p
    Sp = linalg.inv(g["g22"], p) @ x.S @ g["g11"] % p
    b1 = _vec_mul(x.a1, g["g22"], p)
    b2 = [u + v for u, v in zip(_vec_mul(x.a1, g["g23"], p), _vec_mul(x.a2, g["g33"], p))]
    beta2 = [u + v for u, v in zip(_vec_mul(x.a1, g["g24"], p), _vec_mul(x.alpha2, g["g44"], p))]
    beta = (_vec_mul(x.a1, g["g25"], p)[0] + _vec_mul(x.a2, g["g35"], p)[0]
            + _vec_mul(x.alpha2, g["g45"], p)[0] + x.alpha * g.g55
            - delta(x.a1, g["g22"], Sp))
    return HeisExpData(x.profile, Sp, b1, b2, beta2, beta, strict=x.strict)


def star_conjugator(x: HeisExpData, g: GElement) -> np.ndarray:
    """Constant P with heis_build(x).conj(P) == heis_build(x * g)."""
    y = star_action(x, g)
    pr, p = x.profile, x.p
    m, ell, r1, r2 = pr.m, pr.ell, pr.r1, pr.r2
    r3 = ell - r1
    t = g.g55
    M = np.zeros((m, m), dtype=np.int64)
    M[:r1, :r1], M[:r1, r1:ell] = g["g22"], g["g23"]
    M[r1:ell, r1:ell] = g["g33"]
    if r2:
        M33 = (t * linalg.inv(g["g44"], p)).T % p
        M31t = -linalg.inv(g["g11"], p) @ linalg.inv(x.S, p) @ g["g24"] @ M33.T % p
        M[ell:ell + r2, :r1] = M31t.T
        M[ell:ell + r2, ell:ell + r2] = M33
    M[ell + r2:, ell + r2:] = np.eye(m - ell - r2, dtype=np.int64)
    target = y.phi() - x.phi() * t
    frame = list(x.a1) + list(x.a2) + list(x.alpha2)
    c = solve_combination(target, frame)
    if c is None:
        raise InvariantError("corner equation has no solution")
    v = np.zeros(m, dtype=np.int64)
    v[:ell] = c[:ell]
    w = np.zeros(m, dtype=np.int64)
    w[ell:ell + r2] = -c[ell:] * pow(t, -1, p) % p
    r = w @ M % p
    P = np.zeros((m + 2, m + 2), dtype=np.int64)
    P[0, 0], P[0, 1:m + 1] = 1, r
    P[1:m + 1, 1:m + 1], P[1:m + 1, m + 1] = M, v
    P[m + 1, m + 1] = t
    if heis_build(x).conj(P) != heis_build(y):
        raise InvariantError("star conjugator failed to verify")
    return P % p


def equiv_heis(A: HeisExpData, B: HeisExpData) -> GElement | None:
    """g with B = A * g, found by solving for the blocks in turn; None if none exists."""
    if A.profile != B.profile or A.p != B.p:
        return None
    p, pr = A.p, A.profile
    g22 = _transport(A.a1, B.a1, p)
    if g22 is None or not linalg.is_invertible(g22, p):
        return None
    g11 = linalg.inv(A.S, p) @ g22 @ B.S % p
    C = g11 @ g22.T % p
    c = int(C[0, 0])
    if c == 0 or not np.array_equal(C, c * np.eye(pr.r1, dtype=np.int64)):
        return None
    blk = _transport(list(A.a1) + list(A.a2), B.a2, p)
    if blk is None:
        return None
    g23, g33 = blk[:pr.r1], blk[pr.r1:]
    if g33.size and not linalg.is_invertible(g33, p):
        return None
    blk = _transport(list(A.a1) + list(A.alpha2), B.alpha2, p)
    if blk is None:
        return None
    g24, g44 = blk[:pr.r1], blk[pr.r1:]
    if g44.size and not linalg.is_invertible(g44, p):
        return None
    rest = B.alpha - A.alpha * c + delta(A.a1, g22, B.S)
    u = solve_combination(rest, list(A.a1) + list(A.a2) + list(A.alpha2))
    if u is None:
        return None
    ell = pr.ell
    g = GElement(pr, p, {"g11": g11, "g22": g22, "g23": g23, "g24": g24, "g33": g33,
                         "g44": g44, "g55": [[c]], "g25": u[:pr.r1].reshape(-1, 1),
                         "g35": u[pr.r1:ell].reshape(-1, 1), "g45": u[ell:].reshape(-1, 1)})
    if not star_action(A, g).same(B):
        raise InvariantError("star-action decider produced an invalid element")
    return g


def equiv_heis_matrices(A: PolyMatrix, B: PolyMatrix) -> np.ndarray | None:
    """Conjugator between two exponential Heisenberg matrices, or None."""
    da, db = heis_decompose(A), heis_decompose(B)
    p = A.p
    if da.kind != db.kind:
        return None
    if da.kind == "daleth":
        w = equiv_daleth(da.daleth, db.daleth)
        if w is None:
            return None
        core = w.P
    else:
        g = equiv_heis(da.data, db.data)
        if g is None:
            return None
        core = star_conjugator(da.data, g)
    P = da.P @ core % p @ linalg.inv(db.P, p) % p
    if A.conj(P) != B:
        raise InvariantError("composed Heisenberg conjugator is invalid")
    return P


# ---------------------------------------------------------------- samplers

def random_symmetric(rng, r: int, p: int) -> np.ndarray:
    """Random invertible symmetric r x r matrix, zero diagonal at p = 2."""
    if p == 2 and r % 2:
        raise InvariantError("no invertible zero-diagonal symmetric matrix of odd size at p = 2")
    while True:
        U = np.triu(rng.integers(0, p, (r, r)), 1)
        D = np.zeros((r, r), dtype=np.int64) if p == 2 else np.diag(rng.integers(0, p, r))
        S = (U + U.T + D) % p
        if linalg.is_invertible(S, p):
            return S


def random_profile(rng, m: int, p: int) -> HeisProfile:
    while True:
        ell = int(rng.integers(1, m + 1))
        r1 = int(rng.integers(1, ell + 1))
        if p == 2 and r1 % 2:
            continue
        return HeisProfile(m, ell, r1, int(rng.integers(0, m - ell + 1)))


def random_heis_data(rng, profile: HeisProfile, p: int, max_e: int | None = None) -> HeisExpData:
    from .poly import random_ppoly
    pr = profile
    if max_e is None:
        max_e = pr.ell + pr.r2
    S = random_symmetric(rng, pr.r1, p)
    while True:
        fs = [random_ppoly(rng, p, max_e) for _ in range(pr.ell + pr.r2)]
        a1, a2, al2 = fs[:pr.r1], fs[pr.r1:pr.ell], fs[pr.ell:]
        if lin_indep(a1 + a2) and lin_indep(a1 + al2):
            break
    return HeisExpData(pr, S, a1, a2, al2, random_ppoly(rng, p, max_e))


def random_group_element(rng, profile: HeisProfile, p: int) -> GElement:
    from .oracle import _random_gl
    pr = profile
    r3 = pr.ell - pr.r1

    def gl(n):
        return _random_gl(n, p, rng) if n else np.zeros((0, 0), dtype=np.int64)

    g22 = gl(pr.r1)
    c = int(rng.integers(1, p))
    g11 = c * linalg.inv(g22, p).T % p
    rnd = lambda a, b: rng.integers(0, p, (a, b))
    return GElement(pr, p, {"g11": g11, "g22": g22, "g23": rnd(pr.r1, r3), "g24": rnd(pr.r1, pr.r2),
                            "g25": rnd(pr.r1, 1), "g33": gl(r3), "g35": rnd(r3, 1),
                            "g44": gl(pr.r2), "g45": rnd(pr.r2, 1), "g55": [[c]]})
