"""Canonical classes of 4x4 exponential matrices and a classifier returning
a class label together with a constant conjugator."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import InvariantError, ShapeError
from .expcore import require_exponential
from .heisenberg import HeisCoords, eta, eta_inv, heis_decompose
from .poly import Poly, coeff_matrix, is_p_polynomial, lin_indep, random_ppoly, span_rank
from .polymat import PolyMatrix

# class kinds in listing order for each regime
REGIMES = {
    "p2": ("row", "A22", "column", "H"),
    "p3": ("J31", "J13", "row", "A22", "column", "H"),
    "p5plus": ("J4", "J31", "J13", "row", "A22", "column", "H"),
}

_PARAMS = {"J4": "abc", "J31": "abc", "J13": "abc", "row": "abc",
           "A22": "abcd", "column": "abc", "H": "abc"}

_CONDITIONS = {
    "J4": ["a, b, c are p-polynomials", "a != 0"],
    "J31": ["a, b, c are p-polynomials", "a != 0"],
    "J13": ["a, b, c are p-polynomials", "a != 0"],
    "row": ["a, b, c are p-polynomials"],
    "A22": ["a, b, c, d are p-polynomials"],
    "column": ["a, b, c are p-polynomials"],
    "H": ["a, b, c are p-polynomials", "a, b linearly independent"],
}

_GENERIC = {
    "J4": "a != 0",
    "J31": "a != 0",
    "J13": "a, c linearly independent",
    "row": "(a, b, c) != 0",
    "A22": "((a, b), (c, d)) has rank 2 on both sides across all degrees",
    "column": "a, b, c span a space of dimension >= 2",
    "H": "none beyond the conditions",
}


def regime(p: int) -> str:
    return "p2" if p == 2 else "p3" if p == 3 else "p5plus"


@dataclass
class ClassLabel4:
    p: int
    index: int
    params: dict = field(default_factory=dict)
    consts: dict = field(default_factory=dict)

    @property
    def regime(self) -> str:
        return regime(self.p)

    @property
    def kind(self) -> str:
        kinds = REGIMES[self.regime]
        if not 1 <= self.index <= len(kinds):
            raise InvariantError(f"index {self.index} out of range for {self.regime}")
        return kinds[self.index - 1]

    def to_json(self) -> dict:
        return {"regime": self.regime, "index": self.index, "kind": self.kind,
                "params": {k: v.to_json() for k, v in sorted(self.params.items())},
                "consts": dict(sorted(self.consts.items()))}


def class_index(p: int, kind: str) -> int:
    return REGIMES[regime(p)].index(kind) + 1


def make_label(p: int, kind: str, consts: dict | None = None, **params) -> ClassLabel4:
    return ClassLabel4(p, class_index(p, kind), params, consts or {})


def _check_label(L: ClassLabel4) -> None:
    kind, p = L.kind, L.p
    names = _PARAMS[kind]
    if set(L.params) != set(names):
        raise InvariantError(f"{kind} needs parameters {', '.join(names)}")
    for f in L.params.values():
        if f.p != p or not is_p_polynomial(f):
            raise InvariantError("parameters must be p-polynomials over F_p")
    a = L.params["a"]
    if kind in ("J4", "J31", "J13") and a.is_zero():
        raise InvariantError("a must be nonzero")
    if kind == "H":
        if not lin_indep([a, L.params["b"]]):
            raise InvariantError("a, b must be linearly independent")
        if p == 2:
            if set(L.consts) != {"mu"} or L.consts["mu"] % 2 == 0:
                raise InvariantError("the p = 2 Heisenberg class needs mu != 0")
        else:
            if set(L.consts) != {"lam", "mu", "nu"}:
                raise InvariantError("the Heisenberg class needs lam, mu, nu")
            lam, mu, nu = (L.consts[k] for k in ("lam", "mu", "nu"))
            if (lam * nu - mu * mu) % p == 0:
                raise InvariantError("lam nu - mu^2 must be nonzero")
    elif L.consts:
        raise InvariantError(f"{kind} takes no constants")


def canonical_template(L: ClassLabel4) -> PolyMatrix:
    _check_label(L)
    p, kind = L.p, L.kind
    pr = L.params
    a, b, c = pr["a"], pr["b"], pr["c"]
    one, zero = Poly.const(p, 1), Poly.zero(p)
    if kind in ("J4", "J31"):
        half = pow(2, -1, p)
        q = a * a * half + b
        if kind == "J4":
            cube = a * a * a * pow(6, -1, p) + a * b + c
            grid = [[one, a, q, cube], [zero, one, a, q], [zero, zero, one, a], [zero, zero, zero, one]]
        else:
            grid = [[one, a, q, c], [zero, one, a, zero], [zero, zero, one, zero], [zero, zero, zero, one]]
    elif kind == "J13":
        q = a * a * pow(2, -1, p) + b
        grid = [[one, zero, zero, c], [zero, one, a, q], [zero, zero, one, a], [zero, zero, zero, one]]
    elif kind == "row":
        grid = [[one, a, b, c], [zero, one, zero, zero], [zero, zero, one, zero], [zero, zero, zero, one]]
    elif kind == "A22":
        grid = [[one, zero, a, b], [zero, one, c, pr["d"]], [zero, zero, one, zero], [zero, zero, zero, one]]
    elif kind == "column":
        grid = [[one, zero, zero, a], [zero, one, zero, b], [zero, zero, one, c], [zero, zero, zero, one]]
    else:
        if p == 2:
            mu = L.consts["mu"] % 2
            return eta(HeisCoords(2, [a, b], [b * mu, a * mu], a * b * mu + c))
        lam, mu, nu = (L.consts[k] % p for k in ("lam", "mu", "nu"))
        h = pow(2, -1, p)
        z = a * a * (lam * h) + a * b * mu + b * b * (nu * h) + c
        return eta(HeisCoords(2, [a, b], [a * lam + b * mu, a * mu + b * nu], z))
    return PolyMatrix.from_entries(p, grid)


def enumerate_classes(p: int) -> list[dict]:
    out = []
    for i, kind in enumerate(REGIMES[regime(p)], 1):
        conds = list(_CONDITIONS[kind])
        consts: list[str] = []
        if kind == "H":
            if p == 2:
                consts = ["mu"]
                conds.append("mu != 0")
            else:
                consts = ["lam", "mu", "nu"]
                conds.append("lam nu - mu^2 != 0")
        out.append({"regime": regime(p), "index": i, "kind": kind,
                    "params": list(_PARAMS[kind]), "consts": consts, "conditions": conds,
                    "generic": _GENERIC[kind]})
    return out


def is_generic(L: ClassLabel4) -> bool:
    """Whether the parameters avoid the degenerate loci where one family meets another.

    The families overlap (a rank-one A22 block is a row class, J13 with c = 0 is
    J31 with c = 0, ...); generic parameters are classified back to their own index."""
    p, kind, pr = L.p, L.kind, L.params
    if kind in ("J4", "J31"):
        return not pr["a"].is_zero()
    if kind == "J13":
        return lin_indep([pr["a"], pr["c"]])
    if kind == "row":
        return span_rank([pr["a"], pr["b"], pr["c"]], p) >= 1
    if kind == "column":
        return span_rank([pr["a"], pr["b"], pr["c"]], p) >= 2
    if kind == "A22":
        C = coeff_matrix([pr[k] for k in "abcd"])
        rows = np.concatenate([C[[0, 1]].T, C[[2, 3]].T])
        cols = np.concatenate([C[[0, 2]].T, C[[1, 3]].T])
        return linalg.rank(rows, p) == 2 and linalg.rank(cols, p) == 2
    return True


def random_label(rng, p: int, index: int, max_e: int = 2, generic: bool = True) -> ClassLabel4:
    kind = REGIMES[regime(p)][index - 1]
    while True:
        params = {k: random_ppoly(rng, p, max_e) for k in _PARAMS[kind]}
        consts = {}
        if kind == "H":
            if p == 2:
                consts = {"mu": 1}
            else:
                consts = {k: int(rng.integers(0, p)) for k in ("lam", "mu", "nu")}
        L = ClassLabel4(p, index, params, consts)
        try:
            _check_label(L)
        except InvariantError:
            continue
        if generic and not is_generic(L):
            continue
        return L


# ---------------------------------------------------------------- classifier

def _layers(A: PolyMatrix) -> list[np.ndarray]:
    return [A.layer(d) for d in A.nonzero_degrees() if d > 0]


def _span_cols(mats: list[np.ndarray], n: int, p: int) -> np.ndarray:
    """Basis (as columns) of the span of all columns of the given matrices."""
    if not mats:
        return np.zeros((n, 0), dtype=np.int64)
    rb = linalg.row_basis(np.concatenate(mats, axis=1).T, p)
    return rb.T.reshape(n, -1)


def _common_kernel(mats: list[np.ndarray], n: int, p: int) -> np.ndarray:
    if not mats:
        return np.eye(n, dtype=np.int64)
    return linalg.nullspace(np.concatenate(mats, axis=0), p)


def _adapted_basis(inner: np.ndarray, outer: np.ndarray, n: int, p: int) -> np.ndarray:
    """Columns: basis of inner, then of outer beyond inner, then of F_p^n beyond outer."""
    from .heisenberg import extend_within
    cols = extend_within(inner, outer, p)
    return linalg.extend_basis(cols, n, p)


def _finish(A: PolyMatrix, L: ClassLabel4, P: np.ndarray):
    P = np.asarray(P, dtype=np.int64) % A.p
    if A.conj(P) != canonical_template(L):
        raise InvariantError("classifier produced an invalid conjugator")
    return L, P


def _classify_square_zero(A: PolyMatrix, Ns: list[np.ndarray]):
    p = A.p
    U = _span_cols(Ns, 4, p)
    K = _common_kernel(Ns, 4, p)
    u, k = U.shape[1], K.shape[1]
    zero = Poly.zero(p)
    if u == 0:
        return _finish(A, make_label(p, "column", a=zero, b=zero, c=zero), np.eye(4, dtype=np.int64))
    P = _adapted_basis(U, K, 4, p)
    B = A.conj(P)
    i3 = 4 - k
    if u == 1:
        row = [B.entry(0, j) for j in (1, 2, 3)]
        L = make_label(p, "row", a=row[0], b=row[1], c=row[2])
    elif i3 == 1:
        col = [B.entry(i, 3) for i in (0, 1, 2)]
        L = make_label(p, "column", a=col[0], b=col[1], c=col[2])
    else:
        L = make_label(p, "A22", a=B.entry(0, 2), b=B.entry(0, 3), c=B.entry(1, 2), d=B.entry(1, 3))
    return _finish(A, L, P)


def _nonzero_triple(Ns: list[np.ndarray], p: int) -> bool:
    for X in Ns:
        for Y in Ns:
            XY = X @ Y % p
            if XY.any() and any((XY @ Z % p).any() for Z in Ns):
                return True
    return False


def _classify_cyclic(A: PolyMatrix, Ns: list[np.ndarray]):
    """Some product of three layers is nonzero: all layers are polynomials in one shift."""
    p = A.p
    if p < 5:
        raise InvariantError("a 4-step chain cannot occur for p < 5")
    from .expcore import factor_frobenius
    parts = [N for _, N in factor_frobenius(A).frob_parts]
    cands = list(parts) + [(X + c * Y) % p for X in parts for Y in parts for c in range(1, p)]
    N = next((X for X in cands if (X @ X % p @ X % p).any()), None)
    if N is None:
        raise InvariantError("no cyclic generator found among the Frobenius parts")
    N3 = N @ N % p @ N % p
    v = np.zeros(4, dtype=np.int64)
    v[int(np.nonzero(N3.any(axis=0))[0][0])] = 1
    cols = [v]
    for _ in range(3):
        cols.append(N @ cols[-1] % p)
    P = np.array(cols[::-1]).T % p
    B = A.conj(P)
    a = B.entry(0, 1)
    half = pow(2, -1, p)
    b = B.entry(0, 2) - a * a * half
    c = B.entry(0, 3) - a * a * a * pow(6, -1, p) - a * b
    return _finish(A, make_label(p, "J4", a=a, b=b, c=c), P)


def _classify_heisenberg(A: PolyMatrix, Ns: list[np.ndarray]):
    p = A.p
    prods = [X @ Y % p for X in Ns for Y in Ns]
    Lsp = _span_cols(prods, 4, p)
    H = _common_kernel(prods, 4, p)
    if Lsp.shape[1] != 1 or H.shape[1] != 3:
        raise InvariantError("products of layers do not have rank-one image")
    P0 = _adapted_basis(Lsp, H, 4, p)
    B = A.conj(P0)
    eta_inv(B)
    dec = heis_decompose(B)
    if dec.data is None:
        raise InvariantError("nonzero pairing expected")
    d = dec.data
    pr = d.profile
    P1 = P0 @ dec.P % p
    s = int(d.S[0, 0]) if pr.r1 >= 1 else 0
    zero = Poly.zero(p)
    if (pr.ell, pr.r1) == (2, 2):
        a, b = d.a1
        if p == 2:
            consts = {"mu": int(d.S[0, 1])}
        else:
            consts = {"lam": int(d.S[0, 0]), "mu": int(d.S[0, 1]), "nu": int(d.S[1, 1])}
        return _finish(A, make_label(p, "H", consts, a=a, b=b, c=d.alpha), P1)
    si = pow(s, -1, p)
    if pr.r2 == 0:
        # heis order (0, 1, 3, 2) with the third basis vector scaled by 1/s
        Q = np.zeros((4, 4), dtype=np.int64)
        Q[0, 0], Q[1, 1], Q[3, 2], Q[2, 3] = 1, 1, si, 1
        c = d.a2[0] if pr.ell == 2 else zero
        L = make_label(p, "J31", a=d.a1[0], b=d.alpha * si, c=c)
    else:
        Q = np.zeros((4, 4), dtype=np.int64)
        Q[2, 0], Q[0, 1], Q[1, 2], Q[3, 3] = si, 1, 1, si
        L = make_label(p, "J13", a=d.a1[0], b=d.alpha * si, c=d.alpha2[0])
    return _finish(A, L, P1 @ Q % p)


def classify4(A: PolyMatrix) -> tuple[ClassLabel4, np.ndarray]:
    """Label and constant P with A.conj(P) == canonical_template(label)."""
    if A.shape != (4, 4):
        raise ShapeError("classify4 needs a 4x4 matrix")
    require_exponential(A)
    p = A.p
    Ns = _layers(A)
    if all(not (X @ Y % p).any() for X in Ns for Y in Ns):
        return _classify_square_zero(A, Ns)
    if _nonzero_triple(Ns, p):
        return _classify_cyclic(A, Ns)
    return _classify_heisenberg(A, Ns)


def same_class(A: PolyMatrix, B: PolyMatrix) -> bool:
    """Whether two 4x4 exponential matrices land in the same class index."""
    return classify4(A)[0].index == classify4(B)[0].index
