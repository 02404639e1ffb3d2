import numpy as np

from expmat.poly import Poly
from expmat.polymat import PolyMatrix


def T(p, d=1, c=1):
    """c T^d over F_p."""
    return Poly.monomial(p, d, c)


def M(p, grid):
    """PolyMatrix from a grid of ints and Polys."""
    return PolyMatrix.from_entries(p, grid)


def to_lists(A: PolyMatrix):
    return [[list(e.coeffs) for e in row] for row in A.entries()]


def to_dicts(A: PolyMatrix):
    return [[dict(e.terms()) for e in row] for row in A.entries()]


def random_gl(rng, n, p):
    from expmat import linalg
    while True:
        X = rng.integers(0, p, size=(n, n))
        if linalg.is_invertible(X, p):
            return X.astype(np.int64)


def random_exp(rng, n, p, r=None):
    """Exponential matrix from a random commuting nilpotent tuple."""
    from expmat.modrep import nil_to_exp
    from expmat.oracle import sample_nil_tuple
    r = int(rng.integers(1, 4)) if r is None else r
    return nil_to_exp(sample_nil_tuple(n, p, r, rng), p, n)


def known_pair(p):
    """blockdiag([[1,T],[0,1]], [[1,T^p],[0,1]]) and its conjugate by the swap of slots 2 and 3."""
    t, tp = T(p), T(p, p)
    A = M(p, [[1, t, 0, 0], [0, 1, 0, 0], [0, 0, 1, tp], [0, 0, 0, 1]])
    Pm = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.int64)
    return A, A.conj(Pm), Pm


def heis_conjugator(rng, m, p):
    """Random invertible P preserving the Heisenberg shape."""
    P = np.eye(m + 2, dtype=np.int64)
    P[1:m + 1, 1:m + 1] = random_gl(rng, m, p)
    P[0, 1:] = rng.integers(0, p, m + 1)
    P[1:m + 1, m + 1] = rng.integers(0, p, m)
    P[0, 0] = rng.integers(1, p)
    P[m + 1, m + 1] = rng.integers(1, p)
    return P


def random_daleth(rng, m, p, max_e=1):
    """Exponential Heisenberg matrix with orthogonal x and y coefficient spaces."""
    from expmat.heisenberg import HeisCoords, eta
    from expmat.poly import Poly, random_ppoly
    z = Poly.zero(p)
    s = int(rng.integers(0, m + 1))
    t = int(rng.integers(0, m - s + 1))
    xs = [z] * (m - s) + [random_ppoly(rng, p, max_e) for _ in range(s)]
    ys = [random_ppoly(rng, p, max_e) for _ in range(t)] + [z] * (m - t)
    A = eta(HeisCoords(m, xs, ys, random_ppoly(rng, p, max_e)))
    return A.conj(heis_conjugator(rng, m, p))
