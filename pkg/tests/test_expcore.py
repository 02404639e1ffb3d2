import numpy as np
import pytest

from expmat.errors import NotExponentialError
from expmat.expcore import (exp_monomial, factor_frobenius, triangulate, truncated_exp,
                            verify_exponential)
from expmat.linalg import det
from expmat.poly import Poly
from expmat.polymat import PolyMatrix, is_upper_unipotent, nu
from expmat.classify4 import canonical_template, random_label

import naive
from helpers import M, T, known_pair, random_exp, random_gl, to_dicts

MODES = ("bivariate", "coefficientwise")


def test_truncated_exp_examples():
    assert truncated_exp(PolyMatrix.zero(5, 3)) == PolyMatrix.identity(5, 3)
    assert truncated_exp(PolyMatrix.const(2, nu(2, 2)).scale_poly(T(2))) == M(2, [[1, T(2)], [0, 1]])
    got = truncated_exp(PolyMatrix.const(5, nu(5, 3)).scale_poly(T(5)))
    # 1/2 = 3 mod 5
    assert got == M(5, [[1, T(5), T(5, 2, 3)], [0, 1, T(5)], [0, 0, 1]])


@pytest.mark.parametrize("mode", MODES)
def test_verify_examples(mode):
    assert verify_exponential(PolyMatrix.identity(3, 4), mode)
    assert not verify_exponential(M(3, [[1, T(3, 2)], [0, 1]]), mode)
    assert not verify_exponential(M(3, [[2, 0], [0, 1]]), mode)
    rng = np.random.default_rng(0)
    for idx in range(1, 5):
        assert verify_exponential(canonical_template(random_label(rng, 2, idx)), mode)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_modes_agree_and_match_naive(p):
    rng = np.random.default_rng(100 + p)
    for k in range(200):
        n = int(rng.integers(2, 5))
        A = random_exp(rng, n, p)
        if k % 2:
            # perturb one entry: usually not exponential any more
            c = A.coeffs.copy()
            c[int(rng.integers(0, c.shape[0])), 0, n - 1] += 1
            A = PolyMatrix(p, c)
        b, c = verify_exponential(A, "bivariate"), verify_exponential(A, "coefficientwise")
        assert b == c
        if k < 40:
            assert b == naive.is_exponential(to_dicts(A), p)
        if b:
            assert det(A.coeffs[0], p) == 1 and A * A.at_neg() == PolyMatrix.identity(p, n)
            w = factor_frobenius(A)
            assert w.reassemble() == A
            Ns = [N for _, N in w.frob_parts]
            for N in Ns:
                Np = np.eye(n, dtype=np.int64)
                for _ in range(p):
                    Np = Np @ N % p
                assert not Np.any()
                for N2 in Ns:
                    assert np.array_equal(N @ N2 % p, N2 @ N % p)


def test_factor_examples():
    w = factor_frobenius(M(2, [[1, T(2)], [0, 1]]))
    assert [(e, N.tolist()) for e, N in w.frob_parts] == [(0, [[0, 1], [0, 0]])]
    for p in (2, 3, 5):
        w = factor_frobenius(M(p, [[1, T(p) + T(p, p)], [0, 1]]))
        assert [(e, N.tolist()) for e, N in w.frob_parts] == [(0, [[0, 1], [0, 0]]), (1, [[0, 1], [0, 0]])]
    assert factor_frobenius(PolyMatrix.identity(3, 3)).frob_parts == []
    with pytest.raises(NotExponentialError):
        factor_frobenius(M(3, [[1, T(3, 2)], [0, 1]]))


def test_exp_monomial_matches_naive():
    N = np.array([[0, 1, 2], [0, 0, 1], [0, 0, 0]])
    for p in (3, 5):
        for e in (0, 1):
            got = exp_monomial(p, e, N)
            dictN = [[({p**e: int(x) % p} if x % p else {}) for x in row] for row in N]
            assert to_dicts(got) == naive.truncated_exp(dictN, p)


def test_triangulate_examples():
    U = M(3, [[1, T(3), T(3, 3)], [0, 1, 0], [0, 0, 1]])
    assert np.array_equal(triangulate(U), np.eye(3))
    for p in (2, 3):
        _, B, _ = known_pair(p)
        P = triangulate(B)
        assert is_upper_unipotent(B.conj(P))


@pytest.mark.parametrize("p", [2, 3, 5])
def test_triangulate_recovers(p):
    rng = np.random.default_rng(7 * p)
    from expmat.poly import is_p_polynomial
    for _ in range(40):
        n = int(rng.integers(2, 5))
        A = random_exp(rng, n, p).conj(random_gl(rng, n, p))
        U = A.conj(triangulate(A))
        assert is_upper_unipotent(U)
        assert all(is_p_polynomial(U.entry(i, i + 1)) for i in range(n - 1))
