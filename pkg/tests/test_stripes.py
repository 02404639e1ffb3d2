import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from expmat import linalg
from expmat.errors import InvariantError, RankDeficientError
from expmat.expcore import truncated_exp, verify_exponential
from expmat.oracle import brute_equiv
from expmat.poly import Poly, is_p_polynomial, p_part, random_ppoly
from expmat.polymat import PolyMatrix, is_upper_unipotent, nu, ordered_partition
from expmat.stripes import (ABlock, Qn1Element, QnElement, StripeForm, build_ablock,
                            build_stripe, equiv_ablock, equiv_J_n, equiv_J_n1_0, q_entries,
                            q_recursive, qn1_inv, qn1_membership, qn1_mul, qn_inv, qn_membership,
                            qn_mul, rank_pair, shrink_ablock, stripe_coeffs, stripe_form_of)

import naive
from helpers import M, T, random_gl


def test_build_stripe_examples():
    assert build_stripe(StripeForm(2, "J_n", [T(2)])) == M(2, [[1, T(2)], [0, 1]])
    A = build_stripe(StripeForm(3, "J_n1_1", [T(3), Poly.zero(3), T(3, 3)]))
    # 1/2 = 2 mod 3
    assert A == M(3, [[1, T(3), T(3, 2, 2), T(3, 3)], [0, 1, T(3), 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    assert verify_exponential(A)
    with pytest.raises(InvariantError):
        StripeForm(2, "J_n", [Poly.zero(3)])
    with pytest.raises(InvariantError):
        StripeForm(4, "J_n", [T(3)] * 3)
    with pytest.raises(InvariantError):
        StripeForm(2, "J_n1_1", [T(3), T(3, 1, 2)])


def test_stripe_coeff_examples():
    assert stripe_coeffs([T(5)], 3) == [Poly.const(5, 1), T(5), T(5, 2, 3)]
    assert stripe_coeffs([Poly.zero(5)] * 3, 4) == [Poly.const(5, 1)] + [Poly.zero(5)] * 3
    assert stripe_coeffs([T(3), T(3, 3)], 3)[2] == T(3, 2, 2) + T(3, 3)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_stripe_coeffs_vs_naive_exp(p):
    rng = np.random.default_rng(p)
    for _ in range(25):
        n = int(rng.integers(2, p + 1))
        fs = [random_ppoly(rng, p, 2) for _ in range(n - 1)]
        want = naive.stripe_coeffs([f.terms() for f in fs], n, p)
        assert [f.terms() for f in stripe_coeffs(fs, n)] == want


@pytest.mark.parametrize("p", [3, 5])
def test_p_monomial_part_of_stripe_is_f(p):
    rng = np.random.default_rng(p + 1)
    for _ in range(50):
        n = int(rng.integers(2, p + 1))
        fs = [random_ppoly(rng, p, 2) for _ in range(n - 1)]
        a = stripe_coeffs(fs, n)
        for ell in range(1, n):
            assert p_part(a[ell]) == fs[ell - 1]


def test_qn_examples():
    assert np.array_equal(QnElement(2, (3,), 5).matrix(), [[3]])
    assert np.array_equal(QnElement(3, (1, 1), 5).matrix(), [[1, 1], [0, 1]])
    q = QnElement(4, (2, 1, 3), 5)
    assert qn_mul(q, qn_inv(q)) == QnElement.identity(4, 5)
    with pytest.raises(InvariantError):
        QnElement(3, (0, 1), 5)
    assert qn_membership(np.array([[1, 1], [0, 2]]), 5) is None


def random_q(rng, n, p):
    return QnElement(n, (int(rng.integers(1, p)),) + tuple(int(x) for x in rng.integers(0, p, n - 2)), p)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([3, 5, 7]), st.integers(2, 7))
def test_q_closed_formula_matches_recursion(seed, p, n):
    rng = np.random.default_rng(seed)
    ys = random_q(rng, n, p).ys
    assert np.array_equal(q_entries(ys, p), q_recursive(ys, p))


def test_equiv_J_n_examples():
    p = 5
    f = StripeForm(3, "J_n", [T(p), Poly.zero(p)])
    g = StripeForm(3, "J_n", [T(p, 1, 2), Poly.zero(p)])
    assert equiv_J_n(f, f).element == QnElement.identity(3, p)
    w = equiv_J_n(f, g)
    assert w.element.ys == (2, 0)
    assert build_stripe(f).conj(w.P) == build_stripe(g)
    h = StripeForm(3, "J_n", [T(p), T(p, p)])
    assert equiv_J_n(f, h) is None


def test_equiv_J_n1_scaling_last():
    p = 5
    f = StripeForm(3, "J_n1_1", [T(p), T(p, 5), T(p, 25)])
    g = StripeForm(3, "J_n1_1", [T(p), T(p, 5), T(p, 25, 3)])
    from expmat.stripes import equiv_J_n1_1
    w = equiv_J_n1_1(f, g)
    assert w is not None and w.element.w == 3 and (w.element.u, w.element.v) == (0, 0)
    assert w.element.qflat == QnElement.identity(3, p)


def random_stripe(rng, n, p, kind, max_e=2):
    while True:
        want = n - 1 if kind == "J_n" else n
        fs = [random_ppoly(rng, p, max_e) for _ in range(want)]
        if kind == "J_n1_0":
            fs[-1] = Poly.zero(p)
        try:
            return StripeForm(n, kind, fs)
        except InvariantError:
            continue


@pytest.mark.parametrize("p", [3, 5])
def test_equiv_J_n_recovers_random_action(p):
    rng = np.random.default_rng(30 + p)
    for _ in range(40):
        n = int(rng.integers(2, p + 1))
        f = random_stripe(rng, n, p, "J_n")
        Pm = np.eye(n, dtype=np.int64)
        Pm[1:, 1:] = random_q(rng, n, p).matrix()
        B = build_stripe(f).conj(Pm)
        g = stripe_form_of(B)
        assert g is not None and g.kind == "J_n"
        w = equiv_J_n(f, g)
        assert w is not None and build_stripe(f).conj(w.P) == B


@pytest.mark.parametrize("p", [3, 5])
def test_stripe_conjugation_by_triangular_keeps_partition(p):
    rng = np.random.default_rng(40 + p)
    for _ in range(30):
        n = int(rng.integers(2, p + 1))
        A = build_stripe(random_stripe(rng, n, p, "J_n"))
        U = np.triu(rng.integers(0, p, (n, n)))
        np.fill_diagonal(U, rng.integers(1, p, n))
        B = A.conj(U)
        assert is_upper_unipotent(B) and ordered_partition(B) == [n]


@pytest.mark.parametrize("p", [3, 5])
def test_qn_group_laws(p):
    rng = np.random.default_rng(50 + p)
    for _ in range(200):
        n = int(rng.integers(2, 6))
        a, b = random_q(rng, n, p), random_q(rng, n, p)
        ab = qn_mul(a, b)
        assert np.array_equal(ab.matrix(), a.matrix() @ b.matrix() % p)
        ai = qn_inv(a)
        assert np.array_equal(ai.matrix() @ a.matrix() % p, np.eye(n - 1))


def random_q1(rng, n, p):
    return Qn1Element(random_q(rng, n, p), int(rng.integers(0, p)), int(rng.integers(0, p)),
                      int(rng.integers(1, p)))


@pytest.mark.parametrize("p", [3, 5])
def test_qn1_group_laws(p):
    rng = np.random.default_rng(60 + p)
    for _ in range(200):
        n = int(rng.integers(3, 6))
        a, b = random_q1(rng, n, p), random_q1(rng, n, p)
        ab = qn1_mul(a, b)
        assert np.array_equal(ab.matrix(), a.matrix() @ b.matrix() % p)
        assert qn1_membership(ab.matrix(), p) == ab
        ai = qn1_inv(a)
        assert np.array_equal(ai.matrix() @ a.matrix() % p, np.eye(n))


def test_rank_pair_examples():
    z = Poly.zero(3)
    assert rank_pair([[z, z], [z, z]]) == (0, 0)
    assert rank_pair([[T(3), T(3, 3)]]) == (1, 2)
    assert rank_pair([[T(3)], [T(3)]]) == (1, 1)


def test_equiv_ablock_examples():
    p = 5
    a = ABlock(2, 0, 2, [[T(p), T(p, 5)], [T(p, 25), Poly.zero(p)]])
    w = equiv_ablock(a, a)
    assert w is not None and a.matrix().conj(w.P) == a.matrix()
    b = ABlock(2, 0, 2, [[x * 2 for x in row] for row in a.alpha])
    Q, R = equiv_ablock(a, b).element
    sa, sb = a.stack(), b.stack()
    assert all(np.array_equal(Q @ sa[d] @ R % p, sb[d]) for d in range(sa.shape[0]))
    assert a.matrix().conj(equiv_ablock(a, b).P) == b.matrix()
    with pytest.raises(RankDeficientError):
        equiv_ablock(ABlock(2, 0, 1, [[T(p)], [T(p)]]), ABlock(2, 0, 1, [[T(p)], [T(p)]]))


def test_equiv_ablock_scalar_case_exhaustive():
    p = 2
    polys = [T(2), T(2, 2), T(2) + T(2, 2)]
    for f in polys:
        for g in polys:
            a, b = ABlock(1, 1, 1, [[f]]), ABlock(1, 1, 1, [[g]])
            assert (equiv_ablock(a, b) is not None) == (f == g)


def test_shrink_examples():
    p = 3
    a = ABlock(1, 1, 2, [[T(p), T(p, 3)]])
    b, Pm = shrink_ablock(a)
    assert b == a and np.array_equal(Pm, np.eye(4))
    b, Pm = shrink_ablock(ABlock(2, 0, 1, [[T(p)], [T(p)]]))
    assert (b.i1, b.i2, b.i3) == (1, 1, 1) and rank_pair(b) == (1, 1)
    assert ABlock(2, 0, 1, [[T(p)], [T(p)]]).matrix().conj(Pm) == b.matrix()
    assert b.alpha[0][0] in (T(p), T(p, 1, 2))
    z = shrink_ablock(ABlock(1, 0, 1, [[Poly.zero(p)]]))
    assert z[0] is None


def test_stripe_form_of_round_trip():
    rng = np.random.default_rng(3)
    for p in (3, 5, 7):
        for kind in ("J_n", "J_n1_0", "J_n1_1", "J_1n_1"):
            for _ in range(10):
                n = int(rng.integers(2, p + 1))
                sf = random_stripe(rng, n, p, kind)
                assert stripe_form_of(build_stripe(sf)) == sf
    assert stripe_form_of(PolyMatrix.identity(3, 3)) is None
