"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line
and recording it for the terminal summary."""
import itertools

import numpy as np

from expmat import linalg
from expmat.classify4 import canonical_template, classify4, enumerate_classes, random_label
from expmat.errors import DependentError
from expmat.expcore import factor_frobenius, truncated_exp, verify_exponential
from expmat.heisenberg import (GElement, HeisExpData, HeisProfile, circ, classify_daleth, delta,
                               delta_closed, equiv_daleth, equiv_heis, eta, eta_inv,
                               extract_symmetric, heis_build, heis_invariants, join, predicted_fixed_dims,
                               random_group_element, random_heis_data, random_profile,
                               random_symmetric, square, star_action, HeisCoords, _vec_mul)
from expmat.modrep import Rep, exp_to_rep, rep_to_exp
from expmat.oracle import brute_equiv, enumerate_gl, sample_nil_tuple, simultaneous_conjugate
from expmat.poly import Poly, combine, lin_indep, random_ppoly
from expmat.polymat import PolyMatrix, fixed_space_dims, nu
from expmat.stripes import (ABlock, Qn1Element, QnElement, StripeForm, build_stripe, equiv_ablock,
                            equiv_J_1n_1, equiv_J_n, equiv_J_n1_0, equiv_J_n1_1, qn1_inv,
                            qn1_membership, qn1_mul, qn_inv, qn_membership, qn_mul, rank_pair,
                            stripe_coeffs, stripe_form_of)

import naive
from conftest import ACCEPTANCE
from helpers import T, heis_conjugator, random_daleth, random_gl, to_dicts


def record(k, ok, detail):
    ACCEPTANCE[k] = (bool(ok), detail)
    print(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def seeded(k):
    return np.random.default_rng(1000 + k)


def independent_ppolys(rng, p, k, max_e):
    while True:
        fs = [random_ppoly(rng, p, max_e) for _ in range(k)]
        if lin_indep(fs):
            return fs


# ---------------------------------------------------------------- 1

def test_criterion_01_templates_exponential():
    rng = seeded(1)
    bad, total, naive_checked = [], 0, 0
    for p, count in ((2, 4), (3, 6), (5, 7), (7, 7)):
        classes = enumerate_classes(p)
        assert len(classes) == count
        for c in classes:
            for trial in range(100):
                A = canonical_template(random_label(rng, p, c["index"], generic=False))
                total += 1
                if not (verify_exponential(A, "bivariate") and verify_exponential(A, "coefficientwise")):
                    bad.append((p, c["kind"]))
                if trial < 3:
                    naive_checked += 1
                    if not naive.is_exponential(to_dicts(A), p):
                        bad.append((p, c["kind"], "naive"))
    record(1, not bad, f"{total} templates in both modes, {naive_checked} by the dict oracle; failures {bad[:3]}")


# ---------------------------------------------------------------- 2

def test_criterion_02_p2_completeness():
    rng = seeded(2)
    bad, kinds = [], {}
    n_inst = 200
    for _ in range(n_inst):
        r = int(rng.integers(1, 4))
        A = rep_to_exp(Rep(2, 4, [np.eye(4, dtype=np.int64) + N for N in sample_nil_tuple(4, 2, r, rng)]))
        L, P = classify4(A)
        Tm = canonical_template(L)
        kinds[L.kind] = kinds.get(L.kind, 0) + 1
        if L.regime != "p2" or A.conj(P) != Tm or brute_equiv(A, Tm) is None:
            bad.append(A)
    record(2, not bad, f"{n_inst} tuples classified, kinds {dict(sorted(kinds.items()))}; {len(bad)} failures")


# ---------------------------------------------------------------- 3

def test_criterion_03_p2_separation():
    rng = seeded(3)
    reps = {i: [canonical_template(random_label(rng, 2, i, max_e=2)) for _ in range(3)]
            for i in range(1, 5)}
    pairs, bad = 0, []
    for i, j in itertools.combinations(range(1, 5), 2):
        for A in reps[i]:
            for B in reps[j]:
                pairs += 1
                if brute_equiv(A, B) is not None:
                    bad.append((i, j))
    record(3, not bad, f"{pairs} cross-class pairs scanned over GL(4,2); equivalent pairs {bad}")


# ---------------------------------------------------------------- 4

def test_criterion_04_extraction_roundtrip():
    rng = seeded(4)
    bad, trials = [], 0
    for p in (2, 3, 5):
        for _ in range(100):
            n = int(rng.integers(1, 5))
            a = independent_ppolys(rng, p, n, 4)
            S = random_symmetric(rng, n, p) if p != 2 else _sym_invertible_p2(rng, n)
            b = [combine(S[:, k], a, p) for k in range(n)]
            trials += 1
            if not np.array_equal(extract_symmetric(a, b), S):
                bad.append((p, n))
    p = 5
    z = Poly.zero(p)
    try:
        extract_symmetric([T(p), T(p, 2), z], [T(p), z, T(p, 3)])
        counter = False
    except DependentError as e:
        counter = e.kind == "dependent-a"
    record(4, not bad and counter,
           f"{trials} round trips, {len(bad)} mismatches; counterexample raises dependent-a: {counter}")


def _sym_invertible_p2(rng, n):
    while True:
        U = np.triu(rng.integers(0, 2, (n, n)))
        S = (U + np.triu(U, 1).T) % 2
        if linalg.is_invertible(S, 2):
            return S


# ---------------------------------------------------------------- 5

def test_criterion_05_stripe_formula():
    rng = seeded(5)
    bad, total = [], 0
    for p in (3, 5, 7):
        for n in range(2, p + 1):
            for trial in range(100):
                fs = [random_ppoly(rng, p, 2) for _ in range(n - 1)]
                got = stripe_coeffs(fs, n)
                N = PolyMatrix.zero(p, n, n)
                for i, f in enumerate(fs, start=1):
                    N = N + _poly_times(f, nu(p, n), i)
                E = truncated_exp(N)
                total += 1
                if [E.entry(0, j) for j in range(n)] != got:
                    bad.append((p, n))
                elif trial < 5:
                    ref = naive.stripe_coeffs([dict(f.terms()) for f in fs], n, p)
                    if [dict(g.terms()) for g in got] != ref:
                        bad.append((p, n, "naive"))
    record(5, not bad, f"{total} stripes match the truncated exponential; mismatches {bad[:3]}")


def _poly_times(f, v, i):
    p, n = f.p, v.shape[0]
    Vi = np.linalg.matrix_power(v, i) % p
    grid = [[f * int(Vi[r, c]) for c in range(n)] for r in range(n)]
    return PolyMatrix.from_entries(p, grid)


# ---------------------------------------------------------------- 6

def test_criterion_06_factorization():
    rng = seeded(6)
    bad = 0
    for k in range(200):
        p = (2, 3, 5)[k % 3]
        n = int(rng.integers(2, 6))
        A = rep_to_exp(Rep(p, n, [np.eye(n, dtype=np.int64) + N
                                  for N in sample_nil_tuple(n, p, int(rng.integers(1, 4)), rng)]))
        A = A.conj(random_gl(rng, n, p))
        w = factor_frobenius(A)
        Ns = [N for _, N in w.frob_parts]
        ok = w.reassemble() == A
        ok &= all(not _mpow(N, p, p).any() for N in Ns)
        ok &= all(np.array_equal(X @ Y % p, Y @ X % p) for X in Ns for Y in Ns)
        bad += not ok
    record(6, bad == 0, f"200 matrices reassembled exactly; {bad} failures")


def _mpow(N, k, p):
    out = np.eye(N.shape[0], dtype=np.int64)
    for _ in range(k):
        out = out @ N % p
    return out


# ---------------------------------------------------------------- 7

def test_criterion_07_delta_identities():
    rng = seeded(7)
    bad = []
    for _ in range(200):
        r = int(rng.integers(1, 5))
        a = [random_ppoly(rng, 2, 3) for _ in range(r)]
        Q, R = random_gl(rng, r, 2), random_gl(rng, r, 2)
        U = np.triu(rng.integers(0, 2, (r, r)), 1)
        Sg = U + U.T
        if delta(a, Q, Sg) != delta_closed(a, Q, Sg):
            bad.append("closed")
        lhs = delta(a, Q @ R % 2, Sg)
        rhs = delta(a, Q, R @ Sg @ R.T % 2) + delta(_vec_mul(a, Q, 2), R, Sg)
        if lhs != rhs:
            bad.append("cocycle")
        Qm, Rm = rng.integers(0, 2, (r, r)), rng.integers(0, 2, (r, r))
        if not np.array_equal(circ(Qm @ Rm % 2) % 2, (circ(Qm) @ join(Rm) + square(Qm) @ circ(Rm)) % 2):
            bad.append("circ")
    record(7, not bad, f"200 instances of cocycle, closed form and circ/join/square; failures {bad[:3]}")


# ---------------------------------------------------------------- 8

def _rand_q(rng, n, p):
    return QnElement(n, (int(rng.integers(1, p)),) + tuple(int(x) for x in rng.integers(0, p, n - 2)), p)


def test_criterion_08_group_laws():
    rng = seeded(8)
    bad = []
    for p in (3, 5):
        for _ in range(200):
            n = int(rng.integers(2, 6))
            a, b = _rand_q(rng, n, p), _rand_q(rng, n, p)
            ab = qn_mul(a, b)
            if not np.array_equal(ab.matrix(), a.matrix() @ b.matrix() % p) or \
                    qn_membership(ab.matrix(), p) != ab:
                bad.append(("Qn mul", p, n))
            if not np.array_equal(qn_inv(a).matrix() @ a.matrix() % p, np.eye(n - 1)):
                bad.append(("Qn inv", p, n))
            n1 = int(rng.integers(3, 6))
            c = Qn1Element(_rand_q(rng, n1, p), int(rng.integers(0, p)), int(rng.integers(0, p)),
                           int(rng.integers(1, p)))
            d = Qn1Element(_rand_q(rng, n1, p), int(rng.integers(0, p)), int(rng.integers(0, p)),
                           int(rng.integers(1, p)))
            cd = qn1_mul(c, d)
            if not np.array_equal(cd.matrix(), c.matrix() @ d.matrix() % p) or \
                    qn1_membership(cd.matrix(), p) != cd:
                bad.append(("Qn1 mul", p, n1))
            if not np.array_equal(qn1_inv(c).matrix() @ c.matrix() % p, np.eye(n1)):
                bad.append(("Qn1 inv", p, n1))
    triples = 0
    for k in range(200):
        p = (2, 3, 5)[k % 3]
        m = int(rng.integers(2, 4))
        pr = random_profile(rng, m, p)
        x = random_heis_data(rng, pr, p)
        g, h = random_group_element(rng, pr, p), random_group_element(rng, pr, p)
        triples += 1
        if not star_action(x, GElement.identity(pr, p)).same(x):
            bad.append(("star identity", p))
        if not star_action(star_action(x, g), h).same(star_action(x, g * h)):
            bad.append(("star composition", p))
    record(8, not bad, f"400 Q_[n] and 400 Q_[n,1] pairs, {triples} star triples; failures {bad[:3]}")


# ---------------------------------------------------------------- 9

def reachable_triples(m, p):
    """(l, r, t) realisable by exponential Heisenberg elements of size m + 2.

    Orthogonal x, y (window normal form): l + r <= m, with o shared directions
    and z zero, inside span{x, y}, or new. Otherwise a profile (ell, r1, r2)
    with o directions of alpha2 inside span(a2); z is then never additive."""
    out = {}
    for ell in range(m + 1):
        for r in range(m + 1 - ell):
            for o in range(min(ell, r) + 1):
                out[(ell, r, ell + r - o + 1)] = ("daleth", ell, r, o, "new")
                if ell + r:
                    out.setdefault((ell, r, ell + r - o), ("daleth", ell, r, o, "span"))
                else:
                    out.setdefault((0, 0, 0), ("daleth", 0, 0, 0, "zero"))
    for ell in range(1, m + 1):
        for r1 in range(1, ell + 1):
            if p == 2 and r1 % 2:
                continue
            for r2 in range(m - ell + 1):
                for o in range(min(r2, ell - r1) + 1):
                    out.setdefault((ell, r1 + r2, ell + r2 - o + 1), ("heis", ell, r1, r2, o))
    return out


def _combo_rows(rng, rows, basis, p):
    """rows random combinations of basis spanning all of it."""
    k = len(basis)
    if k == 0:
        return [Poly.zero(p)] * rows
    while True:
        C = rng.integers(0, p, (rows, k))
        if linalg.rank(C, p) == k:
            return [combine(C[i], basis, p) for i in range(rows)]


def heis_instance(rng, m, p, how):
    if how[0] == "daleth":
        _, ell, r, o, zk = how
        B = independent_ppolys(rng, p, ell + r - o + 1, ell + r - o + 1)
        X, Y = B[:ell], B[:o] + B[ell:ell + r - o]
        s = ell + int(rng.integers(0, m - ell - r + 1))
        tw = r + int(rng.integers(0, m - s - r + 1))
        xs = [Poly.zero(p)] * (m - s) + _combo_rows(rng, s, X, p)
        ys = _combo_rows(rng, tw, Y, p) + [Poly.zero(p)] * (m - tw)
        if zk == "new":
            z = B[-1]
        elif zk == "span":
            z = combine(rng.integers(0, p, len(X) + len(Y)), X + Y, p)
        else:
            z = Poly.zero(p)
        A = eta(HeisCoords(m, xs, ys, z))
    else:
        _, ell, r1, r2, o = how
        B = independent_ppolys(rng, p, ell + r2 - o, ell + r2 - o)
        a1, a2 = B[:r1], B[r1:ell]
        alpha2 = a2[:o] + B[ell:]
        S = random_symmetric(rng, r1, p)
        alpha = combine(rng.integers(0, p, len(B)), B, p)
        A = heis_build(HeisExpData(HeisProfile(m, ell, r1, r2), S, a1, a2, alpha2, alpha))
    return A.conj(heis_conjugator(rng, m, p))


def _fixed_dims_by_search(A):
    """Count fixed vectors directly over F_p^n, on both sides."""
    p, n = A.p, A.n
    layers = [A.layer(d) - (np.eye(n, dtype=np.int64) if d == 0 else 0) for d in range(A.coeffs.shape[0])]
    right = left = 0
    for v in itertools.product(range(p), repeat=n):
        v = np.array(v)
        right += all(not (L @ v % p).any() for L in layers)
        left += all(not (v @ L % p).any() for L in layers)
    return round(np.log(right) / np.log(p)), round(np.log(left) / np.log(p))


def test_criterion_09_fixed_space_table():
    rng = seeded(9)
    bad, cells, inst = [], 0, 0
    for m in (2, 3):
        for p in (2, 3):
            for triple, how in sorted(reachable_triples(m, p).items()):
                cells += 1
                for k in range(20):
                    A = heis_instance(rng, m, p, how)
                    inst += 1
                    got_inv = heis_invariants(eta_inv(A))
                    if got_inv != triple:
                        bad.append(("invariants", m, p, triple, got_inv))
                        continue
                    dims = fixed_space_dims(A)
                    if dims != predicted_fixed_dims(m, *triple):
                        bad.append(("table", m, p, triple, dims))
                    if k < 2 and _fixed_dims_by_search(A) != dims:
                        bad.append(("search", m, p, triple))
    record(9, not bad, f"{cells} (m, p, l, r, t) cells, {inst} instances; failures {bad[:3]}")


# ---------------------------------------------------------------- 10

def _random_rep(rng, p, n, r):
    return Rep(p, n, [np.eye(n, dtype=np.int64) + N for N in sample_nil_tuple(n, p, r, rng)])


def test_criterion_10_representation_bridge():
    rng = seeded(10)
    bad = []
    for k in range(200):
        p = (2, 3, 5)[k % 3]
        rep = _random_rep(rng, p, int(rng.integers(2, 5)), int(rng.integers(1, 4)))
        A = rep_to_exp(rep)
        back = exp_to_rep(A)
        if back != rep.trimmed() or rep_to_exp(back) != A:
            bad.append(("bijection", p))
    agree, equiv_count = 0, 0
    for k in range(50):
        n, r = int(rng.integers(2, 5)), int(rng.integers(1, 3))
        a = _random_rep(rng, 2, n, r)
        if k % 2:
            P = random_gl(rng, n, 2)
            b = Rep(2, n, [linalg.inv(P, 2) @ U @ P % 2 for U in a.gens])
        else:
            b = _random_rep(rng, 2, n, r)
        sim = simultaneous_conjugate(a.gens, b.gens, 2) is not None
        ex = brute_equiv(rep_to_exp(a), rep_to_exp(b)) is not None
        equiv_count += sim
        if sim != ex:
            bad.append(("conjugacy", n, r))
        else:
            agree += 1
    record(10, not bad, f"200 bijection round trips; {agree}/50 conjugacy pairs agree "
                        f"({equiv_count} conjugate); failures {bad[:3]}")


# ---------------------------------------------------------------- 11

def _partners(rng, A, count, accept):
    """Conjugates of A by random GL elements that accept() maps to a form."""
    n, p = A.n, A.p
    G = list(enumerate_gl(n, p))
    out = []
    for idx in rng.permutation(len(G)):
        f = accept(A.conj(G[idx]))
        if f is not None:
            out.append(f)
            if len(out) == count:
                break
    return out


def _stripe_pool(rng, kind, size):
    p, n = 2, 2
    base = []
    while len(base) < size:
        want = 1 if kind in ("J_n", "J_n1_0") else 2
        fs = [random_ppoly(rng, p, 2) for _ in range(want)]
        try:
            base.append(StripeForm(n, kind, fs))
        except Exception:
            continue
    pool = list(base)
    for f in base:
        pool += _partners(rng, build_stripe(f), 1,
                          lambda B: (lambda g: g if g is not None and g.kind == kind else None)(stripe_form_of(B)))
    return pool


def _agree(pairs, decide, oracle):
    agree = equiv = 0
    for a, b in pairs:
        d = decide(a, b)
        o = oracle(a, b)
        agree += d == o
        equiv += o
    return agree, equiv, len(pairs)


def test_criterion_11_deciders_vs_oracle():
    rng = seeded(11)
    results = {}
    stripe_deciders = {"J_n": equiv_J_n, "J_n1_0": equiv_J_n1_0, "J_n1_1": equiv_J_n1_1,
                       "J_1n_1": equiv_J_1n_1}
    for kind, fn in stripe_deciders.items():
        pool = _stripe_pool(rng, kind, 6)
        pairs = list(itertools.product(pool, pool))
        results[kind] = _agree(pairs, lambda a, b: fn(a, b) is not None,
                               lambda a, b: brute_equiv(build_stripe(a), build_stripe(b)) is not None)

    ab_pairs = []
    for shape in ((1, 2, 1), (2, 0, 2), (1, 1, 2), (2, 1, 1), (1, 0, 3)):
        i1, i2, i3 = shape
        base = []
        while len(base) < 3:
            alpha = [[random_ppoly(rng, 2, 2) for _ in range(i3)] for _ in range(i1)]
            blk = ABlock(i1, i2, i3, alpha)
            if rank_pair(blk) == (i1, i3):
                base.append(blk)
        pool = list(base)
        for blk in base:
            Q, R = random_gl(rng, i1, 2), random_gl(rng, i3, 2)
            stack = np.einsum("ij,djk,kl->dil", Q, blk.stack(), R) % 2
            alpha = [[Poly(2, stack[:, i, j].tolist()) for j in range(i3)] for i in range(i1)]
            pool.append(ABlock(i1, i2, i3, alpha))
        ab_pairs += list(itertools.product(pool, pool))
    results["ablock"] = _agree(ab_pairs, lambda a, b: equiv_ablock(a, b) is not None,
                               lambda a, b: brute_equiv(a.matrix(), b.matrix()) is not None)

    pr = HeisProfile(2, 2, 2, 0)
    base = [random_heis_data(rng, pr, 2, max_e=2) for _ in range(5)]
    pool = base + [star_action(x, random_group_element(rng, pr, 2)) for x in base]
    results["heis"] = _agree(list(itertools.product(pool, pool)),
                             lambda a, b: equiv_heis(a, b) is not None,
                             lambda a, b: brute_equiv(heis_build(a), heis_build(b)) is not None)

    dpairs = []
    for m, size in ((1, 4), (2, 10)):
        base = [random_daleth(rng, m, 2, max_e=1) for _ in range(size // 2)]
        pool = base + [A.conj(heis_conjugator(rng, m, 2)) for A in base]
        dpairs += list(itertools.product(pool, pool))
    results["daleth"] = _agree(dpairs,
                               lambda a, b: equiv_daleth(classify_daleth(a), classify_daleth(b)) is not None,
                               lambda a, b: brute_equiv(a, b) is not None)

    ok = all(ag == tot and tot >= 100 and 0 < eq < tot for ag, eq, tot in results.values())
    detail = ", ".join(f"{k} {ag}/{tot} ({eq} equiv)" for k, (ag, eq, tot) in results.items())
    record(11, ok, detail)
