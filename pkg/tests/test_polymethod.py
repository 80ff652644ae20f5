import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from progfree.constructions import greedy_ap3_free_z4
from progfree.core import BinaryPointSet, DomainError, Z4PointSet, is_ap3_free
from progfree.polymethod import (MultilinearPoly, certificate_json, clp_bound, clp_disjointness_check,
                                 clp_refuted, eval_multilinear, format_poly, lemma1_instances, lemma1_threshold,
                                 lemma1_verify, min_vanishing_degree, monomial_count, monomials_up_to, parse_poly,
                                 regularize, smallest_clean_size, vanishing_space)


# ---------------------------------------------------------------- polynomials


def test_monomial_count_examples():
    assert monomial_count(4, 2) == 11
    for n in range(8):
        assert monomial_count(n, n) == 2**n
        assert monomial_count(n, 0) == 1
    with pytest.raises(DomainError):
        monomial_count(3, 4)


def test_monomial_order():
    assert monomials_up_to(3, 2) == [0, 1, 2, 4, 3, 5, 6]
    assert len(monomials_up_to(6, 3)) == monomial_count(6, 3)


def test_eval_examples():
    zero = MultilinearPoly(3)
    assert all(eval_multilinear(zero, x) == 0 for x in range(8))
    f = MultilinearPoly(2, frozenset({0b11}))
    assert f(0b11) == 1 and f(0b01) == 0
    with pytest.raises(DomainError):
        f(4)


@given(st.integers(1, 6).flatmap(lambda n: st.tuples(
    st.just(n), st.frozensets(st.integers(0, 2**n - 1)), st.integers(0, 2**n - 1))))
def test_eval_matches_expansion(args):
    n, mons, x = args
    f = MultilinearPoly(n, mons)
    bits = [x >> i & 1 for i in range(n)]
    assert f(x) == oracles.eval_poly(mons, bits)


@given(st.integers(1, 5).flatmap(lambda n: st.tuples(
    st.just(n), st.frozensets(st.integers(0, 2**n - 1)), st.integers(0, 2**n - 1))))
def test_shift(args):
    n, mons, t = args
    f = MultilinearPoly(n, mons)
    g = f.shift(t)
    assert all(g(x) == f(x ^ t) for x in range(2**n))
    assert g.degree <= f.degree


def test_degree_and_str():
    f = MultilinearPoly(3, frozenset({0, 0b101}))
    assert f.degree == 2 and str(f) == "1 + x1*x3"
    assert MultilinearPoly(3).degree == 0 and str(MultilinearPoly(3)) == "0"


def test_poly_serialisation():
    f = MultilinearPoly(4, frozenset({0, 0b1010, 0b1}))
    text = format_poly(f)
    assert text == "0 1\n1 1\na 1\n"
    assert parse_poly(text, 4) == f
    assert parse_poly("# c\n3 2\n1 1\n", 2) == MultilinearPoly(2, frozenset({1}))


# ---------------------------------------------------------------- vanishing spaces


def test_vanishing_examples():
    sp = vanishing_space([], 1, 2)
    assert sp.dim == 3
    assert sp.to_json()["dim"] == 3
    full = BinaryPointSet.of(3, list(itertools.product((0, 1), repeat=3)))
    assert vanishing_space(full, 3).dim == 0
    sp = vanishing_space(BinaryPointSet.of(2, [(0, 0), (1, 1)]), 1)
    assert sp.dim == 1 and str(sp.basis[0]) == "x1 + x2"


def _rank_f2(rows):
    rows = [int(r) for r in rows]
    rank = 0
    while rows:
        piv = max(rows)
        if piv == 0:
            break
        rows.remove(piv)
        top = piv.bit_length() - 1
        rows = [r ^ piv if r >> top & 1 else r for r in rows]
        rank += 1
    return rank


def test_vanishing_dimension_equals_nullity_and_basis_vanishes():
    rng = np.random.default_rng(17)
    for _ in range(60):
        n = int(rng.integers(1, 8))
        d = int(rng.integers(0, n + 1))
        k = int(rng.integers(0, 2**n + 1))
        pts = sorted(int(x) for x in rng.choice(2**n, size=k, replace=False))
        sp = vanishing_space(pts, d, n)
        mons = monomials_up_to(n, d)
        # independent rank of the evaluation matrix via integer bit rows
        rows = [sum(1 << j for j, m in enumerate(mons) if m & x == m) for x in pts]
        assert sp.dim == len(mons) - _rank_f2(rows)
        assert sp.dim >= monomial_count(n, d) - len(pts)
        for f in sp.basis:
            assert not f.is_zero() and f.degree <= d
            assert all(f(x) == 0 for x in pts)
        # independence: basis vectors stay full rank
        idx = {m: j for j, m in enumerate(mons)}
        vecs = [sum(1 << idx[m] for m in f.monomials) for f in sp.basis]
        assert _rank_f2(vecs) == sp.dim


def test_vanishing_chunking_agrees():
    import progfree.polymethod as pm
    rng = np.random.default_rng(2)
    pts = sorted(int(x) for x in rng.choice(2**9, size=300, replace=False))
    ref = vanishing_space(pts, 4, 9)
    old = pm.ROW_CHUNK
    try:
        pm.ROW_CHUNK = 7
        small = vanishing_space(pts, 4, 9)
    finally:
        pm.ROW_CHUNK = old
    assert small.basis == ref.basis


def test_vanishing_errors():
    with pytest.raises(DomainError):
        vanishing_space([0], 3, 2)
    with pytest.raises(DomainError):
        vanishing_space([4], 1, 2)
    with pytest.raises(DomainError):
        vanishing_space([1], 1)


def test_min_vanishing_degree_examples():
    assert min_vanishing_degree(BinaryPointSet.of(3, [])) == 0
    assert min_vanishing_degree(BinaryPointSet.of(3, [(1, 0, 1)])) == 1
    with pytest.raises(DomainError):
        min_vanishing_degree(list(range(8)), 3)


def test_min_vanishing_degree_against_scan():
    rng = np.random.default_rng(6)
    for _ in range(10):
        pts = sorted(int(x) for x in rng.choice(64, size=62, replace=False))
        d = min_vanishing_degree(pts, 6)
        dims = [vanishing_space(pts, j, 6).dim for j in range(7)]
        assert dims[d] >= 1 and all(v == 0 for v in dims[:d])
        # counting bound: any d with more monomials than points suffices
        first_counting = next(j for j in range(7) if monomial_count(6, j) > len(pts))
        assert d <= first_counting


# ---------------------------------------------------------------- harness


def test_lemma1_counterexample_n1():
    rep = lemma1_verify([0, 1], 1, 1)
    assert not rep.threshold_met and rep.threshold == 2
    assert [str(f) for f in rep.violations] == ["1 + x1"]


def test_lemma1_trivial_inputs():
    for a in ([], [3]):
        rep = lemma1_verify(a, 1, 3)
        assert rep.differences == 0 and rep.dim == monomial_count(3, 1)


def test_lemma1_threshold_formula():
    for n in range(1, 10):
        for d in range(n + 1):
            assert lemma1_threshold(n, d) == 2 * sum(math.comb(n, i) for i in range(d // 2 + 1))


def test_lemma1_seeded_instances_have_no_violations():
    insts = lemma1_instances(150, seed=3, max_n=11)
    assert len(insts) == 150
    for pts, d, n in insts:
        rep = lemma1_verify(pts, d, n)
        assert rep.threshold_met
        assert rep.violations == ()


def test_lemma1_instances_are_seeded():
    assert lemma1_instances(20, 9) == lemma1_instances(20, 9)
    assert lemma1_instances(20, 9) != lemma1_instances(20, 10)


def test_lemma1_report_json():
    rep = lemma1_verify(BinaryPointSet.of(2, [(0, 0), (1, 1)]), 1)
    blob = json.dumps(rep.to_json(), sort_keys=True)
    assert json.loads(blob)["threshold_met"] is False


def test_smallest_clean_size_at_most_threshold_plus_one():
    for n, d in [(3, 1), (4, 2), (5, 2), (6, 2)]:
        c = smallest_clean_size(n, d, seed=1, trials=10)
        assert 1 <= c <= min(2**n, lemma1_threshold(n, d) + 1)
    assert smallest_clean_size(1, 1, seed=0) == 3  # {0,1} violates and nothing larger exists


# ---------------------------------------------------------------- Z_4 pipeline


def test_disjointness_examples():
    assert clp_disjointness_check(Z4PointSet.of(2, [(1, 3)]))
    assert clp_disjointness_check(Z4PointSet.of(2, []))
    with pytest.raises(DomainError):
        clp_disjointness_check(BinaryPointSet.of(1, []))


def test_disjointness_exhaustive_z4_1_and_z4_2_small():
    pts1 = [(c,) for c in range(4)]
    for k in range(5):
        for combo in itertools.combinations(pts1, k):
            s = Z4PointSet.of(1, combo)
            assert clp_disjointness_check(s) == is_ap3_free(s)
    pts2 = list(itertools.product(range(4), repeat=2))
    for k in range(5):
        for combo in itertools.combinations(pts2, k):
            s = Z4PointSet.of(2, combo)
            assert clp_disjointness_check(s) == is_ap3_free(s)


def test_disjointness_greedy_and_planted():
    for seed in range(10):
        s = greedy_ap3_free_z4(3, seed)
        assert clp_disjointness_check(s) and is_ap3_free(s)
        x, y = s.points[0], s.points[-1]
        z = tuple((2 * b - a) % 4 for a, b in zip(x, y))
        if z not in s:
            planted = Z4PointSet.of(3, s.points + (z,))
            assert not is_ap3_free(planted)
            assert not clp_disjointness_check(planted)


def test_regularize():
    s = Z4PointSet.of(2, [(0, 0), (0, 2), (2, 0), (1, 1), (1, 3), (3, 1), (0, 1)])
    rep = regularize(s)
    assert rep.slice_sizes == {(0, 0): 3, (0, 1): 1, (1, 1): 3}
    # N=1 keeps 3 slices (3), N=2 keeps 2 slices (4)
    assert (rep.N, rep.retained, rep.kept) == (2, 4, ((0, 0), (1, 1)))
    with pytest.raises(DomainError):
        regularize(Z4PointSet.of(2, []))


# ---------------------------------------------------------------- bound certificates


@pytest.mark.parametrize("n", range(1, 7))
def test_clp_bound_matches_brute_force(n):
    assert clp_bound(n).s_max == oracles.clp_survivor(n)


def test_clp_bound_n1():
    cert = clp_bound(1)
    assert cert.s_max == 4 and cert.exponent == 1


def test_clp_certificate_reverifies_independently():
    for n in (1, 2, 5, 17, 50, 100, 233):
        c = clp_bound(n)
        B = lambda j: sum(math.comb(n, i) for i in range(j + 1))  # noqa: E731
        assert c.N_star <= 2 * B(c.d_star // 2)
        assert B(c.d_star) * c.N_star > 2**n * c.N_star - c.s_max
        assert not clp_refuted(n, c.s_max, c.N_star)
        # one more element at the same slice size is either inadmissible or refuted
        assert c.s_max + 1 > c.N_star * 2**n or clp_refuted(n, c.s_max + 1, c.N_star)


def test_clp_exponent_sweep():
    exps = [float(clp_bound(n).exponent) for n in range(50, 501, 50)]
    assert all(0.5 < e < 1 for e in exps)
    assert all(float(clp_bound(n).exponent) < 1 for n in range(100, 160))
    # observed: the unoptimised exponent increases towards ~0.9263
    assert exps == sorted(exps)
    assert exps[-1] < 0.9263


def test_certificate_json():
    blob = certificate_json(clp_bound(100))
    data = json.loads(blob)
    assert set(data) == {"n", "d_star", "N_star", "s_max", "exponent"}
    assert int(data["s_max"]) == clp_bound(100).s_max
    assert json.dumps(data, sort_keys=True) == blob
    with pytest.raises(DomainError):
        clp_bound(0)
