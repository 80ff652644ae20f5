import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from progfree.core import (BinaryPointSet, DomainError, FpPointSet, FpVector, Z4PointSet, coset_decompose,
                           count_ap3, double_set, is_ap3_free, parse_point_set, format_point_set,
                           read_point_set, reconstruct, restricted_sumset, rho, rho_inverse, translate,
                           write_point_set)
from progfree.constructions import greedy_ap3_free_z4
from strategies import fp_sets, z4_sets


def rand_fp(rng, p, n, k):
    codes = rng.choice(p**n, size=k, replace=False)
    return FpPointSet.from_codes(p, n, codes)


# ---------------------------------------------------------------- containers


def test_fpvector_rejects_bad_moduli():
    with pytest.raises(DomainError):
        FpVector(2, (0, 1))
    with pytest.raises(DomainError):
        FpVector(9, (0,))
    with pytest.raises(DomainError):
        FpVector(3, (3,))
    assert FpVector(5, (4, 0)).n == 2


def test_point_sets_sort_and_reject_duplicates():
    s = FpPointSet.of(3, 2, [(2, 0), (0, 1)])
    assert s.points == ((0, 1), (2, 0))
    with pytest.raises(DomainError):
        FpPointSet.of(3, 2, [(1, 1), (1, 1)])
    with pytest.raises(DomainError):
        FpPointSet.of(3, 2, [(1, 3)])
    with pytest.raises(DomainError):
        FpPointSet.of(3, 2, [(1,)])
    with pytest.raises(DomainError):
        FpPointSet.of(4, 1, [(1,)])


def test_codes_round_trip():
    s = FpPointSet.of(5, 3, [(4, 0, 1), (0, 0, 2)])
    assert list(s.codes) == [2, 4 * 25 + 1]
    assert FpPointSet.from_codes(5, 3, s.codes) == s


# ---------------------------------------------------------------- 3APs


def test_is_ap3_free_examples():
    assert is_ap3_free(FpPointSet.of(3, 1, []))
    assert not is_ap3_free(FpPointSet.of(3, 1, [(0,), (1,), (2,)]))
    assert is_ap3_free(FpPointSet.of(3, 2, [(0, 0), (0, 1), (1, 0), (1, 1)]))


def test_is_ap3_free_rejects_binary():
    with pytest.raises(DomainError):
        is_ap3_free(BinaryPointSet.of(2, [(0, 1)]))


def test_z4_progressions():
    # 0, 1, 2 is a 3AP in Z_4; 0, 2 share midpoints 1 and 3
    assert not is_ap3_free(Z4PointSet.of(1, [(0,), (1,), (2,)]))
    assert not is_ap3_free(Z4PointSet.of(1, [(0,), (2,), (3,)]))
    assert is_ap3_free(Z4PointSet.of(1, [(0,), (1,)]))
    # 1 + 3 = 0 = 2*0 = 2*2: x + z = 2y with y in {0, 2}
    assert not is_ap3_free(Z4PointSet.of(1, [(1,), (3,), (0,)]))


def test_is_ap3_free_matches_oracle_random():
    rng = np.random.default_rng(11)
    for _ in range(120):
        q = int(rng.choice([3, 4, 5, 7]))
        n = int(rng.integers(1, 4))
        k = int(rng.integers(0, min(q**n, 9) + 1))
        codes = rng.choice(q**n, size=k, replace=False)
        cls = Z4PointSet if q == 4 else FpPointSet
        s = cls.from_codes(q, n, codes)
        assert is_ap3_free(s) == oracles.ap3_free(s.points, q)


def test_count_ap3_examples():
    assert count_ap3(FpPointSet.of(3, 1, [(0,), (1,), (2,)])) == 9
    assert count_ap3(FpPointSet.of(5, 2, [(3, 4)])) == 1
    assert count_ap3(FpPointSet.of(3, 2, [])) == 0


def test_count_ap3_matches_triple_loop_on_50_sets():
    rng = np.random.default_rng(2024)
    for _ in range(50):
        s = rand_fp(rng, 3, 4, int(rng.integers(0, 30)))
        assert count_ap3(s) == oracles.count_ap3(s.points, 3)


def test_full_space_count_is_p_to_2n():
    for p, n in [(3, 2), (5, 2), (7, 1), (3, 3)]:
        full = FpPointSet.from_codes(p, n, range(p**n))
        assert count_ap3(full) == p ** (2 * n)


@given(fp_sets(max_size=10))
def test_free_iff_only_degenerate_triples(s):
    assert is_ap3_free(s) == (count_ap3(s) == len(s))


# ---------------------------------------------------------------- sumsets


def test_restricted_sumset_examples():
    assert len(restricted_sumset(FpPointSet.of(3, 1, [(1,)]))) == 0
    assert restricted_sumset(FpPointSet.of(3, 1, [(0,), (1,)])).points == ((1,),)
    assert restricted_sumset(FpPointSet.of(5, 1, [(0,), (1,), (2,)])).points == ((1,), (2,), (3,))


@given(fp_sets(max_size=10))
def test_restricted_sumset_against_pairs(s):
    out = restricted_sumset(s)
    expected = {tuple((a + b) % s.p for a, b in zip(x, y)) for x, y in itertools.combinations(s.points, 2)}
    assert set(out.points) == expected
    assert len(out) <= len(s) * (len(s) - 1) // 2


@given(z4_sets())
def test_restricted_sumset_z4(s):
    expected = {tuple((a + b) % 4 for a, b in zip(x, y)) for x, y in itertools.combinations(s.points, 2)}
    assert set(restricted_sumset(s).points) == expected


def test_translate():
    s = FpPointSet.of(3, 2, [(0, 0), (2, 1)])
    assert translate(s, (1, 2)).points == ((0, 0), (1, 2))


# ---------------------------------------------------------------- coset machinery


def test_rho_examples_and_errors():
    assert rho((0, 2, 2)) == (0, 1, 1)
    assert rho_inverse((1, 0)) == (2, 0)
    with pytest.raises(DomainError):
        rho((1, 0))


def test_rho_is_isomorphism_exhaustive():
    for n in range(0, 9):
        cube = list(itertools.product((0, 2), repeat=n))
        for u in cube:
            ru = rho(u)
            for v in cube:
                s = tuple((a + b) % 4 for a, b in zip(u, v))
                assert rho(s) == tuple(a ^ b for a, b in zip(ru, rho(v)))


def test_double_set_examples():
    assert double_set(Z4PointSet.of(2, [(1, 3)])).points == ((1, 1),)
    assert double_set(Z4PointSet.of(2, [(0, 0)])).points == ((0, 0),)


def test_double_set_matches_elementwise_oracle():
    rng = np.random.default_rng(5)
    for _ in range(30):
        s = Z4PointSet.from_codes(4, 3, rng.choice(64, size=int(rng.integers(0, 20)), replace=False))
        expected = {rho(tuple((2 * c) % 4 for c in pt)) for pt in s.points}
        assert set(double_set(s).points) == expected


def test_coset_decompose_examples():
    sl = coset_decompose(Z4PointSet.of(1, [(0,), (2,)]))
    assert list(sl) == [(0,)] and sl[(0,)].points.points == ((0,), (1,))
    sl = coset_decompose(Z4PointSet.of(1, [(1,), (3,)]))
    assert list(sl) == [(1,)] and sl[(1,)].points.points == ((0,), (1,))


@given(z4_sets(max_n=4, max_size=30))
def test_coset_decompose_partitions_and_reconstructs(s):
    slices = coset_decompose(s)
    assert sum(len(x.points) for x in slices.values()) == len(s)
    assert all(set(t) <= {0, 1} for t in slices)
    assert reconstruct(slices, s.n) == s


@given(z4_sets(max_n=4, max_size=14))
def test_disjointness_equivalence(s):
    doubled = set(double_set(s).points)
    ok = True
    for t, sl in coset_decompose(s).items():
        shift = rho(tuple((2 * c) % 4 for c in t))
        for u in restricted_sumset(sl.points).points:
            if tuple(a ^ b for a, b in zip(u, shift)) in doubled:
                ok = False
    assert ok == is_ap3_free(s)


def test_disjointness_on_greedy_and_planted():
    for seed in range(5):
        s = greedy_ap3_free_z4(3, seed)
        assert is_ap3_free(s)
        x, y = s.points[0], s.points[1]
        third = tuple((2 * b - a) % 4 for a, b in zip(x, y))
        assert third in s or not is_ap3_free(s.with_points(s.points + (third,)))


# ---------------------------------------------------------------- file format


def test_point_set_file_round_trip(tmp_path):
    s = Z4PointSet.of(2, [(3, 1), (0, 2)])
    path = tmp_path / "s.txt"
    write_point_set(s, path)
    assert read_point_set(path) == s
    text = "# comment\n3 2\n0 1\n\n2 2\n"
    assert parse_point_set(text) == FpPointSet.of(3, 2, [(0, 1), (2, 2)])
    assert format_point_set(FpPointSet.of(3, 1, [(2,)])) == "3 1\n2\n"


@pytest.mark.parametrize("text", ["", "3\n", "3 2\n0 1\n0 1\n", "3 2\n0 5\n"])
def test_point_set_file_errors(text):
    with pytest.raises(DomainError):
        parse_point_set(text)


@given(fp_sets())
def test_format_parse_round_trip(s):
    assert parse_point_set(format_point_set(s)) == s


def test_binary_masks():
    b = BinaryPointSet.of(3, [(1, 0, 1), (0, 1, 0)])
    assert sorted(b.masks()) == [0b010, 0b101]
    assert st is not None
