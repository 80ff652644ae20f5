from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given

import oracles
from progfree.core import DomainError, FpPointSet, count_ap3, is_ap3_free, translate
from progfree.constructions import greedy_ap3_free
from progfree.fourier import (NumericalInstabilityError, best_affine_hyperplane, count_ap3_fourier, dft,
                              directions)
from progfree.search import max_ap3_free
from strategies import fp_sets


def test_dft_singleton_and_full_line():
    t = dft(FpPointSet.of(3, 1, [(0,)]))
    assert np.allclose(t.values, 1)
    t = dft(FpPointSet.of(3, 1, [(0,), (1,), (2,)]))
    assert t[(0,)] == pytest.approx(3)
    assert abs(t[(1,)]) < 1e-12 and abs(t[(2,)]) < 1e-12
    assert len(t) == 3


def test_dft_matches_definition():
    rng = np.random.default_rng(3)
    for p, n in [(3, 2), (5, 2), (7, 1), (3, 3)]:
        s = FpPointSet.from_codes(p, n, rng.choice(p**n, size=min(p**n, 7), replace=False))
        ref = oracles.character_sums(s.points, p, n)
        t = dft(s)
        for g, v in ref.items():
            assert abs(t[g] - v) < 1e-9


def test_parseval_random_f5():
    rng = np.random.default_rng(8)
    s = FpPointSet.from_codes(5, 2, rng.choice(25, size=11, replace=False))
    assert dft(s).parseval_sum() == pytest.approx(25 * 11, rel=1e-6)


@given(fp_sets(max_n=3, max_size=15))
def test_table_invariants(s):
    t = dft(s)
    assert len(t) == s.ambient_size
    assert abs(t.values[0] - len(s)) <= 1e-9 * max(1, len(s))
    assert np.all(np.abs(t.values) <= len(s) + 1e-9)
    assert t.parseval_sum() == pytest.approx(s.ambient_size * len(s), rel=1e-6, abs=1e-9)


@given(fp_sets(max_n=3, max_size=15))
def test_translation_covariance(s):
    shifted = translate(s, (1,) * s.n)
    assert np.allclose(np.abs(dft(s).values), np.abs(dft(shifted).values), atol=1e-9)


def test_count_ap3_fourier_examples():
    assert count_ap3_fourier(FpPointSet.of(3, 1, [(0,), (1,), (2,)])) == 9
    assert count_ap3_fourier(FpPointSet.of(7, 2, [(3, 5)])) == 1
    assert count_ap3_fourier(FpPointSet.of(5, 0, [()])) == 1


@given(fp_sets(max_n=3, max_size=20))
def test_count_identity(s):
    assert count_ap3_fourier(s) == count_ap3(s)


def test_cap_enforced():
    s = FpPointSet.of(3, 11, [])
    with pytest.raises(DomainError):
        dft(s)
    with pytest.raises(DomainError):
        dft(FpPointSet.of(3, 3, []), cap=26)


def test_instability_error_is_arithmetic():
    assert issubclass(NumericalInstabilityError, ArithmeticError)


def test_directions_count_and_normalisation():
    for p, n in [(3, 2), (5, 2), (3, 3)]:
        d = directions(p, n)
        assert len(d) == (p**n - 1) // (p - 1)
        assert all(row[np.nonzero(row)[0][0]] == 1 for row in d)


def test_hyperplane_examples():
    s = FpPointSet.of(3, 2, [(0, 0), (0, 1), (0, 2)])
    c = best_affine_hyperplane(s)
    assert (c.direction, c.level, c.density) == ((1, 0), 0, Fraction(1))
    c = best_affine_hyperplane(FpPointSet.of(3, 2, [(2, 1)]))
    assert c.density == Fraction(1, 3) and c.baseline == Fraction(1, 9)
    # (0,1)·(2,1) = 1 is the lexicographically first containing hyperplane
    assert (c.direction, c.level) == ((0, 1), 1)


def test_hyperplane_degenerate_inputs():
    with pytest.raises(DomainError):
        best_affine_hyperplane(FpPointSet.of(3, 2, []))
    with pytest.raises(DomainError):
        best_affine_hyperplane(FpPointSet.from_codes(3, 2, range(9)))


def test_hyperplane_matches_exhaustive_scan():
    cases = [max_ap3_free(3, 4).witness] + [greedy_ap3_free(3, 4, seed) for seed in range(4)]
    rng = np.random.default_rng(0)
    cases += [FpPointSet.from_codes(5, 2, rng.choice(25, size=9, replace=False)) for _ in range(4)]
    for s in cases:
        c = best_affine_hyperplane(s)
        cnt, g, lvl = oracles.best_hyperplane(s.points, s.p, s.n)
        assert (c.direction, c.level) == (g, lvl)
        assert c.density == Fraction(cnt, s.p ** (s.n - 1))
        assert c.density >= c.baseline
        assert is_ap3_free(s) or s.p == 5


def test_equality_only_for_equidistributed_sets():
    # the full space is equidistributed: every class gives density 1 = alpha
    full = [(a, b) for a in range(3) for b in range(3)]
    cnt, _, _ = oracles.best_hyperplane(full, 3, 2)
    assert Fraction(cnt, 3) == 1
    # a proper nonempty set has some nonzero Fourier coefficient, hence a strict increment
    rng = np.random.default_rng(4)
    for _ in range(40):
        k = int(rng.integers(1, 9))
        s = FpPointSet.from_codes(3, 2, rng.choice(9, size=k, replace=False))
        assert best_affine_hyperplane(s).increment > 0


def test_certificate_json():
    c = best_affine_hyperplane(FpPointSet.of(3, 2, [(2, 1)]))
    assert c.to_json() == {"direction": [0, 1], "level": 1, "density_num": 1, "density_den": 3,
                           "baseline_num": 1, "baseline_den": 9}
    assert c.increment == Fraction(2, 9)
