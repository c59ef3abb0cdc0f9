import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from haltonqmc.exceptions import DomainError, IncompatibleOperandsError, ResolutionError
from haltonqmc.functions import (FrequencyIndex, IndexBox, beta, beta_array, beta_multi,
                                 char_sum_direct, char_sum_halton, digit_length, gram_check,
                                 leading_digit, phi_numerator, shift_character)
from haltonqmc.halton import HaltonSpec, halton_block
from haltonqmc.padic import PAdicNumber, monna_map, radical_inverse_fraction, sample_shift


def conjugate_index(p, k):
    """Index k' with phi(k') = -phi(k) mod 1 (digit reversal of p^a - K)."""
    K, a = phi_numerator(k, p)
    if a == 0:
        return 0
    m = (p**a - K) % p**a
    out = 0
    for _ in range(a):
        m, d = divmod(m, p)
        out = out * p + d
    return out


class TestDigits:
    @pytest.mark.parametrize("k, p, length, lead", [(0, 2, 0, 0), (1, 2, 1, 1), (6, 2, 3, 1),
                                                    (17, 3, 3, 1), (26, 3, 3, 2), (24, 5, 2, 4)])
    def test_length_and_leading_digit(self, k, p, length, lead):
        assert digit_length(k, p) == length
        assert leading_digit(k, p) == lead

    def test_phi_numerator(self):
        assert phi_numerator(5, 3) == (7, 2)

    def test_negative(self):
        with pytest.raises(DomainError):
            digit_length(-1, 2)


class TestBeta:
    def test_zero_frequency(self):
        for x in (0.0, 0.3, 0.999):
            assert beta(7, 0, x) == 1

    def test_examples(self):
        assert beta(2, 1, 0.5) == pytest.approx(-1, abs=1e-15)
        assert beta(3, 1, 2 / 3) == pytest.approx(cmath.exp(4j * math.pi / 3), abs=1e-15)

    def test_multi_example(self):
        val = beta_multi((2, 3), (1, 1), (0.5, 2 / 3))
        assert val == pytest.approx(-cmath.exp(4j * math.pi / 3), abs=1e-15)
        assert beta_multi((2, 3), FrequencyIndex((0, 0), (2, 3)), (0.1, 0.2)) == 1

    def test_multi_dimension_mismatch(self):
        with pytest.raises(IncompatibleOperandsError):
            beta_multi((2, 3), (1,), (0.1, 0.2))

    @given(st.sampled_from([2, 3, 5]), st.integers(0, 200), st.floats(0, 1, exclude_max=True))
    def test_conjugation_law(self, p, k, x):
        assert beta(p, k, x).conjugate() == pytest.approx(beta(p, conjugate_index(p, k), x), abs=1e-12)

    @given(st.sampled_from([2, 3, 5, 7]), st.integers(1, 400), st.integers(0, 10**6), st.integers(0, 10**6))
    def test_digit_locality(self, p, k, m1, m2):
        a = digit_length(k, p)
        head = m1 % p**a
        # two points sharing the first a digits but differing afterwards
        x = Fraction(head, p**a) + Fraction(m2 % p**6, p ** (a + 6))
        y = Fraction(head, p**a)
        assert beta(p, k, float(x)) == pytest.approx(beta(p, k, float(y)), abs=1e-12)

    @given(st.sampled_from([2, 3, 5]), st.integers(0, 100), st.integers(0, 3**10), st.integers(0, 3**10))
    def test_character_homomorphism(self, p, k, m, n):
        P = 14
        a, b = PAdicNumber.from_int(m, p, P), PAdicNumber.from_int(n, p, P)
        lhs = beta(p, k, monna_map(a + b))
        rhs = beta(p, k, monna_map(a)) * beta(p, k, monna_map(b))
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_array_matches_scalar(self, rng):
        x = rng.random(200)
        for p, k in [(2, 13), (3, 40), (5, 7)]:
            vec = beta_array(p, k, x)
            assert np.allclose(vec, [beta(p, k, v) for v in x], atol=1e-13)

    def test_modulus_one(self, rng):
        assert np.allclose(np.abs(beta_array(7, 1234, rng.random(100))), 1.0)


class TestFrequencyIndex:
    def test_theta_exact(self):
        k = FrequencyIndex((1, 1), (2, 3))
        assert k.theta == Fraction(5, 6)

    @given(st.integers(0, 3**6), st.integers(0, 5**5), st.integers(1, 2**8))
    def test_theta_never_integer(self, a, b, c):
        k = FrequencyIndex((c, a, b), (2, 3, 5))
        assert k.theta.denominator > 1
        assert k.theta.denominator == math.prod(p**l for p, l in zip(k.bases, k.lengths))

    def test_validation(self):
        with pytest.raises(IncompatibleOperandsError):
            FrequencyIndex((1,), (2, 3))
        with pytest.raises(DomainError):
            FrequencyIndex((-1,), (2,))


class TestCharSum:
    def test_zero_frequency(self):
        assert char_sum_halton((2, 3), (0, 0), 17) == 17

    def test_alternating(self):
        assert abs(char_sum_halton((2,), (1,), 2)) < 1e-15
        for N in range(1, 50):
            assert abs(char_sum_halton((2,), (1,), N)) <= 1 + 1e-12

    def test_bad_N(self):
        with pytest.raises(DomainError):
            char_sum_halton((2,), (1,), 0)

    @settings(max_examples=60)
    @given(st.integers(0, 2**12 - 1), st.integers(0, 3**8 - 1), st.integers(1, 2**12))
    @example(345, 307, 27)  # theta within 5e-5 of an integer
    def test_matches_direct_summation(self, k1, k2, N):
        if k1 == k2 == 0:
            return
        closed = char_sum_halton((2, 3), (k1, k2), N)
        assert abs(closed - char_sum_direct((2, 3), (k1, k2), N)) < 1e-10

    @settings(max_examples=60)
    @given(st.integers(1, 5**5), st.integers(0, 2**8), st.integers(1, 3000))
    def test_sine_bound(self, k3, k1, N):
        k = FrequencyIndex((k1, 0, k3), (2, 3, 5))
        bound = 1.0 / abs(math.sin(math.pi * float(k.theta)))
        assert abs(char_sum_halton((2, 3, 5), k, N)) <= bound * (1 + 1e-9)

    def test_start_index_window(self):
        bases, k = (2, 3), (5, 7)
        full = char_sum_halton(bases, k, 300)
        head = char_sum_halton(bases, k, 100)
        tail = char_sum_halton(bases, k, 200, start_index=100)
        assert abs(full - head - tail) < 1e-12

    def test_shift_multiplies_by_character(self):
        bases, k, N = (2, 3), (6, 4), 500
        sh = sample_shift(bases, seed=3)
        pts = halton_block(HaltonSpec(bases, shift=sh), N).points
        direct = char_sum_direct(bases, k, N, points=pts)
        closed = char_sum_halton(bases, k, N, shift=sh)
        assert abs(direct - closed) < 1e-9
        assert abs(shift_character(FrequencyIndex(k, bases), sh)) == pytest.approx(1.0)


class TestGram:
    def test_trivial_case(self):
        assert gram_check(2, 1) < 1e-15

    @pytest.mark.parametrize("p, g", [(3, 2), (5, 2), (2, 4), (3, 3)])
    def test_orthonormal(self, p, g):
        assert gram_check(p, g) < 1e-12

    def test_finer_quadrature(self):
        assert gram_check(3, 2, Q=27) < 1e-12

    def test_resolution(self):
        with pytest.raises(ResolutionError):
            gram_check(3, 2, Q=10)


class TestIndexBox:
    def test_sizes_and_members(self):
        full = IndexBox((2, 1), (2, 3))
        assert full.size == 12 == len(list(full))
        punct = IndexBox((2, 1), (2, 3), "punctured")
        assert punct.size == 11 and (0, 0) not in list(punct)
        inner = IndexBox((2, 1), (2, 3), "interior")
        assert inner.size == 6 and all(min(k) >= 1 for k in inner)

    def test_validation(self):
        with pytest.raises(DomainError):
            IndexBox((0,), (2,))
        with pytest.raises(DomainError):
            IndexBox((1,), (2,), "other")
        with pytest.raises(IncompatibleOperandsError):
            IndexBox((1, 1), (2,))


def test_radical_inverse_fraction_used_for_theta():
    # theta is the exact sum of the radical inverses, reduced mod 1
    k = FrequencyIndex((3, 8), (2, 3))
    assert k.theta == (radical_inverse_fraction(2, 3) + radical_inverse_fraction(3, 8)) % 1
