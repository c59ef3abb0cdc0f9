import io
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from haltonqmc.exceptions import DomainError, IncompatibleOperandsError, InvalidBaseError, ResourceError
from haltonqmc.halton import (HaltonSpec, PointSet, halton_block, halton_point, iter_halton,
                              radical_inverse_array, shifted_blocks, shift_value)
from haltonqmc.padic import (PAdicNumber, Shift, UnitPoint, monna_map_fraction, radical_inverse_fraction,
                             sample_shift, shift_point)


def bit_reverse_dyadic(n, bits):
    """Independent base-2 oracle: reverse the binary string."""
    return int(format(n, f"0{bits}b")[::-1], 2) / 2.0**bits


class TestSpec:
    def test_validation(self):
        with pytest.raises(InvalidBaseError):
            HaltonSpec((2, 4))
        with pytest.raises(DomainError):
            HaltonSpec((2,), start_index=-1)
        with pytest.raises(IncompatibleOperandsError):
            HaltonSpec((2, 3), shift=Shift.zero((2, 5)))

    def test_dim(self):
        assert HaltonSpec((2, 3, 5)).dim == 3


class TestPoints:
    def test_origin(self):
        assert halton_point(HaltonSpec((2, 3)), 0).coords == (0.0, 0.0)

    def test_fifth_point(self):
        assert halton_point(HaltonSpec((2, 3)), 5).coords == (0.625, 7 / 9)

    def test_exact(self):
        assert halton_point(HaltonSpec((2, 3)), 5, exact=True).coords == (Fraction(5, 8), Fraction(7, 9))

    def test_shifted_point(self):
        spec = HaltonSpec((2,), shift=Shift.from_values((0.5,), (2,)))
        assert halton_point(spec, 1).coords == (0.25,)

    def test_shifted_point_matches_shift_point(self):
        sh = sample_shift((2, 3), seed=4)
        spec = HaltonSpec((2, 3), shift=sh)
        for n in (0, 1, 17, 1000):
            base = halton_point(HaltonSpec((2, 3)), n, exact=True)
            assert halton_point(spec, n, exact=True) == shift_point(base, sh)

    def test_negative_index(self):
        with pytest.raises(DomainError):
            halton_point(HaltonSpec((2,)), -3)


class TestBlock:
    def test_base2_table(self):
        pts = halton_block(HaltonSpec((2,)), 4).points
        assert pts[:, 0].tolist() == [0.0, 0.5, 0.25, 0.75]

    def test_single_point(self):
        spec = HaltonSpec((3, 7), start_index=10)
        assert tuple(halton_block(spec, 1).points[0]) == halton_point(spec, 10).coords

    def test_all_dyadic_indices_below_2_20(self):
        pts = halton_block(HaltonSpec((2,)), 2**20).points[:, 0]
        n = np.arange(2**20)
        ref = np.zeros(2**20)
        for b in range(20):
            ref += ((n >> b) & 1) * 2.0 ** -(b + 1)
        assert np.array_equal(pts, ref)
        assert pts[12345] == bit_reverse_dyadic(12345, 20)

    @pytest.mark.parametrize("bases", [(3,), (5, 7), (11, 13, 17)])
    def test_random_indices_below_2_20(self, bases):
        idx = np.random.default_rng(0).integers(0, 2**20, 300)
        pts = halton_block(HaltonSpec(bases), 2**20).points[idx]
        ref = [[float(radical_inverse_fraction(p, int(n))) for p in bases] for n in idx]
        assert np.array_equal(pts, np.array(ref))

    @pytest.mark.parametrize("bases", [(2, 3), (5, 7, 11)])
    def test_incremental_generator_agrees(self, bases):
        spec = HaltonSpec(bases, start_index=3)
        it = iter_halton(spec)
        stream = np.array([next(it) for _ in range(5000)])
        assert np.array_equal(stream, halton_block(spec, 5000).points)

    def test_shifted_incremental_agrees(self):
        spec = HaltonSpec((2, 3, 5), start_index=7, shift=sample_shift((2, 3, 5), seed=2))
        it = iter_halton(spec, exact=True)
        exact = [next(it) for _ in range(3000)]
        block = halton_block(spec, 3000).points
        # the block adds two doubles, so it may sit one rounding away from the exact value
        np.testing.assert_allclose(block, np.array(exact, dtype=float), rtol=0, atol=2.0**-52)
        for n in (0, 999, 2999):
            assert halton_point(spec, 7 + n, exact=True).coords == exact[n]

    def test_open_type_prefixes(self):
        spec = HaltonSpec((2, 3), shift=sample_shift((2, 3), seed=9))
        big = halton_block(spec, 500).points
        for M in (1, 37, 256):
            assert np.array_equal(halton_block(spec, M).points, big[:M])
            tail = halton_block(HaltonSpec((2, 3), M, spec.shift), 500 - M).points
            assert np.array_equal(np.vstack([big[:M], tail]), big)

    def test_budget(self):
        with pytest.raises(ResourceError):
            halton_block(HaltonSpec((2, 3)), 100, max_entries=150)

    def test_bad_size(self):
        with pytest.raises(DomainError):
            halton_block(HaltonSpec((2,)), 0)

    def test_shifted_points_in_unit_cube(self):
        pts = shifted_blocks((2, 3), 1000, [sample_shift((2, 3), seed=1, replicate=r) for r in range(4)])
        assert pts.shape == (4, 1000, 2)
        assert pts.min() >= 0 and pts.max() < 1

    def test_shifted_block_is_permuted_lattice_in_base2(self):
        # the first 2^m shifted points hit each interval [i/2^m, (i+1)/2^m) once
        spec = HaltonSpec((2,), shift=sample_shift((2,), seed=6))
        x = halton_block(spec, 256).points[:, 0]
        assert sorted(np.floor(x * 256).astype(int)) == list(range(256))

    @settings(max_examples=30)
    @given(st.integers(0, 2**30), st.integers(0, 2**62))
    def test_shift_carries_into_high_digits(self, n, sig):
        sh = Shift((PAdicNumber.from_int(sig, 2, 64),))
        spec = HaltonSpec((2,), start_index=n, shift=sh)
        got = halton_block(spec, 3).points[:, 0]
        ref = [float(monna_map_fraction(PAdicNumber.from_int(n + i + sig, 2, 64))) for i in range(3)]
        np.testing.assert_allclose(got, ref, rtol=0, atol=2.0**-52)

    def test_shift_value(self):
        sh = Shift.from_values((0.5, Fraction(1, 3)), (2, 3))
        assert shift_value(sh) == (0.5, 1 / 3)


class TestCsv:
    def test_header_and_rows(self):
        buf = io.StringIO()
        halton_block(HaltonSpec((2, 3)), 3).to_csv(buf)
        assert buf.getvalue() == ("n,x1,x2\n0,0,0\n1,0.5,0.33333333333333331\n"
                                  "2,0.25,0.66666666666666663\n")

    def test_start_index_in_first_column(self):
        buf = io.StringIO()
        halton_block(HaltonSpec((5,), start_index=4), 2).to_csv(buf)
        assert buf.getvalue().splitlines()[1:] == ["4,0.80000000000000004", "5,0.040000000000000001"]


def test_radical_inverse_array_wide_fallback():
    # 3^40 > 2^53 forces the exact per-element path
    n = np.array([0, 1, 3**39])
    out = radical_inverse_array(3, n, ndigits=40)
    assert out.tolist() == [0.0, 1 / 3, float(Fraction(1, 3**40))]
