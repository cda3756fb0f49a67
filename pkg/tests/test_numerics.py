"""
Tests for the shared numerical kernels
"""

import math

import mpmath
import numpy as np
import pytest

from thermoporo.error_handler import DomainError, ShapeError, SingularSystemError
from thermoporo.numerics import (
    BandedMatrix,
    FieldProfile,
    Grid1D,
    first_derivative,
    integrate_simpson,
    mod_sph_bessel_i0,
    mod_sph_bessel_i1,
    mod_sph_bessel_k0,
    second_derivative,
    solve_banded,
)

mpmath.mp.dps = 40

ARGUMENTS = [0.0, 1e-8, 1e-4, 9.99e-4, 1e-3, 0.1, 0.49, 0.5, 0.51, 1.0, 2.5, 10.0, 50.0]
LOG_ARGUMENTS = np.logspace(-8.0, math.log10(50.0), 100)


def _i0_exact(x: float) -> float:
    if x == 0.0:
        return 1.0
    m = mpmath.mpf(x)
    return float(mpmath.sinh(m) / m)


def _i1_exact(x: float) -> float:
    if x == 0.0:
        return 0.0
    m = mpmath.mpf(x)
    return float((m * mpmath.cosh(m) - mpmath.sinh(m)) / m**2)


class TestModifiedSphericalBessel:
    """Tests for i0, i1 and k0"""

    @pytest.mark.parametrize("x", ARGUMENTS)
    def test_i0_matches_high_precision(self, x):
        """Test that i0 agrees with a 40-digit reference"""
        assert mod_sph_bessel_i0(x) == pytest.approx(_i0_exact(x), rel=1e-14)

    @pytest.mark.parametrize("x", ARGUMENTS)
    def test_i1_matches_high_precision(self, x):
        """Test that i1 agrees with a 40-digit reference, including near the series switch"""
        assert mod_sph_bessel_i1(x) == pytest.approx(_i1_exact(x), rel=1e-13, abs=1e-300)

    @pytest.mark.parametrize("x", LOG_ARGUMENTS)
    def test_log_spaced_against_reference(self, x):
        """Test i0, i1 and k0 against 40-digit values on log-spaced points in [1e-8, 50]"""
        m = mpmath.mpf(float(x))
        assert mod_sph_bessel_i0(x) == pytest.approx(_i0_exact(x), rel=1e-14)
        assert mod_sph_bessel_i1(x) == pytest.approx(_i1_exact(x), rel=1e-13)
        assert mod_sph_bessel_k0(x) == pytest.approx(float(mpmath.exp(-m) / m), rel=1e-14)

    @pytest.mark.parametrize("x", [1e-3, 0.01, 0.3, 0.5, 1.0, 5.0, 20.0, 50.0])
    def test_i0_derivative_is_i1(self, x):
        """Test that a central difference of i0 reproduces i1"""
        h = 1e-5 * max(x, 1.0)
        slope = (mod_sph_bessel_i0(x + h) - mod_sph_bessel_i0(x - h)) / (2.0 * h)
        assert slope == pytest.approx(mod_sph_bessel_i1(x), rel=1e-6)

    def test_values_at_origin(self):
        """Test that i0(0) = 1 and i1(0) = 0 exactly"""
        assert mod_sph_bessel_i0(0.0) == 1.0
        assert mod_sph_bessel_i1(0.0) == 0.0

    def test_k0_at_ln2(self):
        """Test k0(ln 2) = (1/2) / ln 2"""
        assert mod_sph_bessel_k0(math.log(2.0)) == pytest.approx(0.7213475204444817, rel=1e-15)

    def test_array_input_keeps_shape(self):
        """Test that array input gives an array of the same shape"""
        x = np.linspace(0.0, 3.0, 12).reshape(3, 4)
        out = mod_sph_bessel_i0(x)
        assert isinstance(out, np.ndarray)
        assert out.shape == (3, 4)

    def test_scalar_input_gives_float(self):
        """Test that scalar input gives a plain float"""
        assert isinstance(mod_sph_bessel_i1(0.3), float)

    def test_small_argument_limit_of_i1(self):
        """Test i1(x) / x -> 1/3 as x -> 0"""
        assert mod_sph_bessel_i1(1e-6) / 1e-6 == pytest.approx(1.0 / 3.0, rel=1e-12)

    @pytest.mark.parametrize("func", [mod_sph_bessel_i0, mod_sph_bessel_i1])
    def test_negative_argument_rejected(self, func):
        """Test that negative arguments raise DomainError"""
        with pytest.raises(DomainError):
            func(-0.1)

    @pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
    def test_k0_rejects_nonpositive(self, bad):
        """Test that k0 is undefined at and below the origin"""
        with pytest.raises(DomainError):
            mod_sph_bessel_k0(bad)

    def test_non_finite_rejected(self):
        """Test that infinite arguments raise DomainError"""
        with pytest.raises(DomainError):
            mod_sph_bessel_i0(float("inf"))


def _random_banded_dense(n: int, lower: int, upper: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    dense = np.zeros((n, n))
    for i in range(n):
        for j in range(max(0, i - lower), min(n, i + upper + 1)):
            dense[i, j] = rng.uniform(-1.0, 1.0)
    return dense


class TestBandedMatrix:
    """Tests for band storage"""

    def test_dense_round_trip(self):
        """Test that from_dense followed by to_dense is the identity on banded input"""
        dense = _random_banded_dense(9, 2, 3, seed=1)
        m = BandedMatrix.from_dense(dense, 2, 3)
        np.testing.assert_array_equal(m.to_dense(), dense)

    def test_add_accumulates(self):
        """Test that add accumulates into an element"""
        m = BandedMatrix.zeros(5, 1, 1)
        m.add(2, 3, 1.5)
        m.add(2, 3, 0.5)
        assert m.get(2, 3) == 2.0

    def test_add_outside_band_rejected(self):
        """Test that writing outside the band raises ShapeError"""
        m = BandedMatrix.zeros(6, 1, 1)
        with pytest.raises(ShapeError):
            m.add(0, 3, 1.0)

    def test_get_outside_band_is_zero(self):
        """Test that elements outside the band read as zero"""
        m = BandedMatrix.zeros(6, 1, 1)
        assert m.get(5, 0) == 0.0

    def test_matvec_matches_dense(self):
        """Test banded matvec against the dense product"""
        dense = _random_banded_dense(12, 2, 2, seed=2)
        y = np.arange(12, dtype=float)
        m = BandedMatrix.from_dense(dense, 2, 2)
        np.testing.assert_allclose(m.matvec(y), dense @ y, rtol=1e-14, atol=1e-13)

    def test_clear_row(self):
        """Test that clear_row zeroes every stored element of a row"""
        m = BandedMatrix.from_dense(np.ones((5, 5)), 1, 1)
        m.clear_row(2)
        assert np.all(m.to_dense()[2] == 0.0)

    def test_wrong_storage_shape_rejected(self):
        """Test that inconsistent band storage raises ShapeError"""
        with pytest.raises(ShapeError):
            BandedMatrix(4, 1, 1, np.zeros((2, 4)))

    def test_zeros_clamps_bandwidths(self):
        """Test that bandwidths wider than the matrix are clamped"""
        m = BandedMatrix.zeros(3, 5, 5)
        assert (m.lower_bandwidth, m.upper_bandwidth) == (2, 2)


class TestSolveBanded:
    """Tests for the pivoting banded solver"""

    @pytest.mark.parametrize("lower,upper", [(1, 1), (2, 2), (3, 2), (2, 14)])
    def test_matches_dense_solve(self, lower, upper):
        """Test agreement with a dense LU solve"""
        n = 40
        dense = _random_banded_dense(n, lower, upper, seed=lower * 10 + upper)
        dense += np.diag(np.full(n, float(lower + upper + 1)))
        rhs = np.linspace(-1.0, 1.0, n)
        expected = np.linalg.solve(dense, rhs)
        got = solve_banded(BandedMatrix.from_dense(dense, lower, upper), rhs)
        np.testing.assert_allclose(got, expected, rtol=1e-9, atol=1e-11)

    def test_needs_pivoting(self):
        """Test a system whose leading diagonal entry is zero"""
        dense = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 2.0]])
        rhs = np.array([1.0, 2.0, 3.0])
        got = solve_banded(BandedMatrix.from_dense(dense, 1, 1), rhs)
        np.testing.assert_allclose(dense @ got, rhs, atol=1e-14)

    def test_singular_system_raises(self):
        """Test that a singular matrix raises SingularSystemError"""
        m = BandedMatrix.zeros(4, 1, 1)
        with pytest.raises(SingularSystemError):
            solve_banded(m, np.ones(4))

    def test_singular_error_is_linalg_error(self):
        """Test that SingularSystemError is also a numpy LinAlgError"""
        with pytest.raises(np.linalg.LinAlgError):
            solve_banded(BandedMatrix.zeros(3, 1, 1), np.ones(3))

    def test_rhs_length_checked(self):
        """Test that a wrong-length rhs raises ShapeError"""
        m = BandedMatrix.from_dense(np.eye(4), 1, 1)
        with pytest.raises(ShapeError):
            solve_banded(m, np.ones(3))

    def test_non_finite_entries_rejected(self):
        """Test that NaN in the matrix raises SingularSystemError"""
        m = BandedMatrix.from_dense(np.eye(4), 1, 1)
        m.entries[1, 0] = np.nan
        with pytest.raises(SingularSystemError):
            solve_banded(m, np.ones(4))


class TestGrid1D:
    """Tests for uniform grids"""

    def test_nodes_and_spacing(self):
        """Test node placement and spacing"""
        grid = Grid1D(0.0, 1.0, 11)
        assert grid.h == pytest.approx(0.1)
        assert grid.nodes[0] == 0.0
        assert grid.nodes[-1] == 1.0
        assert np.allclose(np.diff(grid.nodes), 0.1)

    def test_refined_grid_contains_coarse_nodes(self):
        """Test that refinement halves h and keeps every coarse node"""
        grid = Grid1D(0.0, 2.0, 9)
        fine = grid.refined()
        assert fine.n == 17
        np.testing.assert_allclose(fine.nodes[::2], grid.nodes, atol=1e-15)

    def test_too_few_nodes_rejected(self):
        """Test that fewer than 3 nodes raise ShapeError"""
        with pytest.raises(ShapeError):
            Grid1D(0.0, 1.0, 2)

    def test_reversed_bounds_rejected(self):
        """Test that decreasing bounds raise DomainError"""
        with pytest.raises(DomainError):
            Grid1D(1.0, 0.0, 5)


class TestFieldProfile:
    """Tests for sampled profiles"""

    def test_length_must_match_grid(self):
        """Test that a sample count differing from the grid raises ShapeError"""
        with pytest.raises(ShapeError):
            FieldProfile(Grid1D(0.0, 1.0, 5), np.zeros(4))

    def test_linear_interpolation(self):
        """Test that at() interpolates linearly between nodes"""
        profile = FieldProfile.from_function(Grid1D(0.0, 1.0, 3), lambda x: 2.0 * x)
        assert profile.at(0.25) == pytest.approx(0.5)

    def test_constant_broadcast(self):
        """Test that a scalar-valued function is broadcast over the grid"""
        profile = FieldProfile.from_function(Grid1D(0.0, 1.0, 4), lambda x: 3.0)
        np.testing.assert_array_equal(profile.values, np.full(4, 3.0))

    def test_resample_onto_finer_grid(self):
        """Test that resampling a linear profile is exact"""
        grid = Grid1D(0.0, 1.0, 5)
        profile = FieldProfile.from_function(grid, lambda x: 1.0 - x)
        fine = profile.resampled(grid.refined())
        np.testing.assert_allclose(fine.values, 1.0 - grid.refined().nodes, atol=1e-15)


class TestSimpson:
    """Tests for composite Simpson quadrature"""

    def test_exact_for_cubics(self):
        """Test exactness on a cubic with only two panels"""
        profile = FieldProfile.from_function(Grid1D(0.0, 1.0, 3), lambda x: x**3 - x + 2.0)
        assert integrate_simpson(profile) == pytest.approx(0.25 - 0.5 + 2.0, abs=1e-15)

    def test_fourth_order_convergence(self):
        """Test that halving h cuts the error by about 16"""
        errors = []
        for n in (11, 21, 41):
            profile = FieldProfile.from_function(Grid1D(0.0, math.pi, n), np.sin)
            errors.append(abs(integrate_simpson(profile) - 2.0))
        assert math.log2(errors[0] / errors[1]) == pytest.approx(4.0, abs=0.2)
        assert math.log2(errors[1] / errors[2]) == pytest.approx(4.0, abs=0.2)

    def test_even_sample_count_rejected(self):
        """Test that an even number of samples raises ShapeError"""
        with pytest.raises(ShapeError):
            integrate_simpson(FieldProfile.constant(Grid1D(0.0, 1.0, 4), 1.0))


class TestFiniteDifferences:
    """Tests for first and second derivative stencils"""

    def test_first_derivative_exact_for_quadratics(self):
        """Test that the stencils differentiate quadratics exactly, ends included"""
        grid = Grid1D(0.0, 1.0, 9)
        x = grid.nodes
        np.testing.assert_allclose(
            first_derivative(3 * x**2 - x, grid.h), 6 * x - 1, rtol=0, atol=1e-12
        )

    def test_second_derivative_exact_for_cubics(self):
        """Test that the stencils give exact second derivatives of cubics, ends included"""
        grid = Grid1D(0.0, 1.0, 9)
        x = grid.nodes
        np.testing.assert_allclose(
            second_derivative(x**3 + x**2, grid.h), 6 * x + 2, rtol=0, atol=1e-9
        )

    def test_second_derivative_needs_four_samples(self):
        """Test that fewer than 4 samples raise ShapeError"""
        with pytest.raises(ShapeError):
            second_derivative([1.0, 2.0, 3.0], 0.5)
