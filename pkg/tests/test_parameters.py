"""
Tests for dimensional parameters and dimensionless groups
"""

import math

import pytest
from pydantic import ValidationError

from thermoporo.error_handler import DomainError
from thermoporo.parameters import (
    FIGURE_CASES,
    GROUP_FORMULAS,
    DimensionalParams,
    NondimGroups,
    carman_kozeny_muK,
    default_carman_kozeny_constant,
    figure_params,
    nondimensionalize,
    temperature_scales,
)


class TestCarmanKozeny:
    """Tests for the Carman-Kozeny permeability"""

    def test_high_porosity_value(self):
        """Test phi_f = 0.9, C_k = 2, D_c = 25 gives 0.05832"""
        assert carman_kozeny_muK(0.9, 2.0, 25.0) == pytest.approx(0.05832, rel=1e-12)

    def test_moderate_porosity_value(self):
        """Test phi_f = 0.5, C_k = 4, D_c = 25 gives 0.0002"""
        assert carman_kozeny_muK(0.5, 4.0, 25.0) == pytest.approx(0.0002, rel=1e-12)

    @pytest.mark.parametrize("phi_f", [0.0, 1.0, 1.2, -0.1])
    def test_porosity_outside_unit_interval_rejected(self, phi_f):
        """Test that phi_f outside (0, 1) raises DomainError"""
        with pytest.raises(DomainError):
            carman_kozeny_muK(phi_f, 4.0, 25.0)

    def test_nonpositive_constant_rejected(self):
        """Test that a zero C_k raises DomainError"""
        with pytest.raises(DomainError):
            carman_kozeny_muK(0.5, 0.0, 25.0)

    @pytest.mark.parametrize("phi_f,expected", [(0.95, 2.0), (0.9, 2.0), (0.89, 4.0), (0.3, 4.0)])
    def test_auto_constant(self, phi_f, expected):
        """Test the C_k auto rule: 2 at high porosity, otherwise 4"""
        assert default_carman_kozeny_constant(phi_f) == expected


class TestDimensionalParams:
    """Tests for the DimensionalParams model"""

    def test_defaults(self, default_params):
        """Test the tabulated defaults"""
        assert default_params.rho_f == 1050.0
        assert default_params.c_f == 3617.0
        assert default_params.phi_f + default_params.phi_s == pytest.approx(1.0)

    def test_phi_s_closed_from_phi_f(self):
        """Test that phi_s is filled in from phi_f"""
        p = DimensionalParams(phi_f=0.4, phi_s=None)
        assert p.phi_s == pytest.approx(0.6, abs=1e-15)

    def test_phi_f_closed_from_phi_s(self):
        """Test that phi_f is filled in from phi_s"""
        p = DimensionalParams(phi_s=0.25, phi_f=None)
        assert p.phi_f == pytest.approx(0.75, abs=1e-15)

    def test_inconsistent_fractions_rejected(self):
        """Test that fractions not summing to one are rejected"""
        with pytest.raises(ValidationError, match="must equal 1"):
            DimensionalParams(phi_f=0.4, phi_s=0.5)

    def test_nonpositive_coefficient_rejected(self):
        """Test that a nonpositive conductivity is rejected"""
        with pytest.raises(ValidationError):
            DimensionalParams(kappa_s=0.0)

    def test_unknown_field_rejected(self):
        """Test that unknown fields are rejected"""
        with pytest.raises(ValidationError):
            DimensionalParams(kappa_x=1.0)

    def test_replace_keeps_closure(self):
        """Test that changing phi_f alone moves phi_s with it"""
        p = DimensionalParams().replace(phi_f=0.9)
        assert p.phi_s == pytest.approx(0.1)

    def test_muK_override_bypasses_carman_kozeny(self):
        """Test that an explicit muK wins over Carman-Kozeny"""
        assert DimensionalParams(muK=0.0583).mu_f_K == 0.0583

    def test_explicit_C_k_used(self):
        """Test that an explicit C_k replaces the auto rule"""
        p = DimensionalParams(phi_f=0.5, C_k=5.0)
        assert p.mu_f_K == pytest.approx(0.125 / (5.0 * 0.25 * 625.0))

    def test_immutable(self, default_params):
        """Test that parameter sets are frozen"""
        with pytest.raises(ValidationError):
            default_params.kappa_f = 1.0


class TestNondimensionalize:
    """Tests for the derived groups"""

    def test_high_porosity_figure_groups(self):
        """Test Da = 0.05832, Pe_f = 0.75957 and N = 2 for phi_f = 0.9, C_k = 2"""
        g = nondimensionalize(DimensionalParams(phi_f=0.9, C_k=2.0, D_c=25.0))
        assert g.Da == pytest.approx(0.05832, rel=1e-12)
        assert g.Pe_f == pytest.approx(0.75957, rel=1e-12)
        assert g.N == 2.0

    def test_moderate_porosity_darcy_number(self):
        """Test Da = 0.0002 for phi_f = 0.5, C_k = 4"""
        g = nondimensionalize(DimensionalParams(phi_f=0.5, C_k=4.0))
        assert g.Da == pytest.approx(0.0002, rel=1e-12)

    def test_pressure_constants_balance_at_defaults(self, default_groups):
        """Test that the inferred P_a gives a1 / a2 = 1"""
        assert default_groups.a1 / default_groups.a2 == pytest.approx(1.0, rel=1e-12)

    def test_lame_ratios(self, default_groups):
        """Test lambda1 = lambda_f / mu_f and lambda2 = chi_s / mu_s"""
        assert default_groups.lambda1 == pytest.approx(0.004 / 0.0026)
        assert default_groups.lambda2 == pytest.approx(0.4)

    def test_expansion_group(self, default_params, default_groups):
        """Test delta_s = L alpha_s W_s / (V mu_f)"""
        _, W_s = temperature_scales(default_params)
        expected = default_params.alpha_s_exp * W_s / (default_params.V * default_params.mu_f)
        assert default_groups.delta_s == pytest.approx(expected, rel=1e-14)

    def test_expansion_group_scales_with_expansion_coefficient(self, default_params):
        """Test that delta_s is linear in alpha_s_exp"""
        g1 = nondimensionalize(default_params.replace(alpha_s_exp=0.2))
        g2 = nondimensionalize(default_params.replace(alpha_s_exp=0.4))
        assert g2.delta_s == pytest.approx(2.0 * g1.delta_s, rel=1e-14)

    def test_temperature_scale_ratio(self, default_params):
        """Test W = kappa_f / kappa_s when the dissipation moduli are equal"""
        g = nondimensionalize(default_params.replace(kappa_s=2.0))
        assert g.W == pytest.approx(5.0 / 2.0)
        assert g.kappa_ratio == pytest.approx(2.5)

    def test_all_groups_finite(self, params_factory):
        """Test that randomized parameter sets give finite groups"""
        params_factory.reseed(7)
        for params in params_factory.build_batch(20):
            assert params.phi_f + params.phi_s == pytest.approx(1.0, abs=1e-12)
            g = nondimensionalize(params)
            assert all(math.isfinite(v) for v in g.model_dump().values())

    def test_random_groups_positive_darcy(self, params_factory):
        """Test that randomized groups keep Da and N positive"""
        params_factory.reseed(11)
        g = params_factory.build_groups(h_exch=5.0)
        assert g.Da > 0
        assert g.N > 0

    def test_every_group_has_a_formula(self, default_groups):
        """Test that every group has a documented definition"""
        assert set(GROUP_FORMULAS) == set(default_groups.model_dump())

    def test_non_finite_group_rejected(self, default_groups):
        """Test that non-finite groups are rejected"""
        with pytest.raises(ValidationError):
            default_groups.replace(delta_s=float("inf"))

    def test_groups_frozen(self, default_groups):
        """Test that groups are immutable"""
        assert isinstance(default_groups, NondimGroups)
        with pytest.raises(ValidationError):
            default_groups.Da = 1.0


class TestFigureParams:
    """Tests for the named figure parameter sets"""

    @pytest.mark.parametrize("name", sorted(FIGURE_CASES))
    def test_every_case_builds(self, name):
        """Test that every named case validates and nondimensionalizes"""
        assert nondimensionalize(figure_params(name)).Da > 0

    def test_a2_matches_caption_values(self):
        """Test that case A2 gives Da = 0.0583 and N = 2"""
        g = nondimensionalize(figure_params("A2"))
        assert g.Da == pytest.approx(0.0583, abs=1e-4)
        assert g.N == 2.0

    def test_a3_darcy_number(self):
        """Test that case A3 gives Da = 0.0002"""
        assert nondimensionalize(figure_params("A3")).Da == pytest.approx(0.0002, abs=2e-5)

    def test_unknown_case_rejected(self):
        """Test that an unknown case name raises DomainError"""
        with pytest.raises(DomainError):
            figure_params("Z9")

    def test_case_with_extra_change(self, params_factory):
        """Test that a named case accepts further parameter changes"""
        params = params_factory.figure("A4", kappa_s=2.0)
        assert params.h_exch == 1.0
        assert params.kappa_s == 2.0
