"""
Dimensional coefficients and the dimensionless groups derived from them

This module handles:
- The dimensional parameter set (defaults from the reference tissue table)
- Carman-Kozeny permeability
- Non-dimensionalization into the groups every solver consumes
"""

import math
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .error_handler import DomainError
from .logger import get_logger

logger = get_logger(__name__)

PHI_SUM_TOLERANCE = 1e-12

# Porosity at and above which the Carman-Kozeny constant drops to 2.
CK_HIGH_POROSITY = 0.9
CK_HIGH = 2.0
CK_LOW = 4.0


def carman_kozeny_muK(phi_f: float, C_k: float, D_c: float) -> float:
    """
    Permeability times fluid viscosity from the Carman-Kozeny relation

        mu_f K = phi_f^3 / (C_k (1 - phi_f)^2 D_c^2)

    Args:
        phi_f: Fluid volume fraction in (0, 1)
        C_k: Carman-Kozeny constant
        D_c: Cell-diameter parameter

    Raises:
        DomainError: If phi_f is outside (0, 1) or a constant is not positive
    """
    if not (0.0 < phi_f < 1.0):
        raise DomainError(
            f"Carman-Kozeny needs 0 < phi_f < 1 (singular at phi_f = 1), got {phi_f}",
            phi_f=phi_f,
        )
    if not (C_k > 0.0 and D_c > 0.0):
        raise DomainError(f"C_k and D_c must be positive, got C_k={C_k}, D_c={D_c}")
    return phi_f**3 / (C_k * (1.0 - phi_f) ** 2 * D_c**2)


def default_carman_kozeny_constant(phi_f: float) -> float:
    """C_k = 2 for porosity >= 0.9, otherwise 4 (middle of the 3-5 range)."""
    return CK_HIGH if phi_f >= CK_HIGH_POROSITY else CK_LOW


class DimensionalParams(BaseModel):
    """
    Physical coefficients in SI units.

    Defaults reproduce the reference tissue table; L, V, a0, P_a and
    alpha_s_exp are not tabulated and are documented as inferred.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    rho_f: float = Field(default=1050.0, gt=0, description="Fluid mass density (kg/m^3)")
    rho_s: float = Field(default=1100.0, gt=0, description="Solid mass density (kg/m^3)")
    c_f: float = Field(default=3617.0, gt=0, description="Fluid specific heat (J/(kg K))")
    c_s: float = Field(default=2500.0, gt=0, description="Solid specific heat (J/(kg K))")
    kappa_f: float = Field(default=5.0, gt=0, description="Fluid heat conductivity (W/(m K))")
    kappa_s: float = Field(default=5.0, gt=0, description="Solid heat conductivity (W/(m K))")
    h_exch: float = Field(default=10.0, gt=0, description="Heat exchange coefficient (W/(m^3 K))")
    mu_f: float = Field(default=0.0026, gt=0, description="Fluid viscosity (Pa s)")
    mu_s: float = Field(default=2.0e6, gt=0, description="Solid shear modulus (Pa)")
    lambda_f: float = Field(default=0.004, gt=0, description="Fluid first Lame viscosity (Pa s)")
    chi_s: float = Field(default=0.8e6, gt=0, description="Solid first Lame parameter (Pa)")
    gamma_f: float = Field(default=0.5, gt=0, description="Fluid modulus of heat dissipation")
    gamma_s: float = Field(default=0.5, gt=0, description="Solid modulus of heat dissipation")
    alpha_s_exp: float = Field(
        default=0.5, gt=0, description="Solid thermal expansion coefficient (Pa/K), inferred"
    )
    phi_f: float = Field(default=0.3, gt=0, lt=1, description="Fluid volume fraction")
    phi_s: float = Field(default=0.7, gt=0, lt=1, description="Solid volume fraction")
    a0: float = Field(default=1.0, gt=0, description="Transmural conductance (1/(Pa s)), inferred")
    P_a: float = Field(
        default=2.6e-9,
        gt=0,
        description="Ambient pressure (Pa), inferred so that a1/a2 = 1 at the default scales",
    )
    L: float = Field(default=1.0, gt=0, description="Characteristic length (m), inferred")
    V: float = Field(default=1.0e-6, gt=0, description="Characteristic velocity (m/s), inferred")
    D_c: float = Field(default=25.0, gt=0, description="Carman-Kozeny cell-diameter parameter")
    C_k: Optional[float] = Field(
        default=None, gt=0, description="Carman-Kozeny constant; None selects it from phi_f"
    )
    muK: Optional[float] = Field(
        default=None, gt=0, description="Permeability times viscosity, overriding Carman-Kozeny"
    )
    drag_K: float = Field(default=1.0, gt=0, description="Drag coefficient K (m^2)")
    beta_p: float = Field(default=0.001, gt=0, description="Pressure coefficient")

    @model_validator(mode="before")
    @classmethod
    def close_volume_fractions(cls, data: Any) -> Any:
        """
        Fill in the missing volume fraction so that phi_f + phi_s = 1.

        Raises:
            ValueError: If both fractions are given and do not sum to one
        """
        if not isinstance(data, dict):
            return data
        has_f = data.get("phi_f") is not None
        has_s = data.get("phi_s") is not None
        if has_f and not has_s:
            data = {**data, "phi_s": 1.0 - float(data["phi_f"])}
            logger.debug(
                "phi_s set from volume-fraction closure",
                extra={"phi_f": float(data["phi_f"]), "phi_s": data["phi_s"]},
            )
        elif has_s and not has_f:
            data = {**data, "phi_f": 1.0 - float(data["phi_s"])}
            logger.debug(
                "phi_f set from volume-fraction closure",
                extra={"phi_f": data["phi_f"], "phi_s": float(data["phi_s"])},
            )
        return data

    @model_validator(mode="after")
    def check_volume_fractions(self) -> "DimensionalParams":
        total = self.phi_f + self.phi_s
        if abs(total - 1.0) > PHI_SUM_TOLERANCE:
            raise ValueError(
                f"phi_f + phi_s must equal 1, got {self.phi_f} + {self.phi_s} = {total}"
            )
        return self

    @property
    def resolved_C_k(self) -> float:
        return self.C_k if self.C_k is not None else default_carman_kozeny_constant(self.phi_f)

    @property
    def mu_f_K(self) -> float:
        """mu_f K, either supplied directly or from Carman-Kozeny."""
        if self.muK is not None:
            return self.muK
        return carman_kozeny_muK(self.phi_f, self.resolved_C_k, self.D_c)

    def replace(self, **changes: Any) -> "DimensionalParams":
        """Validated copy with some fields changed; a lone phi_f/phi_s change keeps the closure."""
        data = self.model_dump()
        if "phi_f" in changes and "phi_s" not in changes:
            data.pop("phi_s")
        if "phi_s" in changes and "phi_f" not in changes:
            data.pop("phi_f")
        data.update(changes)
        return DimensionalParams(**data)


class NondimGroups(BaseModel):
    """Dimensionless groups of the reduced and full models."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    Da: float = Field(gt=0, description="Darcy number")
    a1: float = Field(description="Pressure source constant a0 L P_a / V")
    a2: float = Field(description="Pressure coefficient mu_f a0")
    lambda1: float = Field(description="Fluid Lame ratio lambda_f / mu_f")
    lambda2: float = Field(description="Solid Lame ratio chi_s / mu_s")
    delta_s: float = Field(description="Thermal expansion to viscous forces")
    Pe_f: float = Field(ge=0, description="Fluid Peclet number")
    Pe_s: float = Field(ge=0, description="Solid Peclet number")
    N: float = Field(ge=0, description="Heat exchange number")
    kappa_ratio: float = Field(gt=0, description="Conductivity ratio kappa_f / kappa_s")
    W: float = Field(description="Temperature scale ratio W_s / W_f")
    delta_pf: float = Field(description="Fluid dissipation constant")
    delta_ps: float = Field(description="Solid dissipation constant")
    zeta: float = Field(description="Viscous to shear stress ratio")
    phi_f: float = Field(gt=0, lt=1, description="Fluid volume fraction")
    phi_s: float = Field(gt=0, lt=1, description="Solid volume fraction")

    @field_validator("*")
    @classmethod
    def must_be_finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("dimensionless groups must be finite")
        return v

    def replace(self, **changes: float) -> "NondimGroups":
        return NondimGroups(**{**self.model_dump(), **changes})


GROUP_FORMULAS: dict[str, str] = {
    "Da": "mu_f K / L^2",
    "a1": "a0 L P_a / V",
    "a2": "mu_f a0",
    "lambda1": "lambda_f / mu_f",
    "lambda2": "chi_s / mu_s",
    "delta_s": "L alpha_s W_s / (V mu_f)",
    "Pe_f": "rho_f c_f L^2 V / (kappa_f L)",
    "Pe_s": "rho_s c_s L^2 V / (kappa_s L)",
    "N": "h L^2 / kappa_f",
    "kappa_ratio": "kappa_f / kappa_s",
    "W": "W_s / W_f",
    "delta_pf": "L gamma_f V / (kappa_f W_f)",
    "delta_ps": "gamma_s V^2 mu_f / (mu_s kappa_s W_s)",
    "zeta": "V mu_f / (mu_s L)",
    "phi_f": "phi_f",
    "phi_s": "phi_s",
}


def _ratio(numerator: float, denominator: float, group: str) -> float:
    if denominator == 0.0 or not math.isfinite(denominator):
        raise DomainError(f"cannot form {group}: zero or non-finite denominator", group=group)
    return numerator / denominator


def temperature_scales(p: DimensionalParams) -> tuple[float, float]:
    """W_f, W_s = gamma_{f,s} V L / kappa_{f,s}."""
    W_f = _ratio(p.gamma_f * p.V * p.L, p.kappa_f, "W_f")
    W_s = _ratio(p.gamma_s * p.V * p.L, p.kappa_s, "W_s")
    return W_f, W_s


def nondimensionalize(p: DimensionalParams) -> NondimGroups:
    """
    Derive every dimensionless group from the dimensional set

    Pressure constants follow the closed-form convention: a1 = a0 L P_a / V is
    the source constant and a2 = mu_f a0 multiplies the pressure.

    Args:
        p: Validated dimensional parameters

    Returns:
        NondimGroups

    Raises:
        DomainError: If a defining denominator vanishes
    """
    muK = p.mu_f_K
    W_f, W_s = temperature_scales(p)

    groups = NondimGroups(
        Da=_ratio(muK, p.L**2, "Da"),
        a1=_ratio(p.a0 * p.L * p.P_a, p.V, "a1"),
        a2=p.mu_f * p.a0,
        lambda1=_ratio(p.lambda_f, p.mu_f, "lambda1"),
        lambda2=_ratio(p.chi_s, p.mu_s, "lambda2"),
        delta_s=_ratio(p.L * p.alpha_s_exp * W_s, p.V * p.mu_f, "delta_s"),
        Pe_f=_ratio(p.rho_f * p.c_f * p.L**2 * p.V, p.kappa_f * p.L, "Pe_f"),
        Pe_s=_ratio(p.rho_s * p.c_s * p.L**2 * p.V, p.kappa_s * p.L, "Pe_s"),
        N=_ratio(p.h_exch * p.L**2, p.kappa_f, "N"),
        kappa_ratio=_ratio(p.kappa_f, p.kappa_s, "kappa_ratio"),
        W=_ratio(W_s, W_f, "W"),
        delta_pf=_ratio(p.L * p.gamma_f * p.V, p.kappa_f * W_f, "delta_pf"),
        delta_ps=_ratio(p.gamma_s * p.V**2 * p.mu_f, p.mu_s * p.kappa_s * W_s, "delta_ps"),
        zeta=_ratio(p.V * p.mu_f, p.mu_s * p.L, "zeta"),
        phi_f=p.phi_f,
        phi_s=p.phi_s,
    )
    logger.debug(
        "Derived dimensionless groups",
        extra={"Da": groups.Da, "Pe_f": groups.Pe_f, "N": groups.N, "kappa": groups.kappa_ratio},
    )
    return groups


# Parameter overrides behind the steady-state result figures.
FIGURE_CASES: dict[str, dict[str, float]] = {
    "A2": {"phi_f": 0.9, "kappa_f": 5.0, "kappa_s": 5.0, "h_exch": 10.0},
    "A3": {"phi_f": 0.5, "kappa_f": 5.0, "kappa_s": 5.0, "h_exch": 10.0},
    "A4": {"phi_f": 0.9, "kappa_f": 5.0, "kappa_s": 5.0, "h_exch": 1.0},
    "A5": {"phi_f": 0.9, "kappa_f": 5.0, "kappa_s": 1.0, "h_exch": 1.0},
    "A6": {"phi_f": 0.9, "kappa_f": 1.0, "kappa_s": 5.0, "h_exch": 1.0},
    "A8": {"phi_f": 0.8, "muK": 0.0583, "kappa_f": 5.0, "h_exch": 1.0},
}


def figure_params(name: str, base: Optional[DimensionalParams] = None) -> DimensionalParams:
    """Dimensional parameters for one of the named result figures."""
    try:
        overrides = FIGURE_CASES[name]
    except KeyError:
        raise DomainError(
            f"unknown figure case '{name}', expected one of {sorted(FIGURE_CASES)}"
        ) from None
    return (base or DimensionalParams()).replace(**overrides)
