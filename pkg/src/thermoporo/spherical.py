"""
Closed-form steady hydrodynamics in a sphere

Pressure, fluid velocity and solid displacement of the spherically symmetric
sub-problem, and the volumetric flow rate through the unit sphere. The
singular modes (k0 and r^-2) are dropped by regularity at the centre.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike

from .error_handler import DomainError
from .logger import get_logger
from .numerics import (
    FieldProfile,
    FloatArray,
    Grid1D,
    RealLike,
    integrate_simpson,
    mod_sph_bessel_i0,
    mod_sph_bessel_i1,
    unwrap_like,
)
from .parameters import NondimGroups

logger = get_logger(__name__)

DEFAULT_QUADRATURE_NODES = 101


@dataclass(frozen=True)
class SphericalParams:
    """
    Eigenvalue and constants of the spherical solution.

    ``lam`` satisfies lam^2 = a / (phi_f^2 Da), which is the value for which the
    closed form satisfies both the Darcy relation and the mass balance.
    """

    lam: float
    phi_f: float
    Da: float
    varrho: float

    def __post_init__(self) -> None:
        values = (self.lam, self.phi_f, self.Da, self.varrho)
        if not all(math.isfinite(v) for v in values):
            raise DomainError("spherical parameters must be finite")
        if self.lam <= 0:
            raise DomainError(f"lambda must be positive, got {self.lam}", lam=self.lam)
        if self.varrho <= 0:
            raise DomainError(f"varrho must be positive, got {self.varrho}", varrho=self.varrho)
        if not (0.0 < self.phi_f < 1.0):
            raise DomainError(f"phi_f must lie in (0, 1), got {self.phi_f}", phi_f=self.phi_f)
        if self.Da <= 0:
            raise DomainError(f"Da must be positive, got {self.Da}", Da=self.Da)

    @classmethod
    def from_groups(
        cls, groups: NondimGroups, a: Optional[float] = None, varrho: Optional[float] = None
    ) -> "SphericalParams":
        """
        Build the spherical constants from dimensionless groups.

        Args:
            groups: Dimensionless groups
            a: Transmural source coefficient; defaults to a2
            varrho: Combined elasticity constant; defaults to 2 + lambda2

        Raises:
            DomainError: If the resulting eigenvalue is not real and positive
        """
        a = groups.a2 if a is None else a
        varrho = 2.0 + groups.lambda2 if varrho is None else varrho
        lam_sq = a / (groups.phi_f**2 * groups.Da)
        if not (lam_sq > 0 and math.isfinite(lam_sq)):
            raise DomainError(f"lambda^2 = {lam_sq} is not positive and finite", a=a)
        return cls(lam=math.sqrt(lam_sq), phi_f=groups.phi_f, Da=groups.Da, varrho=varrho)

    @property
    def source_coefficient(self) -> float:
        """a = lam^2 phi_f^2 Da."""
        return self.lam**2 * self.phi_f**2 * self.Da


def _radii(r: ArrayLike) -> FloatArray:
    arr = np.atleast_1d(np.asarray(r, dtype=np.float64))
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError("radius must lie in [0, 1]", radius=np.asarray(r).tolist())
    return arr


def pressure(sp: SphericalParams, r: ArrayLike) -> RealLike:
    """P(r) = 1 - i0(lam r) / i0(lam); zero on the surface."""
    x = _radii(r)
    return unwrap_like(1.0 - mod_sph_bessel_i0(sp.lam * x) / mod_sph_bessel_i0(sp.lam), r)


def velocity(sp: SphericalParams, r: ArrayLike) -> RealLike:
    """V_f(r) = phi_f Da lam i1(lam r) / i0(lam); equals -phi_f Da dP/dr."""
    x = _radii(r)
    scale = sp.phi_f * sp.Da * sp.lam / mod_sph_bessel_i0(sp.lam)
    return unwrap_like(scale * mod_sph_bessel_i1(sp.lam * x), r)


def displacement(sp: SphericalParams, r: ArrayLike) -> RealLike:
    """U_r(r) = [r i1(lam) - i1(lam r)] / (lam varrho i0(lam)); clamped at r = 1."""
    x = _radii(r)
    denom = sp.lam * sp.varrho * mod_sph_bessel_i0(sp.lam)
    return unwrap_like((x * mod_sph_bessel_i1(sp.lam) - mod_sph_bessel_i1(sp.lam * x)) / denom, r)


def flow_rate(sp: SphericalParams, quadrature_nodes: int = DEFAULT_QUADRATURE_NODES) -> float:
    """
    Volumetric flow rate Q_t = (2 pi Da phi_f lam / i0(lam)) * int_0^1 r i1(lam r) dr

    The integral is evaluated with composite Simpson on ``quadrature_nodes``
    equally spaced radii.

    Args:
        sp: Spherical constants
        quadrature_nodes: Odd number of samples (at least 3)

    Returns:
        Q_t, nonnegative

    Raises:
        ShapeError: If the node count is even or below 3
    """
    grid = Grid1D(0.0, 1.0, quadrature_nodes)
    integrand = FieldProfile.from_function(grid, lambda r: r * mod_sph_bessel_i1(sp.lam * r))
    integral = integrate_simpson(integrand)
    prefactor = 2.0 * math.pi * sp.Da * sp.phi_f * sp.lam / mod_sph_bessel_i0(sp.lam)
    q = prefactor * integral
    logger.debug(
        f"Flow rate evaluated with {quadrature_nodes} nodes",
        extra={"lam": sp.lam, "Q_t": q},
    )
    return q


def profiles(sp: SphericalParams, grid: Grid1D) -> dict[str, FieldProfile]:
    """Sample P, V_f and U_r on a grid over [0, 1]."""
    if not grid.covers(0.0, 1.0):
        raise DomainError(
            f"spherical profiles need a grid on [0, 1], got [{grid.x_min}, {grid.x_max}]"
        )
    return {
        "P": FieldProfile.from_function(grid, lambda r: pressure(sp, r)),
        "v_f": FieldProfile.from_function(grid, lambda r: velocity(sp, r)),
        "u_s": FieldProfile.from_function(grid, lambda r: displacement(sp, r)),
    }
