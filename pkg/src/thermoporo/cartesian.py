"""
Closed-form 1D steady elastohydrodynamics of the reduced model

This module handles:
- Integration constants of the velocity and displacement solutions
- Fluid velocity, its derivative and the interstitial pressure
- Solid displacement, in closed form (Xi = 0) or by a finite-difference
  solve that feels the solid temperature gradient (Xi = 1)

Conventions: a1 is the pressure source constant and a2 multiplies the
pressure, so the mass balance reads (phi_f v_f)' = a1 - a2 P.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike

from .error_handler import ArgumentError, DomainError, OverflowGuardError
from .logger import get_logger
from .numerics import (
    BandedMatrix,
    FieldProfile,
    FloatArray,
    Grid1D,
    RealLike,
    first_derivative,
    solve_banded,
    unwrap_like,
)
from .parameters import NondimGroups

logger = get_logger(__name__)

# e^x overflows a double just above 709.78
MAX_ALPHA_F = 700.0


@dataclass(frozen=True)
class CartesianCoefficients:
    """Constants of the closed-form solution on [0, 1]."""

    alpha_f: float
    alpha_s: float
    A: float
    B: float
    C: float
    D: float
    a1: float
    a2: float
    lambda1: float
    lambda2: float
    phi_f: float
    phi_s: float
    Da: float
    delta_s: float
    Xi: int

    def __post_init__(self) -> None:
        if self.Xi not in (0, 1):
            raise DomainError(f"Xi must be 0 or 1, got {self.Xi}", Xi=self.Xi)
        if not self.alpha_f > 0:
            raise DomainError(f"alpha_f must be positive, got {self.alpha_f}")


def compute_coefficients(g: NondimGroups, Xi: int = 0) -> CartesianCoefficients:
    """
    Derive the integration constants from the dimensionless groups

    A and B solve v_f(0) = 1 and v_f'(1) = 0 exactly:
    A = e^{-alpha_f} / (2 cosh alpha_f), B = e^{alpha_f} / (2 cosh alpha_f).
    alpha_s makes the solid momentum residual of the general solution vanish
    identically; C and D clamp both ends.

    Args:
        g: Dimensionless groups (Da > 0)
        Xi: Thermal coupling switch of the displacement equation

    Returns:
        CartesianCoefficients

    Raises:
        DomainError: If the groups give no real positive decay rate
        OverflowGuardError: If alpha_f exceeds the double-precision range of e^x
    """
    if g.a2 == 0.0:
        raise DomainError("a2 must be nonzero", group="a2")

    stiffness = 2.0 + g.lambda1 + g.phi_f**2 / g.a2
    alpha_sq = 1.0 / (g.Da * stiffness)
    if not (alpha_sq > 0 and math.isfinite(alpha_sq)):
        raise DomainError(
            f"alpha_f^2 = {alpha_sq} is not positive; check lambda1, a2 and Da",
            Da=g.Da,
            lambda1=g.lambda1,
            a2=g.a2,
        )
    alpha_f = math.sqrt(alpha_sq)
    if alpha_f > MAX_ALPHA_F:
        raise OverflowGuardError(
            f"alpha_f = {alpha_f:.6g} overflows e^alpha_f; rescale L or V to reduce 1/Da",
            alpha_f=alpha_f,
            Da=g.Da,
        )

    two_cosh = 2.0 * math.cosh(alpha_f)
    A = math.exp(-alpha_f) / two_cosh
    B = math.exp(alpha_f) / two_cosh

    alpha_s = -(g.phi_f * g.phi_s * alpha_sq / g.a2 + 1.0 / g.Da) / ((2.0 + g.lambda2) * alpha_f)
    ratio = alpha_s / alpha_f
    D = -ratio * (A + B)
    C = -ratio * (A * math.exp(alpha_f) + B * math.exp(-alpha_f)) - D

    logger.debug(
        "Cartesian coefficients computed",
        extra={"alpha_f": alpha_f, "alpha_s": alpha_s, "Xi": Xi},
    )
    return CartesianCoefficients(
        alpha_f=alpha_f,
        alpha_s=alpha_s,
        A=A,
        B=B,
        C=C,
        D=D,
        a1=g.a1,
        a2=g.a2,
        lambda1=g.lambda1,
        lambda2=g.lambda2,
        phi_f=g.phi_f,
        phi_s=g.phi_s,
        Da=g.Da,
        delta_s=g.delta_s,
        Xi=Xi,
    )


def _unit_interval(x: ArrayLike) -> FloatArray:
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError("x must lie in [0, 1]", x=np.asarray(x).tolist())
    return arr


def _exponentials(c: CartesianCoefficients, x: FloatArray) -> tuple[FloatArray, FloatArray]:
    # A e^{ax} and B e^{-ax} without forming e^{a} on its own
    a = c.alpha_f
    damp = 1.0 + math.exp(-2.0 * a)
    growing = np.exp(a * (x - 1.0)) * math.exp(-a) / damp
    decaying = np.exp(-a * x) / damp
    return growing, decaying


def fluid_velocity(c: CartesianCoefficients, x: ArrayLike) -> RealLike:
    """v_f(x) = A e^{alpha_f x} + B e^{-alpha_f x}."""
    grow, decay = _exponentials(c, _unit_interval(x))
    return unwrap_like(grow + decay, x)


def fluid_velocity_derivative(c: CartesianCoefficients, x: ArrayLike) -> RealLike:
    """v_f'(x) = alpha_f (A e^{alpha_f x} - B e^{-alpha_f x}); zero at x = 1."""
    grow, decay = _exponentials(c, _unit_interval(x))
    return unwrap_like(c.alpha_f * (grow - decay), x)


def pressure(c: CartesianCoefficients, x: ArrayLike) -> RealLike:
    """
    P(x) = (a1 - phi_f v_f'(x)) / a2

    Raises:
        DomainError: If a2 is zero
    """
    if c.a2 == 0.0:
        raise DomainError("pressure is undefined for a2 = 0", group="a2")
    dv = np.asarray(fluid_velocity_derivative(c, x), dtype=np.float64)
    return unwrap_like((c.a1 - c.phi_f * dv) / c.a2, x)


def pressure_derivative(c: CartesianCoefficients, x: ArrayLike) -> RealLike:
    """P'(x) = -phi_f alpha_f^2 v_f(x) / a2."""
    v = np.asarray(fluid_velocity(c, x), dtype=np.float64)
    return unwrap_like(-c.phi_f * c.alpha_f**2 * v / c.a2, x)


def _closed_form_displacement(c: CartesianCoefficients, x: FloatArray) -> FloatArray:
    v = np.asarray(fluid_velocity(c, x), dtype=np.float64)
    return (c.alpha_s / c.alpha_f) * v + c.C * x + c.D


def solve_coupled_displacement(
    c: CartesianCoefficients, theta_s: FieldProfile, grid: Optional[Grid1D] = None
) -> FieldProfile:
    """
    Finite-difference solve of the thermally coupled displacement

        -(2 + lambda2) u'' = -phi_s P' + v_f / Da - delta_s theta_s'

    with u(0) = u(1) = 0, three-point central differences and a tridiagonal
    banded solve. theta_s is linearly interpolated when its grid differs.

    Args:
        c: Coefficients
        theta_s: Solid temperature on a grid covering [0, 1]
        grid: Solve grid; defaults to theta_s's grid

    Returns:
        Displacement profile on the solve grid
    """
    if not theta_s.grid.covers(0.0, 1.0):
        raise ArgumentError("theta_s must be sampled on a grid covering [0, 1]")
    grid = grid or theta_s.grid
    if not grid.covers(0.0, 1.0):
        raise ArgumentError("displacement grid must cover [0, 1]")

    x = grid.nodes
    h = grid.h
    dtheta = first_derivative(theta_s.resampled(grid).values, h)
    forcing = (
        -c.phi_s * np.asarray(pressure_derivative(c, x))
        + np.asarray(fluid_velocity(c, x)) / c.Da
        - c.delta_s * dtheta
    )

    n = grid.n
    stiffness = (2.0 + c.lambda2) / h**2
    m = BandedMatrix.zeros(n, 1, 1)
    rhs = np.zeros(n)
    m.add(0, 0, 1.0)
    m.add(n - 1, n - 1, 1.0)
    for i in range(1, n - 1):
        m.add(i, i - 1, -stiffness)
        m.add(i, i, 2.0 * stiffness)
        m.add(i, i + 1, -stiffness)
        rhs[i] = forcing[i]

    u = solve_banded(m, rhs)
    return FieldProfile(grid, u)


def displacement_profile(
    c: CartesianCoefficients,
    grid: Grid1D,
    theta_s: Optional[FieldProfile] = None,
) -> FieldProfile:
    """Solid displacement sampled on ``grid`` for either value of Xi."""
    if c.Xi == 0:
        return FieldProfile(grid, _closed_form_displacement(c, _unit_interval(grid.nodes)))
    if theta_s is None:
        raise ArgumentError("theta_s is required when Xi = 1")
    return solve_coupled_displacement(c, theta_s, grid)


def displacement(
    c: CartesianCoefficients,
    x: ArrayLike,
    theta_s: Optional[FieldProfile] = None,
    grid: Optional[Grid1D] = None,
) -> RealLike:
    """
    Solid displacement u_s(x)

    Xi = 0 evaluates u_s = (alpha_s/alpha_f) v_f + C x + D. Xi = 1 solves the
    coupled equation on ``grid`` (default: theta_s's grid) and interpolates.

    Args:
        c: Coefficients
        x: Points in [0, 1]
        theta_s: Solid temperature, required for Xi = 1
        grid: Solve grid for Xi = 1

    Raises:
        ArgumentError: If Xi = 1 and theta_s is missing
        DomainError: If x lies outside [0, 1]
    """
    points = _unit_interval(x)
    if c.Xi == 0:
        return unwrap_like(_closed_form_displacement(c, points), x)
    if theta_s is None:
        raise ArgumentError("theta_s is required when Xi = 1")
    profile = solve_coupled_displacement(c, theta_s, grid)
    return unwrap_like(np.asarray(profile.at(points)), x)
