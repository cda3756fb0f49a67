"""
Steady two-temperature heat transfer on [0, 1]

This module handles:
- The coupled second-order system for (theta_f, theta_s), the primary route
- Recovery of theta_f from theta_s through the solid equation
- The fourth-order single-unknown equation for theta_s, derived from the
  coupled system by eliminating theta_f, as a cross-check

Implemented equations:

    Pe_f (theta_f v_f)' - theta_f'' + N (theta_f - kappa theta_s) + v_f' = 0
    -theta_s'' + N (kappa theta_s - theta_f) = 0

with theta_f(0) = theta_s(0) = 1 and theta_f'(1) = theta_s'(1) = 0.

The elimination gives theta_f = kappa theta_s - theta_s''/N. Boundary data of
the fourth-order problem written elsewhere with +theta_s''/N has the opposite
sign; both routes here use the sign consistent with the solid equation above.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cartesian import (
    CartesianCoefficients,
    fluid_velocity,
    fluid_velocity_derivative,
)
from .error_handler import DomainError, ShapeError, SingularSystemError, SolverError
from .logger import get_logger
from .numerics import (
    BandedMatrix,
    FieldProfile,
    FloatArray,
    Grid1D,
    second_derivative,
    solve_banded,
)
from .parameters import NondimGroups

logger = get_logger(__name__)

DEFAULT_THERMAL_NODES = 201
MIN_THERMAL_NODES = 5

# Centred convection is replaced by upwinding above this cell Peclet number.
CELL_PECLET_LIMIT = 2.0


@dataclass(frozen=True)
class ThermalProblem:
    """Coefficients and imposed flow of one steady thermal solve."""

    Pe_f: float
    N: float
    kappa_ratio: float
    grid: Grid1D
    v_f: FieldProfile
    dv_f: FieldProfile

    def __post_init__(self) -> None:
        if not self.grid.covers(0.0, 1.0):
            raise DomainError(
                f"thermal grid must cover [0, 1], got [{self.grid.x_min}, {self.grid.x_max}]"
            )
        if self.v_f.grid != self.grid or self.dv_f.grid != self.grid:
            raise ShapeError("v_f and dv_f must be sampled on the problem grid")
        if not all(math.isfinite(v) for v in (self.Pe_f, self.N, self.kappa_ratio)):
            raise DomainError("thermal coefficients must be finite")
        if self.N < 0:
            raise DomainError(f"N must be nonnegative, got {self.N}", N=self.N)
        if self.kappa_ratio <= 0:
            raise DomainError(f"kappa must be positive, got {self.kappa_ratio}")
        if self.Pe_f < 0:
            raise DomainError(f"Pe_f must be nonnegative, got {self.Pe_f}", Pe_f=self.Pe_f)

    @classmethod
    def at_rest(cls, grid: Grid1D, Pe_f: float, N: float, kappa_ratio: float) -> "ThermalProblem":
        """Problem with v_f = 0 everywhere."""
        zero = FieldProfile.constant(grid, 0.0)
        return cls(Pe_f, N, kappa_ratio, grid, zero, zero)

    @classmethod
    def from_flow(
        cls, groups: NondimGroups, coeffs: CartesianCoefficients, grid: Optional[Grid1D] = None
    ) -> "ThermalProblem":
        """Problem driven by the closed-form Cartesian velocity."""
        grid = grid or Grid1D(0.0, 1.0, DEFAULT_THERMAL_NODES)
        return cls(
            Pe_f=groups.Pe_f,
            N=groups.N,
            kappa_ratio=groups.kappa_ratio,
            grid=grid,
            v_f=FieldProfile.from_function(grid, lambda x: fluid_velocity(coeffs, x)),
            dv_f=FieldProfile.from_function(grid, lambda x: fluid_velocity_derivative(coeffs, x)),
        )

    @property
    def cell_peclet(self) -> float:
        return self.Pe_f * self.v_f.max_abs() * self.grid.h

    def context(self) -> dict[str, float]:
        return {
            "Pe_f": self.Pe_f,
            "N": self.N,
            "kappa": self.kappa_ratio,
            "n": float(self.grid.n),
        }


@dataclass(frozen=True)
class SolutionBundle:
    """Profiles of one steady solve, all on the same grid."""

    grid: Grid1D
    v_f: FieldProfile
    P: FieldProfile
    u_s: FieldProfile
    theta_f: FieldProfile
    theta_s: FieldProfile
    extras: dict[str, FieldProfile] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name in ("v_f", "P", "u_s", "theta_f", "theta_s"):
            if getattr(self, name).grid != self.grid:
                raise ShapeError(f"profile '{name}' is not on the bundle grid")
        for name, profile in self.extras.items():
            if profile.grid != self.grid:
                raise ShapeError(f"profile '{name}' is not on the bundle grid")

    def composite_temperature(self, phi_f: float, phi_s: float) -> FieldProfile:
        """Volume-weighted mixture temperature phi_f theta_f + phi_s theta_s."""
        return FieldProfile(self.grid, phi_f * self.theta_f.values + phi_s * self.theta_s.values)

    def columns(self) -> dict[str, FloatArray]:
        cols = {
            "x": self.grid.nodes,
            "v_f": self.v_f.values,
            "P": self.P.values,
            "u_s": self.u_s.values,
            "theta_f": self.theta_f.values,
            "theta_s": self.theta_s.values,
        }
        cols.update({name: p.values for name, p in self.extras.items()})
        return cols


def _f(i: int) -> int:
    return 2 * i


def _s(i: int) -> int:
    return 2 * i + 1


def assemble_coupled_system(
    p: ThermalProblem, eliminate_dirichlet: bool = True
) -> tuple[BandedMatrix, FloatArray]:
    """
    Assemble the interleaved banded system of the coupled equations

    Unknown 2i is theta_f at node i and 2i+1 is theta_s, which gives two
    sub- and two super-diagonals. Convection is centred and conservative,
    d(theta v)/dx ~ (theta_{i+1} v_{i+1} - theta_{i-1} v_{i-1}) / 2h, unless
    the cell Peclet number exceeds 2, where first-order upwinding is used.
    The Neumann ends use a mirrored ghost node, so there (theta v)' reduces
    to v' theta.

    Args:
        p: Thermal problem
        eliminate_dirichlet: Move the couplings to the two inlet unknowns into
            the right-hand side, so the solve reproduces the inlet value exactly

    Returns:
        Banded matrix and right-hand side
    """
    grid = p.grid
    n, h = grid.n, grid.h
    if n < MIN_THERMAL_NODES:
        raise ShapeError(f"thermal solve needs at least {MIN_THERMAL_NODES} nodes, got {n}")

    v = p.v_f.values
    dv = p.dv_f.values
    N, kappa, pe = p.N, p.kappa_ratio, p.Pe_f
    diff = 1.0 / h**2

    upwind = p.cell_peclet > CELL_PECLET_LIMIT
    if upwind:
        logger.warning(
            f"Cell Peclet number {p.cell_peclet:.3g} exceeds {CELL_PECLET_LIMIT}; "
            "switching convection to first-order upwind",
            extra=p.context(),
        )

    m = BandedMatrix.zeros(2 * n, 2, 2)
    rhs = np.zeros(2 * n)

    m.add(_f(0), _f(0), 1.0)
    rhs[_f(0)] = 1.0
    m.add(_s(0), _s(0), 1.0)
    rhs[_s(0)] = 1.0

    for i in range(1, n - 1):
        row = _f(i)
        m.add(row, _f(i - 1), -diff)
        m.add(row, _f(i), 2.0 * diff + N)
        m.add(row, _f(i + 1), -diff)
        m.add(row, _s(i), -N * kappa)
        if upwind and v[i] < 0:
            m.add(row, _f(i), -pe * v[i] / h)
            m.add(row, _f(i + 1), pe * v[i + 1] / h)
        elif upwind:
            m.add(row, _f(i), pe * v[i] / h)
            m.add(row, _f(i - 1), -pe * v[i - 1] / h)
        else:
            m.add(row, _f(i + 1), pe * v[i + 1] / (2.0 * h))
            m.add(row, _f(i - 1), -pe * v[i - 1] / (2.0 * h))
        rhs[row] = -dv[i]

        row = _s(i)
        m.add(row, _s(i - 1), -diff)
        m.add(row, _s(i), 2.0 * diff + N * kappa)
        m.add(row, _s(i + 1), -diff)
        m.add(row, _f(i), -N)

    last = n - 1
    row = _f(last)
    m.add(row, _f(last - 1), -2.0 * diff)
    m.add(row, _f(last), 2.0 * diff + N + pe * dv[last])
    m.add(row, _s(last), -N * kappa)
    rhs[row] = -dv[last]

    row = _s(last)
    m.add(row, _s(last - 1), -2.0 * diff)
    m.add(row, _s(last), 2.0 * diff + N * kappa)
    m.add(row, _f(last), -N)

    if eliminate_dirichlet:
        for col in (_f(0), _s(0)):
            for r in range(2, min(2 * n, col + m.lower_bandwidth + 1)):
                coupling = m.get(r, col)
                if coupling != 0.0:
                    rhs[r] -= coupling * rhs[col]
                    m.add(r, col, -coupling)

    return m, rhs


def _split(y: FloatArray, grid: Grid1D) -> tuple[FieldProfile, FieldProfile]:
    return FieldProfile(grid, y[0::2].copy()), FieldProfile(grid, y[1::2].copy())


def solve_coupled_steady(p: ThermalProblem) -> tuple[FieldProfile, FieldProfile]:
    """
    Solve the coupled steady system for (theta_f, theta_s)

    Args:
        p: Thermal problem on a grid with at least 5 nodes

    Returns:
        theta_f and theta_s on the problem grid

    Raises:
        SolverError: If the discrete system is singular, with the parameter set
    """
    m, rhs = assemble_coupled_system(p)
    try:
        y = solve_banded(m, rhs)
    except SingularSystemError as e:
        raise SolverError(f"coupled thermal system is singular: {e}", **p.context()) from e

    theta_f, theta_s = _split(y, p.grid)
    logger.debug(
        "Coupled thermal system solved",
        extra={**p.context(), "theta_s_end": float(theta_s.values[-1])},
    )
    return theta_f, theta_s


def coupled_residual(
    p: ThermalProblem, theta_f: FieldProfile, theta_s: FieldProfile
) -> FloatArray:
    """Residual of the assembled coupled equations (Dirichlet rows kept in place)."""
    m, rhs = assemble_coupled_system(p, eliminate_dirichlet=False)
    y = np.empty(2 * p.grid.n)
    y[0::2] = theta_f.values
    y[1::2] = theta_s.values
    return m.matvec(y) - rhs


def recover_theta_f(theta_s: FieldProfile, N: float, kappa_ratio: float) -> FieldProfile:
    """
    theta_f = kappa theta_s - theta_s'' / N, from the solid equation

    Central differences inside, four-point one-sided O(h^2) stencils at the ends.

    Raises:
        DomainError: If N is zero (theta_f cannot be eliminated)
    """
    if N == 0.0:
        raise DomainError("theta_f cannot be recovered for N = 0", N=N)
    if not (math.isfinite(N) and math.isfinite(kappa_ratio)):
        raise DomainError("N and kappa must be finite")
    d2 = second_derivative(theta_s.values, theta_s.grid.h)
    return FieldProfile(theta_s.grid, kappa_ratio * theta_s.values - d2 / N)


# Five-point central stencils on (i-2, ..., i+2)
_D1 = np.array([0.0, -0.5, 0.0, 0.5, 0.0])
_D2 = np.array([0.0, 1.0, -2.0, 1.0, 0.0])
_D3 = np.array([-0.5, 1.0, 0.0, -1.0, 0.5])
_D4 = np.array([1.0, -4.0, 6.0, -4.0, 1.0])


def assemble_fourth_order(p: ThermalProblem) -> tuple[BandedMatrix, FloatArray]:
    """
    Assemble the fourth-order equation for theta_s

        theta'''' - Pe v theta''' - (Pe v' + N(kappa + 1)) theta''
            + Pe N kappa v theta' + Pe N kappa v' theta + N v' = 0

    with theta(0) = 1, N kappa theta(0) - theta''(0) = N (theta_f(0) = 1),
    theta'(1) = 0 and theta'''(1) = 0 (theta_f'(1) = 0).

    Unknowns are theta_{-1}, ..., theta_{n+1} for nodes 0..n-1 plus one ghost
    on the left and two on the right; the equation is imposed on nodes
    1..n-1 with five-point central stencils.

    Raises:
        DomainError: If N is zero
    """
    if p.N == 0.0:
        raise DomainError("fourth-order form needs N > 0", N=p.N)
    grid = p.grid
    n, h = grid.n, grid.h
    if n < MIN_THERMAL_NODES:
        raise ShapeError(f"thermal solve needs at least {MIN_THERMAL_NODES} nodes, got {n}")

    v = p.v_f.values
    dv = p.dv_f.values
    N, kappa, pe = p.N, p.kappa_ratio, p.Pe_f
    size = n + 3
    last = n - 1

    def col(node: int) -> int:
        return node + 1

    m = BandedMatrix.zeros(size, 3, 2)
    rhs = np.zeros(size)

    # N kappa theta_0 - theta''_0 = N
    m.add(0, col(-1), -1.0 / h**2)
    m.add(0, col(0), N * kappa + 2.0 / h**2)
    m.add(0, col(1), -1.0 / h**2)
    rhs[0] = N

    m.add(1, col(0), 1.0)
    rhs[1] = 1.0

    for i in range(1, n):
        row = i + 1
        c4 = 1.0 / h**4
        c3 = -pe * v[i] / h**3
        c2 = -(pe * dv[i] + N * (kappa + 1.0)) / h**2
        c1 = pe * N * kappa * v[i] / h
        c0 = pe * N * kappa * dv[i]
        stencil = c4 * _D4 + c3 * _D3 + c2 * _D2 + c1 * _D1
        stencil[2] += c0
        for k, coef in enumerate(stencil):
            if coef != 0.0:
                m.add(row, col(i - 2 + k), coef)
        rhs[row] = -N * dv[i]

    # theta'''(1) = 0, then theta'(1) = 0
    row = n + 1
    for k, coef in enumerate(_D3):
        if coef != 0.0:
            m.add(row, col(last - 2 + k), coef / h**3)
    row = n + 2
    m.add(row, col(last - 1), -0.5 / h)
    m.add(row, col(last + 1), 0.5 / h)

    # theta_0 = 1 is known: move its column into the right-hand side
    c0_col = col(0)
    for r in (0, 2, 3):
        coupling = m.get(r, c0_col)
        if coupling != 0.0:
            rhs[r] -= coupling
            m.add(r, c0_col, -coupling)

    return m, rhs


def solve_fourth_order(p: ThermalProblem) -> FieldProfile:
    """
    Solve the derived fourth-order equation for theta_s

    Agrees with ``solve_coupled_steady``'s theta_s up to O(h^2).

    Raises:
        DomainError: If N is zero
        SolverError: If the discrete system is singular
    """
    m, rhs = assemble_fourth_order(p)
    try:
        y = solve_banded(m, rhs)
    except SingularSystemError as e:
        raise SolverError(f"fourth-order thermal system is singular: {e}", **p.context()) from e
    return FieldProfile(p.grid, y[1 : p.grid.n + 1].copy())
