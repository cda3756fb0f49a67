"""
Shared numerical kernels

This module provides:
- Modified spherical Bessel functions i0, i1 (first kind) and k0 (second kind)
- Band-stored matrices and a pivoting banded solver
- Uniform grids, sampled profiles and composite Simpson quadrature
- Second-order finite-difference derivatives on uniform grids

Everything here is a pure function of its inputs.
"""

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
import scipy.integrate
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from .error_handler import DomainError, ShapeError, SingularSystemError
from .logger import get_logger

logger = get_logger(__name__)

FloatArray = NDArray[np.float64]
RealLike = Union[float, FloatArray]

# Below these arguments the closed forms lose digits to cancellation.
I0_SERIES_THRESHOLD = 1e-3
I1_SERIES_THRESHOLD = 0.5

PIVOT_THRESHOLD = 1e-300

_SERIES_TERMS = 12


def _as_real_array(x: ArrayLike, name: str) -> FloatArray:
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} requires finite arguments", argument=name)
    return arr


def unwrap_like(arr: FloatArray, original: ArrayLike) -> RealLike:
    if np.ndim(original) == 0:
        return float(arr.reshape(-1)[0])
    return arr.reshape(np.shape(original))


def _i0_series(x: FloatArray) -> FloatArray:
    # sum_k x^{2k} / (2k+1)!
    x2 = x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(_SERIES_TERMS):
        term = term * x2 / ((2 * k + 2) * (2 * k + 3))
        total = total + term
    return total


def _i1_series(x: FloatArray) -> FloatArray:
    # sum_k x^{2k+1} (2k+2) / (2k+3)!, leading term x/3
    x2 = x * x
    term = x / 3.0
    total = term.copy()
    for k in range(_SERIES_TERMS):
        term = term * x2 / ((2 * k + 2) * (2 * k + 5))
        total = total + term
    return total


def mod_sph_bessel_i0(x: ArrayLike) -> RealLike:
    """
    Modified spherical Bessel function of the first kind, order 0: sinh(x)/x.

    Args:
        x: Nonnegative finite argument (scalar or array)

    Returns:
        i0(x), with i0(0) = 1 exactly

    Raises:
        DomainError: If any argument is negative or not finite
    """
    arr = _as_real_array(x, "i0")
    if np.any(arr < 0):
        raise DomainError("i0 requires x >= 0", argument="i0")

    small = arr < I0_SERIES_THRESHOLD
    out = np.empty_like(arr)
    out[small] = _i0_series(arr[small])
    big = arr[~small]
    with np.errstate(over="ignore"):
        out[~small] = np.sinh(big) / big
    return unwrap_like(out, x)


def mod_sph_bessel_i1(x: ArrayLike) -> RealLike:
    """
    Modified spherical Bessel function of the first kind, order 1:
    (x cosh x - sinh x) / x^2.

    Args:
        x: Nonnegative finite argument (scalar or array)

    Returns:
        i1(x), with i1(0) = 0

    Raises:
        DomainError: If any argument is negative or not finite
    """
    arr = _as_real_array(x, "i1")
    if np.any(arr < 0):
        raise DomainError("i1 requires x >= 0", argument="i1")

    small = arr < I1_SERIES_THRESHOLD
    out = np.empty_like(arr)
    out[small] = _i1_series(arr[small])
    big = arr[~small]
    with np.errstate(over="ignore", invalid="ignore"):
        out[~small] = (big * np.cosh(big) - np.sinh(big)) / (big * big)
    return unwrap_like(out, x)


def mod_sph_bessel_k0(x: ArrayLike) -> RealLike:
    """
    Modified spherical Bessel function of the second kind, order 0: e^{-x}/x.

    Raises:
        DomainError: If any argument is not strictly positive and finite
    """
    arr = _as_real_array(x, "k0")
    if np.any(arr <= 0):
        raise DomainError("k0 is singular at the origin; requires x > 0", argument="k0")
    return unwrap_like(np.exp(-arr) / arr, x)


@dataclass
class BandedMatrix:
    """
    Square matrix in LAPACK band storage.

    ``entries[upper + i - j, j]`` holds element (i, j); everything outside the
    band is implicitly zero.
    """

    n: int
    lower_bandwidth: int
    upper_bandwidth: int
    entries: FloatArray = field(repr=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ShapeError(f"banded matrix needs n >= 1, got {self.n}")
        if self.lower_bandwidth < 0 or self.upper_bandwidth < 0:
            raise ShapeError("bandwidths must be nonnegative")
        if self.lower_bandwidth >= self.n or self.upper_bandwidth >= self.n:
            raise ShapeError(
                f"bandwidths ({self.lower_bandwidth}, {self.upper_bandwidth}) must be < n={self.n}"
            )
        expected = (self.lower_bandwidth + self.upper_bandwidth + 1, self.n)
        if self.entries.shape != expected:
            raise ShapeError(f"band storage must have shape {expected}, got {self.entries.shape}")

    @classmethod
    def zeros(cls, n: int, lower: int, upper: int) -> "BandedMatrix":
        if n > 1:
            lower, upper = min(lower, n - 1), min(upper, n - 1)
        else:
            lower = upper = 0
        return cls(n, lower, upper, np.zeros((lower + upper + 1, n)))

    @classmethod
    def from_dense(cls, dense: ArrayLike, lower: int, upper: int) -> "BandedMatrix":
        a = np.asarray(dense, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ShapeError(f"dense matrix must be square, got shape {a.shape}")
        m = cls.zeros(a.shape[0], lower, upper)
        for i in range(m.n):
            for j in range(max(0, i - m.lower_bandwidth), min(m.n, i + m.upper_bandwidth + 1)):
                m.entries[m.upper_bandwidth + i - j, j] = a[i, j]
        return m

    def in_band(self, i: int, j: int) -> bool:
        return -self.upper_bandwidth <= i - j <= self.lower_bandwidth

    def add(self, i: int, j: int, value: float) -> None:
        """Accumulate ``value`` into element (i, j)."""
        if not self.in_band(i, j):
            raise ShapeError(
                f"element ({i}, {j}) lies outside the band "
                f"({self.lower_bandwidth}, {self.upper_bandwidth})"
            )
        self.entries[self.upper_bandwidth + i - j, j] += value

    def get(self, i: int, j: int) -> float:
        if not self.in_band(i, j):
            return 0.0
        return float(self.entries[self.upper_bandwidth + i - j, j])

    def clear_row(self, i: int) -> None:
        for j in range(max(0, i - self.lower_bandwidth), min(self.n, i + self.upper_bandwidth + 1)):
            self.entries[self.upper_bandwidth + i - j, j] = 0.0

    def diagonal(self, offset: int = 0) -> FloatArray:
        """Diagonal ``offset`` (positive above the main diagonal) as a dense vector."""
        row = self.upper_bandwidth - offset
        if offset >= 0:
            return self.entries[row, offset:].copy()
        return self.entries[row, : self.n + offset].copy()

    def matvec(self, y: ArrayLike) -> FloatArray:
        v = np.asarray(y, dtype=np.float64)
        if v.shape != (self.n,):
            raise ShapeError(f"vector must have length {self.n}, got shape {v.shape}")
        out = np.zeros(self.n)
        for offset in range(-self.lower_bandwidth, self.upper_bandwidth + 1):
            d = self.diagonal(offset)
            if offset >= 0:
                out[: self.n - offset] += d * v[offset:]
            else:
                out[-offset:] += d * v[: self.n + offset]
        return out

    def to_dense(self) -> FloatArray:
        dense = np.zeros((self.n, self.n))
        for offset in range(-self.lower_bandwidth, self.upper_bandwidth + 1):
            dense += np.diag(self.diagonal(offset), k=offset)
        return dense

    def norm_inf(self) -> float:
        return float(np.max(np.sum(np.abs(self.to_dense()), axis=1)))

    def copy(self) -> "BandedMatrix":
        return BandedMatrix(
            self.n, self.lower_bandwidth, self.upper_bandwidth, self.entries.copy()
        )


def solve_banded(m: BandedMatrix, rhs: ArrayLike) -> FloatArray:
    """
    Solve ``m @ y = rhs`` by LU factorization with partial pivoting in the band.

    Pivoting widens the upper band of the factors by ``lower_bandwidth``;
    LAPACK's gbsv accounts for that growth internally.

    Args:
        m: Band-stored nonsingular matrix
        rhs: Right-hand side of length ``m.n``

    Returns:
        Solution vector

    Raises:
        ShapeError: If rhs has the wrong length
        SingularSystemError: If a pivot vanishes or the solution is not finite
    """
    b = np.asarray(rhs, dtype=np.float64)
    if b.shape != (m.n,):
        raise ShapeError(f"rhs must have length {m.n}, got shape {b.shape}")
    if not np.all(np.isfinite(m.entries)) or not np.all(np.isfinite(b)):
        raise SingularSystemError("banded system has non-finite entries", n=m.n)

    try:
        y = scipy.linalg.solve_banded(
            (m.lower_bandwidth, m.upper_bandwidth), m.entries, b, check_finite=False
        )
    except np.linalg.LinAlgError as e:
        raise SingularSystemError(f"banded system is singular: {e}", n=m.n) from e

    if not np.all(np.isfinite(y)) or np.max(np.abs(y), initial=0.0) > 1.0 / PIVOT_THRESHOLD:
        raise SingularSystemError("banded system is numerically singular", n=m.n)
    return np.asarray(y, dtype=np.float64)


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid of ``n`` nodes on [x_min, x_max]."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ShapeError(f"grid needs at least 3 nodes, got {self.n}")
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise DomainError("grid bounds must be finite")
        if self.x_max <= self.x_min:
            raise DomainError(f"grid bounds must increase: [{self.x_min}, {self.x_max}]")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def nodes(self) -> FloatArray:
        # x_min + i*h keeps the spacing uniform; pin the last node to x_max
        x = self.x_min + self.h * np.arange(self.n, dtype=np.float64)
        x[-1] = self.x_max
        return x

    def refined(self) -> "Grid1D":
        """Grid with half the spacing, containing every node of this one."""
        return Grid1D(self.x_min, self.x_max, 2 * self.n - 1)

    def covers(self, x_min: float, x_max: float) -> bool:
        return self.x_min == x_min and self.x_max == x_max


@dataclass(frozen=True)
class FieldProfile:
    """A scalar field sampled on the nodes of a grid."""

    grid: Grid1D
    values: FloatArray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (self.grid.n,):
            raise ShapeError(
                f"profile has {values.shape} samples, grid has {self.grid.n} nodes"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: Grid1D, func: Callable[[FloatArray], ArrayLike]) -> "FieldProfile":
        sampled = np.asarray(func(grid.nodes), dtype=np.float64)
        return cls(grid, np.broadcast_to(sampled, (grid.n,)).copy())

    @classmethod
    def constant(cls, grid: Grid1D, value: float) -> "FieldProfile":
        return cls(grid, np.full(grid.n, float(value)))

    def at(self, x: ArrayLike) -> RealLike:
        """Piecewise-linear interpolation of the samples."""
        points = np.asarray(x, dtype=np.float64)
        return unwrap_like(np.interp(points, self.grid.nodes, self.values), x)

    def resampled(self, grid: Grid1D) -> "FieldProfile":
        if grid == self.grid:
            return self
        return FieldProfile(grid, np.interp(grid.nodes, self.grid.nodes, self.values))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


def integrate_simpson(samples: FieldProfile) -> float:
    """
    Composite Simpson rule over the samples' grid.

    Exact for cubics on the grid; error O(h^4) for smooth integrands.

    Raises:
        ShapeError: If the sample count is even (Simpson needs an even number of panels)
    """
    n = samples.grid.n
    if n % 2 == 0:
        raise ShapeError(f"composite Simpson needs an odd number of samples, got {n}")
    return float(scipy.integrate.simpson(samples.values, dx=samples.grid.h))


def first_derivative(values: ArrayLike, h: float) -> FloatArray:
    """Central differences inside, second-order one-sided stencils at both ends."""
    return np.gradient(np.asarray(values, dtype=np.float64), h, edge_order=2)


def second_derivative(values: ArrayLike, h: float) -> FloatArray:
    """Three-point central stencil inside, four-point one-sided O(h^2) at both ends."""
    f = np.asarray(values, dtype=np.float64)
    if f.size < 4:
        raise ShapeError(f"second derivative needs at least 4 samples, got {f.size}")
    d2 = np.empty_like(f)
    d2[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h**2
    d2[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h**2
    d2[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) / h**2
    return d2
