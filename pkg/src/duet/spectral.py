"""Periodic grids, Fourier transforms, multipliers and the norm functionals.

Transform convention
--------------------
A grid of period ``L`` has nodes ``x_j = -L/2 + j*dx``.  The forward
transform approximates the continuum transform

    f^(xi) = int f(x) exp(-i xi x) dx   ~   sum_j f(x_j) exp(-i xi x_j) dx

and the inverse carries the ``dxi / (2 pi)`` weight with ``dxi = 2 pi / L``.
Spectral arrays are kept in numpy's natural FFT ordering.  With this
convention the Parseval identity reads

    sum_j |f(x_j)|^2 dx = (1 / L) sum_k |f^(xi_k)|^2

(``1/L`` becomes ``1/volume`` in several dimensions) and every norm below is
normalised so that the ``s = 0`` Sobolev norm is the L^2 norm.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence, Union

import numpy as np

from .errors import EmptyTrajectory, NonFiniteSymbol

PHYSICAL = "physical"
SPECTRAL = "spectral"

# Modes with |xi| <= 1 (boundary included) form the low-frequency block.
_LOW_CUTOFF = 1.0 + 1e-12


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid in one or more dimensions."""

    shape: tuple
    periods: tuple

    def __post_init__(self):
        shape = tuple(int(n) for n in self.shape)
        periods = tuple(float(p) for p in self.periods)
        if len(shape) != len(periods) or not shape:
            raise ValueError("shape and periods must have the same nonzero length")
        for n in shape:
            if not _is_power_of_two(n) or n < 2:
                raise ValueError(f"n_points must be a power of two >= 2, got {n}")
        for p in periods:
            if not p > 0:
                raise ValueError(f"period must be positive, got {p}")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "periods", periods)

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def spacings(self) -> tuple:
        return tuple(p / n for p, n in zip(self.periods, self.shape))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacings))

    @property
    def volume(self) -> float:
        return float(np.prod(self.periods))

    @cached_property
    def coordinates(self) -> tuple:
        """Sparse (broadcastable) node coordinates, one array per axis."""
        axes = [-p / 2 + np.arange(n) * (p / n) for n, p in zip(self.shape, self.periods)]
        return tuple(np.meshgrid(*axes, indexing="ij", sparse=True))

    @cached_property
    def mode_indices(self) -> tuple:
        """Signed integer mode numbers per axis, broadcastable."""
        axes = [np.fft.fftfreq(n, 1.0 / n).round().astype(np.int64) for n in self.shape]
        return tuple(np.meshgrid(*axes, indexing="ij", sparse=True))

    @cached_property
    def wavenumbers(self) -> tuple:
        """Angular frequencies xi = 2 pi k / L per axis, broadcastable."""
        return tuple(2 * np.pi * m / p for m, p in zip(self.mode_indices, self.periods))

    @cached_property
    def xi_squared(self) -> np.ndarray:
        total = np.zeros(self.shape)
        for k in self.wavenumbers:
            total = total + k**2
        return total

    @cached_property
    def xi_abs(self) -> np.ndarray:
        return np.sqrt(self.xi_squared)

    @cached_property
    def low_mask(self) -> np.ndarray:
        return self.xi_abs <= _LOW_CUTOFF

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Two-thirds rule: keep |m| <= N // 3 on every axis."""
        keep = np.ones(self.shape, dtype=bool)
        for m, n in zip(self.mode_indices, self.shape):
            keep = keep & (np.abs(m) <= n // 3)
        return keep

    @cached_property
    def nyquist_free(self) -> np.ndarray:
        """False on modes with m = -N/2 on some axis, where odd-order derivatives are not real."""
        keep = np.ones(self.shape, dtype=bool)
        for m, n in zip(self.mode_indices, self.shape):
            keep = keep & (m != -(n // 2))
        return keep

    @cached_property
    def _origin_phase(self) -> np.ndarray:
        # exp(-i xi x_0) with x_0 = -L/2 is exactly (-1)^m on every axis.
        phase = np.ones(self.shape)
        for m in self.mode_indices:
            phase = phase * np.where(m % 2 == 0, 1.0, -1.0)
        return phase

    @property
    def _axes(self) -> tuple:
        return tuple(range(-self.ndim, 0))

    def forward(self, values: np.ndarray) -> np.ndarray:
        """Physical -> spectral; leading axes beyond the grid are batch axes."""
        return np.fft.fftn(values, axes=self._axes) * (self.cell_volume * self._origin_phase)

    def inverse(self, coeffs: np.ndarray) -> np.ndarray:
        return np.fft.ifftn(coeffs * self._origin_phase, axes=self._axes) / self.cell_volume

    def spectral_sum(self, coeffs: np.ndarray, weight=1.0) -> float:
        """Quadrature ``(2 pi)^-d sum weight |f^|^2 dxi`` of a spectral array."""
        return float(np.sum(weight * np.abs(coeffs) ** 2) / self.volume)

    def integrate(self, values: np.ndarray) -> complex:
        return np.sum(values) * self.cell_volume

    def evaluate(self, func: Callable) -> np.ndarray:
        return np.broadcast_to(func(*self.coordinates), self.shape).copy()


class Grid1D(Grid):
    def __init__(self, n_points: int = 1024, period: float = 100.0):
        super().__init__((n_points,), (period,))

    @property
    def n_points(self) -> int:
        return self.shape[0]

    @property
    def period(self) -> float:
        return self.periods[0]

    @property
    def dx(self) -> float:
        return self.spacings[0]

    @property
    def x(self) -> np.ndarray:
        return self.coordinates[0]

    @property
    def frequencies(self) -> np.ndarray:
        return self.wavenumbers[0]


class Grid3D(Grid):
    def __init__(self, n_points: Union[int, Sequence[int]] = 32,
                 period: Union[float, Sequence[float]] = 16 * np.pi):
        shape = (n_points,) * 3 if np.isscalar(n_points) else tuple(n_points)
        periods = (period,) * 3 if np.isscalar(period) else tuple(period)
        super().__init__(shape, periods)


def make_grid(shape, periods) -> Grid:
    shape = tuple(shape)
    periods = tuple(periods)
    if len(shape) == 1:
        return Grid1D(shape[0], periods[0])
    if len(shape) == 3:
        return Grid3D(shape, periods)
    return Grid(shape, periods)


@dataclass(frozen=True, eq=False)
class Field:
    """Complex grid function tagged with its representation."""

    grid: Grid
    data: np.ndarray
    space: str = PHYSICAL

    def __post_init__(self):
        if self.space not in (PHYSICAL, SPECTRAL):
            raise ValueError(f"unknown representation {self.space!r}")
        data = np.asarray(self.data)
        if data.shape != self.grid.shape:
            raise ValueError(f"data shape {data.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "data", data)

    @classmethod
    def from_function(cls, grid: Grid, func: Callable) -> "Field":
        return cls(grid, grid.evaluate(func))

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, np.zeros(grid.shape))

    def spectral(self) -> "Field":
        return self if self.space == SPECTRAL else to_spectral(self)

    def physical(self) -> "Field":
        return self if self.space == PHYSICAL else to_physical(self)

    @property
    def values(self) -> np.ndarray:
        """Physical-space values."""
        return self.physical().data

    @property
    def coeffs(self) -> np.ndarray:
        """Spectral coefficients."""
        return self.spectral().data

    def _other(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            return other.spectral().data if self.space == SPECTRAL else other.physical().data
        return other

    def __add__(self, other):
        return Field(self.grid, self.data + self._other(other), self.space)

    def __sub__(self, other):
        return Field(self.grid, self.data - self._other(other), self.space)

    def __mul__(self, scalar):
        if isinstance(scalar, Field):
            return Field(self.grid, self.values * scalar.values)
        return Field(self.grid, self.data * scalar, self.space)

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.data, self.space)


def to_spectral(f: Field) -> Field:
    if f.space == SPECTRAL:
        raise ValueError("field is already spectral")
    return Field(f.grid, f.grid.forward(f.data), SPECTRAL)


def to_physical(f: Field) -> Field:
    if f.space == PHYSICAL:
        raise ValueError("field is already physical")
    return Field(f.grid, f.grid.inverse(f.data), PHYSICAL)


def evaluate_symbol(grid: Grid, symbol) -> np.ndarray:
    if callable(symbol):
        values = symbol(*grid.wavenumbers)
    else:
        values = symbol
    values = np.broadcast_to(np.asarray(values, dtype=complex), grid.shape)
    if not np.all(np.isfinite(values)):
        raise NonFiniteSymbol("multiplier symbol is not finite on every grid frequency")
    return values


def apply_multiplier(f: Field, symbol) -> Field:
    """Multiply ``f^`` pointwise by ``symbol``.

    ``symbol`` is either an array on the spectral grid or a callable taking one
    wavenumber array per axis.  The result is returned in spectral form.
    """
    values = evaluate_symbol(f.grid, symbol)
    return Field(f.grid, f.coeffs * values, SPECTRAL)


def low_pass(f: Field) -> Field:
    """P_L: keep |xi| <= 1."""
    return apply_multiplier(f, f.grid.low_mask.astype(float))


def high_pass(f: Field) -> Field:
    """P_H: keep |xi| > 1."""
    return apply_multiplier(f, (~f.grid.low_mask).astype(float))


def bracket(x):
    """Japanese bracket <x> = (1 + x^2)^(1/2)."""
    return np.sqrt(1.0 + np.square(x))


def sobolev_weight(grid: Grid, s: float) -> np.ndarray:
    return (1.0 + grid.xi_squared) ** s


def a_weight(grid: Grid, s: float) -> np.ndarray:
    """Flat weight on |xi| <= 1, |xi|^(2s) above."""
    xi = np.where(grid.low_mask, 1.0, grid.xi_abs)
    return np.where(grid.low_mask, 1.0, xi ** (2 * s))


def sobolev_norm(f: Field, s: float) -> float:
    return np.sqrt(f.grid.spectral_sum(f.coeffs, sobolev_weight(f.grid, s)))


def l2_norm(f: Field) -> float:
    return sobolev_norm(f, 0.0)


def a_norm(f: Field, s: float) -> float:
    return np.sqrt(f.grid.spectral_sum(f.coeffs, a_weight(f.grid, s)))


def lebesgue_norm(f: Field, r: float) -> float:
    """Physical-space L^r norm, r in [1, inf]."""
    mod = np.abs(f.values)
    if np.isinf(r):
        return float(mod.max())
    return float((np.sum(mod**r) * f.grid.cell_volume) ** (1.0 / r))


@dataclass(frozen=True, eq=False)
class WavePair:
    """``(n, dn/dt)`` of a real wave field; both stored as real physical Fields."""

    n: Field
    nt: Field

    def __post_init__(self):
        if self.n.grid != self.nt.grid:
            raise ValueError("wave components live on different grids")
        object.__setattr__(self, "n", _as_real(self.n))
        object.__setattr__(self, "nt", _as_real(self.nt))

    @classmethod
    def from_arrays(cls, grid: Grid, n, nt) -> "WavePair":
        return cls(Field(grid, np.asarray(n)), Field(grid, np.asarray(nt)))

    @classmethod
    def zeros(cls, grid: Grid) -> "WavePair":
        return cls(Field.zeros(grid), Field.zeros(grid))

    @property
    def grid(self) -> Grid:
        return self.n.grid

    def __add__(self, other: "WavePair") -> "WavePair":
        return WavePair(self.n + other.n, self.nt + other.nt)

    def __sub__(self, other: "WavePair") -> "WavePair":
        return WavePair(self.n - other.n, self.nt - other.nt)

    def __mul__(self, scalar) -> "WavePair":
        return WavePair(self.n * scalar, self.nt * scalar)

    __rmul__ = __mul__


REALITY_TOL = 1e-10


def _as_real(f: Field) -> Field:
    values = f.values
    if np.iscomplexobj(values):
        scale = max(float(np.abs(values).max(initial=0.0)), 1e-300)
        if float(np.abs(values.imag).max(initial=0.0)) > REALITY_TOL * scale:
            raise ValueError("wave field has a non-negligible imaginary part")
        values = values.real
    return Field(f.grid, np.ascontiguousarray(values, dtype=float))


def w_norm(p: WavePair) -> float:
    """(||n||_{A^-1/2}^2 + ||n_t||_{A^-3/2}^2)^(1/2)."""
    return float(np.hypot(a_norm(p.n, -0.5), a_norm(p.nt, -1.5)))


def g_norm(p: WavePair) -> float:
    """(||n||_{L^2}^2 + ||n_t||_{H^-1}^2)^(1/2)."""
    return float(np.hypot(l2_norm(p.n), sobolev_norm(p.nt, -1.0)))


def spacetime_norm(snapshots, q: float, r: float) -> float:
    """L^q_t L^r_x norm of a sampled trajectory (trapezoid rule in time).

    ``snapshots`` is a sequence of ``(time, Field)`` pairs in increasing time.
    """
    snapshots = list(snapshots)
    if len(snapshots) < 2:
        raise EmptyTrajectory("need at least two snapshots for a space-time norm")
    times = np.array([t for t, _ in snapshots], dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ValueError("snapshot times must be strictly increasing")
    spatial = np.array([lebesgue_norm(f, r) for _, f in snapshots])
    if np.isinf(q):
        return float(spatial.max())
    return float(np.trapezoid(spatial**q, times) ** (1.0 / q))


def rough_field(grid: Grid, s: float, rng: np.random.Generator, eps: float = 0.01,
                real: bool = True) -> Field:
    """Random field sitting at the edge of H^s.

    Coefficients are ``|xi|^(-s - d/2) (1 + |xi|)^(-eps)`` times uniform random
    phases, truncated at the Nyquist mode; the zero mode is set to zero.  In
    one dimension the decay is ``|xi|^(-s - 1/2)``.
    """
    xi = grid.xi_abs
    nonzero = xi > 0
    amplitude = np.zeros(grid.shape)
    amplitude[nonzero] = xi[nonzero] ** (-s - grid.ndim / 2) * (1 + xi[nonzero]) ** (-eps)
    phases = rng.uniform(0, 2 * np.pi, size=grid.shape)
    coeffs = amplitude * np.exp(1j * phases)
    values = grid.inverse(coeffs)
    if real:
        values = values.real
    return Field(grid, values)
