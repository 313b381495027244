"""Exact per-mode linear flows and the retarded Duhamel integrals.

Every group action is a pointwise spectral multiplier, so the linear flows
carry no time-discretisation error.  The Duhamel integrals are trapezoid
sums over the snapshots of a :class:`Trajectory`, each integrand propagated
exactly to the evaluation time.

Two evaluation routes are provided for the Duhamel integrals:

* the public ``*_duhamel`` functions evaluate one time by a direct sum, and
  accept times between nodes (the last panel uses linear interpolation);
* the ``cumulative_*`` helpers return the integral at every node of a uniform
  trajectory at once through the recursion
  ``D_m = Phi(h) [D_{m-1} + h/2 F_{m-1}] + h/2 F_m``, which is what the
  nonlinear solvers iterate on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from .errors import EmptyTrajectory, OutOfSpan
from .spectral import SPECTRAL, Field, Grid, WavePair

_SPAN_TOL = 1e-12
_UNIFORM_RTOL = 1e-9


# ---------------------------------------------------------------------------
# Data containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ReducedWaveTriple:
    """Data of the two one-way wave components.

    ``n_plus`` and ``n_minus`` are the initial values of the right- and
    left-moving components, ``n1_low`` is the low-frequency part of the
    initial velocity.  Each component is forced by ``n1_low / 2``.
    """

    n_plus: Field
    n_minus: Field
    n1_low: Field

    @property
    def grid(self) -> Grid:
        return self.n_plus.grid


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Snapshots on uniform substeps of one local interval."""

    times: np.ndarray
    snapshots: tuple
    iterations: int = 0
    history: tuple = ()

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        snapshots = tuple(self.snapshots)
        if times.ndim != 1 or len(times) != len(snapshots):
            raise ValueError("need one time per snapshot")
        if len(times) == 0:
            raise EmptyTrajectory("trajectory has no snapshots")
        if len(times) > 1:
            steps = np.diff(times)
            if np.any(steps <= 0):
                raise ValueError("trajectory times must be strictly increasing")
            if not np.allclose(steps, steps[0], rtol=_UNIFORM_RTOL, atol=0.0):
                raise ValueError("trajectory substeps must be uniform")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "snapshots", snapshots)
        object.__setattr__(self, "history", tuple(self.history))

    @classmethod
    def sample(cls, func: Callable[[float], Any], t0: float, t1: float, substeps: int) -> "Trajectory":
        times = np.linspace(t0, t1, substeps + 1)
        return cls(times, tuple(func(t) for t in times))

    def __len__(self) -> int:
        return len(self.times)

    def __iter__(self):
        return iter(zip(self.times, self.snapshots))

    @property
    def start(self) -> float:
        return float(self.times[0])

    @property
    def end(self) -> float:
        return float(self.times[-1])

    @property
    def step(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self) > 1 else 0.0

    @property
    def substeps(self) -> int:
        return len(self) - 1

    @property
    def initial(self):
        return self.snapshots[0]

    @property
    def final(self):
        return self.snapshots[-1]


# ---------------------------------------------------------------------------
# Per-mode symbols
# ---------------------------------------------------------------------------


def schrodinger_symbol(grid: Grid, t) -> np.ndarray:
    """exp(-i t |xi|^2); ``t`` may carry leading batch axes."""
    t = np.asarray(t, dtype=float)
    return np.exp(-1j * t.reshape(t.shape + (1,) * grid.ndim) * grid.xi_squared)


def kg_frequency_squared(grid: Grid, ab: float = 1.0) -> np.ndarray:
    """Per-mode coefficient of n'' + Omega^2 n = f, Omega^2 = ab (1 + |xi|^2)."""
    return ab * (1.0 + grid.xi_squared)


def kg_kernels(omega2: np.ndarray, t):
    """``(C, S)`` with C = cos(Omega t) and S = sin(Omega t)/Omega, any sign of Omega^2.

    For Omega^2 < 0 these become cosh/sinh; for Omega^2 = 0 they are 1 and t.
    ``t`` may carry leading batch axes.
    """
    t = np.asarray(t, dtype=float)
    t = t.reshape(t.shape + (1,) * omega2.ndim)
    pos = omega2 > 0
    neg = omega2 < 0
    root = np.sqrt(np.abs(omega2))
    safe = np.where(root > 0, root, 1.0)
    c = np.where(pos, np.cos(root * t), np.where(neg, np.cosh(root * t), 1.0))
    s = np.where(pos, np.sin(root * t) / safe, np.where(neg, np.sinh(root * t) / safe, t))
    return c, s


# ---------------------------------------------------------------------------
# Linear groups
# ---------------------------------------------------------------------------


def schrodinger_group(u0: Field, t: float) -> Field:
    return Field(u0.grid, u0.coeffs * schrodinger_symbol(u0.grid, t), SPECTRAL)


def _require_1d(grid: Grid):
    if grid.ndim != 1:
        raise ValueError("the reduced wave flow is one-dimensional")


def split_wave_data(p: WavePair) -> ReducedWaveTriple:
    grid = p.grid
    _require_1d(grid)
    xi = grid.frequencies
    low = grid.low_mask
    n0 = p.n.coeffs
    n1 = p.nt.coeffs
    nu = np.zeros_like(n1, dtype=complex)
    nu[~low] = n1[~low] / (1j * xi[~low])
    n1_low = np.where(low, n1, 0.0)
    return ReducedWaveTriple(
        Field(grid, 0.5 * n0 - 0.5 * nu, SPECTRAL),
        Field(grid, 0.5 * n0 + 0.5 * nu, SPECTRAL),
        Field(grid, n1_low, SPECTRAL),
    )


def _check_sign(sign: int) -> int:
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return sign


def _transport_kernels(xi: np.ndarray, t, sign: int):
    """exp(-i s xi t) and its time integral int_0^t exp(-i s xi t') dt'."""
    t = np.asarray(t, dtype=float)
    t = t.reshape(t.shape + (1,) * xi.ndim)
    phase = np.exp(-1j * sign * xi * t)
    nonzero = xi != 0
    safe = np.where(nonzero, xi, 1.0)
    integral = np.where(nonzero, sign * (1.0 - phase) / (1j * safe), t)
    return phase, integral


def reduced_wave_coeffs(tr: ReducedWaveTriple, t, sign: int):
    """Spectral ``(W_s(t), dW_s/dt)`` of one component; ``t`` may be an array."""
    _check_sign(sign)
    xi = tr.grid.frequencies
    start = (tr.n_plus if sign == 1 else tr.n_minus).coeffs
    forcing = 0.5 * tr.n1_low.coeffs
    phase, integral = _transport_kernels(xi, t, sign)
    value = phase * start + integral * forcing
    rate = -1j * sign * xi * phase * start + phase * forcing
    return value, rate


def wave_reduced_group(tr: ReducedWaveTriple, t: float, sign: int) -> Field:
    value, _ = reduced_wave_coeffs(tr, t, sign)
    return Field(tr.grid, value, SPECTRAL)


def free_wave_coeffs(tr: ReducedWaveTriple, t):
    """Spectral ``(n, dn/dt)`` of the free wave flow, summed over both components."""
    plus, plus_rate = reduced_wave_coeffs(tr, t, 1)
    minus, minus_rate = reduced_wave_coeffs(tr, t, -1)
    return plus + minus, plus_rate + minus_rate


def wave_group(p: WavePair, t: float) -> WavePair:
    tr = split_wave_data(p)
    n, nt = free_wave_coeffs(tr, t)
    return WavePair(Field(p.grid, n, SPECTRAL), Field(p.grid, nt, SPECTRAL))


def kg_coeffs(n0: np.ndarray, n1: np.ndarray, omega2: np.ndarray, t):
    c, s = kg_kernels(omega2, t)
    return c * n0 + s * n1, -omega2 * s * n0 + c * n1


def kg_group(p: WavePair, t: float, ab: float = 1.0) -> WavePair:
    """Free flow of n'' + ab (1 - Laplacian) n = 0; ``ab = 1`` is the plain group."""
    omega2 = kg_frequency_squared(p.grid, ab)
    n, nt = kg_coeffs(p.n.coeffs, p.nt.coeffs, omega2, t)
    return WavePair(Field(p.grid, n, SPECTRAL), Field(p.grid, nt, SPECTRAL))


# ---------------------------------------------------------------------------
# Direct trapezoid Duhamel sums
# ---------------------------------------------------------------------------


def _coeffs_of(snapshot) -> np.ndarray:
    if isinstance(snapshot, Field):
        return snapshot.coeffs
    raise TypeError("Duhamel integrands must be Fields")


def _quadrature(z: Trajectory, t: float):
    """Nodes, weights and integrand coefficients of the trapezoid rule on [t0, t]."""
    t0, t1 = z.start, z.end
    scale = max(1.0, abs(t0), abs(t1))
    if t < t0 - _SPAN_TOL * scale or t > t1 + _SPAN_TOL * scale:
        raise OutOfSpan(f"t={t} outside trajectory span [{t0}, {t1}]")
    t = min(max(t, t0), t1)
    times = z.times
    inside = int(np.searchsorted(times, t, side="right"))
    nodes = list(times[:inside])
    values = [_coeffs_of(s) for s in z.snapshots[:inside]]
    if t - nodes[-1] > _SPAN_TOL * scale:
        # Partial last panel: linear interpolation of the integrand.
        theta = (t - nodes[-1]) / (times[inside] - nodes[-1])
        values.append((1 - theta) * values[-1] + theta * _coeffs_of(z.snapshots[inside]))
        nodes.append(t)
    nodes = np.array(nodes)
    weights = np.zeros(len(nodes))
    if len(nodes) > 1:
        panels = np.diff(nodes)
        weights[:-1] += panels / 2
        weights[1:] += panels / 2
    return t, nodes, weights, np.stack(values)


def _batch(arr: np.ndarray, ndim: int) -> np.ndarray:
    return arr.reshape(arr.shape + (1,) * ndim)


def schrodinger_duhamel(z: Trajectory, t: float) -> Field:
    """int_{t0}^t U(t - t') z(t') dt' by the trapezoid rule."""
    t, nodes, weights, values = _quadrature(z, t)
    grid = z.snapshots[0].grid
    kernel = schrodinger_symbol(grid, t - nodes)
    total = np.sum(_batch(weights, grid.ndim) * kernel * values, axis=0)
    return Field(grid, total, SPECTRAL)


def reduced_wave_duhamel(z: Trajectory, t: float, sign: int) -> Field:
    """(1/2) int_{t0}^t z(t', x - s (t - t')) dt' for s = sign."""
    _check_sign(sign)
    t, nodes, weights, values = _quadrature(z, t)
    grid = z.snapshots[0].grid
    _require_1d(grid)
    phase, _ = _transport_kernels(grid.frequencies, t - nodes, sign)
    total = 0.5 * np.sum(_batch(weights, 1) * phase * values, axis=0)
    return Field(grid, total, SPECTRAL)


def wave_duhamel(z: Trajectory, t: float) -> WavePair:
    """Zero-data solution of n_tt - n_xx = z_x, returned as ``(n, n_t)``.

    The Nyquist mode of ``z`` is dropped: its x-derivative has no real
    representative on the grid.
    """
    grid = z.snapshots[0].grid
    plus = reduced_wave_duhamel(z, t, 1).coeffs * grid.nyquist_free
    minus = reduced_wave_duhamel(z, t, -1).coeffs * grid.nyquist_free
    xi = grid.frequencies
    return WavePair(Field(grid, minus - plus, SPECTRAL), Field(grid, 1j * xi * (plus + minus), SPECTRAL))


def kg_duhamel(z: Trajectory, t: float, ab: float = 1.0) -> WavePair:
    """Zero-data solution of n_tt + ab (1 - Laplacian) n = z, returned as ``(n, n_t)``."""
    t, nodes, weights, values = _quadrature(z, t)
    grid = z.snapshots[0].grid
    omega2 = kg_frequency_squared(grid, ab)
    c, s = kg_kernels(omega2, t - nodes)
    w = _batch(weights, grid.ndim)
    n = np.sum(w * s * values, axis=0)
    nt = np.sum(w * c * values, axis=0)
    return WavePair(Field(grid, n, SPECTRAL), Field(grid, nt, SPECTRAL))


# ---------------------------------------------------------------------------
# Cumulative trapezoid recursions on uniform nodes
# ---------------------------------------------------------------------------


def _cumulative(forcing: np.ndarray, h: float, advance: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    out = np.zeros_like(forcing, dtype=complex)
    for m in range(1, len(forcing)):
        out[m] = advance(out[m - 1] + 0.5 * h * forcing[m - 1]) + 0.5 * h * forcing[m]
    return out


def cumulative_schrodinger(forcing: np.ndarray, h: float, grid: Grid) -> np.ndarray:
    """Spectral Duhamel integral at every node; ``forcing`` has shape (M+1, *grid.shape)."""
    step = schrodinger_symbol(grid, h)
    return _cumulative(forcing, h, lambda d: step * d)


def cumulative_wave(forcing: np.ndarray, h: float, grid: Grid):
    """Spectral ``(n, n_t)`` solving n_tt - n_xx = f_x at every node."""
    xi = grid.frequencies
    forcing = forcing * grid.nyquist_free
    plus = _cumulative(forcing, h, lambda d: np.exp(-1j * xi * h) * d)
    minus = _cumulative(forcing, h, lambda d: np.exp(1j * xi * h) * d)
    return 0.5 * (minus - plus), 0.5j * xi * (plus + minus)


def cumulative_kg(forcing: np.ndarray, h: float, grid: Grid, ab: float = 1.0):
    """Spectral ``(n, n_t)`` solving n_tt + ab (1 - Laplacian) n = f at every node."""
    omega2 = kg_frequency_squared(grid, ab)
    c, s = kg_kernels(omega2, h)
    n = np.zeros_like(forcing, dtype=complex)
    nt = np.zeros_like(forcing, dtype=complex)
    half = 0.5 * h
    for m in range(1, len(forcing)):
        a = n[m - 1]
        b = nt[m - 1] + half * forcing[m - 1]
        n[m] = c * a + s * b
        nt[m] = -omega2 * s * a + c * b + half * forcing[m]
    return n, nt


def uniform_nodes(t0: float, span: float, substeps: int) -> np.ndarray:
    return t0 + np.linspace(0.0, span, substeps + 1)


__all__: Sequence[str] = [
    "ReducedWaveTriple", "Trajectory", "schrodinger_group", "split_wave_data",
    "wave_reduced_group", "wave_group", "kg_group", "schrodinger_duhamel",
    "reduced_wave_duhamel", "wave_duhamel", "kg_duhamel", "cumulative_schrodinger",
    "cumulative_wave", "cumulative_kg", "free_wave_coeffs", "kg_coeffs",
]
