"""One-dimensional Zakharov system on a periodic grid.

    i u_t + u_xx = s n u,        n_tt - n_xx = (|u|^2)_xx,

with coupling sign ``s = +1`` for the standard system and ``s = -1`` for the
variant whose Schroedinger coupling is ``-n u``.  The local solver runs a
Picard iteration on the integral form over a whole interval at once; the iterate is the full set of
``M + 1`` substep snapshots.  Free flows are exact per mode and Duhamel
integrals use the trapezoid rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoContraction, NonzeroMeanVelocity, UnresolvedSoliton
from .propagators import (
    Trajectory,
    cumulative_schrodinger,
    cumulative_wave,
    free_wave_coeffs,
    schrodinger_symbol,
    split_wave_data,
    uniform_nodes,
)
from .spectral import Field, Grid, Grid1D, WavePair, rough_field, sobolev_norm, w_norm

# Relative tolerance for treating the mean of n_t as zero.
MEAN_VELOCITY_TOL = 1e-12
# Stop iterating once the relative change has grown this many times in a row.
DIVERGENCE_PATIENCE = 3


@dataclass(frozen=True, eq=False)
class ZakharovState:
    time: float
    u: Field
    wave: WavePair
    coupling: float = 1.0

    def __post_init__(self):
        if self.u.grid != self.wave.grid:
            raise ValueError("u and the wave pair live on different grids")
        if self.u.grid.ndim != 1:
            raise ValueError("the Zakharov state is one-dimensional")
        if self.coupling not in (1.0, -1.0):
            raise ValueError("coupling sign must be +1 or -1")
        object.__setattr__(self, "u", self.u.physical())
        object.__setattr__(self, "time", float(self.time))
        object.__setattr__(self, "coupling", float(self.coupling))

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @property
    def n(self) -> Field:
        return self.wave.n

    @property
    def nt(self) -> Field:
        return self.wave.nt

    @classmethod
    def zeros(cls, grid: Grid, time: float = 0.0, coupling: float = 1.0) -> "ZakharovState":
        return cls(time, Field(grid, np.zeros(grid.shape, dtype=complex)), WavePair.zeros(grid), coupling)


@dataclass(frozen=True)
class PicardParams:
    substeps: int = 16
    tol: float = 1e-10
    max_iter: int = 50

    def __post_init__(self):
        if int(self.substeps) != self.substeps or self.substeps < 2:
            raise ValueError("substeps must be an integer >= 2")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError("max_iter must be an integer >= 1")


def relative_change(new: np.ndarray, old: np.ndarray) -> float:
    """||new - old|| / max(||new||, ||old||); zero when both vanish."""
    scale = max(np.linalg.norm(old), np.linalg.norm(new))
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(new - old) / scale)


def picard_iterate(update, initial, params: PicardParams):
    """Iterate ``update`` from ``initial`` until the relative change is below ``tol``.

    ``update`` maps a tuple of arrays to a tuple of arrays; the change is the
    largest relative change over the tuple.  Returns ``(fixed_point,
    iterations, history)``.
    """
    current = initial
    history = []
    growth = 0
    for k in range(1, params.max_iter + 1):
        nxt = update(current)
        change = max(relative_change(a, b) for a, b in zip(nxt, current))
        history.append(change)
        current = nxt
        if change <= params.tol:
            return current, k, history
        if not np.isfinite(change):
            break
        growth = growth + 1 if len(history) > 1 and change > history[-2] else 0
        if growth >= DIVERGENCE_PATIENCE:
            raise NoContraction(f"Picard change grew {growth} times in a row", k, history)
    raise NoContraction(f"no convergence after {len(history)} Picard iterations", len(history), history)


def dealiased_product(grid: Grid, a_hat: np.ndarray, b_hat: np.ndarray) -> np.ndarray:
    """Spectral coefficients of P(P a * P b) with P the two-thirds truncation."""
    mask = grid.dealias_mask
    prod = grid.inverse(a_hat * mask) * grid.inverse(b_hat * mask)
    return grid.forward(prod) * mask


def dealiased_square(grid: Grid, u_hat: np.ndarray) -> np.ndarray:
    """Spectral coefficients of P |P u|^2."""
    mask = grid.dealias_mask
    values = grid.inverse(u_hat * mask)
    return grid.forward(np.abs(values) ** 2) * mask


def local_solve(s0: ZakharovState, T: float, p: PicardParams = PicardParams()) -> Trajectory:
    """Picard solve on [t0, t0 + T]; returns the ``M + 1`` substep states."""
    if not T > 0:
        raise ValueError("interval length must be positive")
    grid = s0.grid
    xi = grid.frequencies
    coupling = s0.coupling
    M = p.substeps
    h = T / M
    offsets = np.linspace(0.0, T, M + 1)

    u_free = schrodinger_symbol(grid, offsets) * s0.u.coeffs
    n_free, nt_free = free_wave_coeffs(split_wave_data(s0.wave), offsets)

    def update(iterate):
        u_hat, n_hat, _ = iterate
        forcing = coupling * dealiased_product(grid, n_hat, u_hat)
        u_new = u_free - 1j * cumulative_schrodinger(forcing, h, grid)
        square = dealiased_square(grid, u_hat)
        dn, dnt = cumulative_wave(1j * xi * square, h, grid)
        return u_new, n_free + dn, nt_free + dnt

    (u_hat, n_hat, nt_hat), iterations, history = picard_iterate(
        update, (u_free, n_free, nt_free), p)

    times = uniform_nodes(s0.time, T, M)
    u_phys = grid.inverse(u_hat)
    n_phys = grid.inverse(n_hat).real
    nt_phys = grid.inverse(nt_hat).real
    states = tuple(
        ZakharovState(t, Field(grid, u_phys[m]),
                      WavePair.from_arrays(grid, n_phys[m], nt_phys[m]), coupling)
        for m, t in enumerate(times))
    return Trajectory(times, states, iterations, tuple(history))


# ---------------------------------------------------------------------------
# Conserved quantities
# ---------------------------------------------------------------------------


def mass(u: Field) -> float:
    return float(np.sum(np.abs(u.values) ** 2) * u.grid.cell_volume)


def velocity_potential(nt: Field) -> np.ndarray:
    """Spectral nu with nu_x = n_t and zero mean; requires mean(n_t) = 0."""
    grid = nt.grid
    values = nt.values
    mean = float(np.mean(values))
    scale = max(float(np.abs(values).max(initial=0.0)), np.finfo(float).tiny)
    if abs(mean) > MEAN_VELOCITY_TOL * scale:
        raise NonzeroMeanVelocity(f"mean of n_t is {mean:.3e}; nu is undefined")
    xi = grid.frequencies
    nonzero = xi != 0
    nu = np.zeros(grid.shape, dtype=complex)
    nu[nonzero] = nt.coeffs[nonzero] / (1j * xi[nonzero])
    return nu


def hamiltonian(s: ZakharovState) -> float:
    """int |u_x|^2 + s (n^2/2 + nu^2/2 + n |u|^2) dx with nu_x = n_t.

    For ``s = -1`` the wave energy enters with a minus sign, so the
    functional is indefinite.
    """
    grid = s.grid
    nu = velocity_potential(s.nt)
    gradient = grid.spectral_sum(s.u.coeffs, grid.xi_squared)
    quadratic = 0.5 * grid.spectral_sum(s.n.coeffs) + 0.5 * grid.spectral_sum(nu)
    cubic = float(np.sum(s.n.values * np.abs(s.u.values) ** 2) * grid.cell_volume)
    return gradient + s.coupling * (quadratic + cubic)


# ---------------------------------------------------------------------------
# Exact solutions and data generators
# ---------------------------------------------------------------------------

SOLITON_MAX_ETA_DX = 0.2
SOLITON_TAIL_TOL = 1e-12


def _wrap(x: np.ndarray, period: float) -> np.ndarray:
    return (x + period / 2) % period - period / 2


def soliton(eta: float, c: float, x0: float, grid: Grid1D, t: float = 0.0) -> ZakharovState:
    """Travelling solitary wave of the standard system, evaluated at time ``t``.

    The envelope ``eta sqrt(2(1-c^2)) sech(eta z)``, ``z = x - x0 - c t``,
    carries the carrier ``exp(i (c x / 2 + (eta^2 - c^2/4) t))``.  Positions
    are wrapped to the periodic cell.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    if not abs(c) < 1:
        raise ValueError("speed must satisfy |c| < 1")
    L = grid.period
    amplitude = eta * np.sqrt(2 * (1 - c * c))
    if eta * grid.dx > SOLITON_MAX_ETA_DX:
        raise UnresolvedSoliton(f"eta*dx = {eta * grid.dx:.3g} exceeds {SOLITON_MAX_ETA_DX}")
    centre = float(_wrap(np.asarray(x0 + c * t), L))
    edge_distance = L / 2 - abs(centre)
    if amplitude / np.cosh(eta * edge_distance) > SOLITON_TAIL_TOL:
        raise UnresolvedSoliton("soliton tails are not negligible at the domain edge")
    z = _wrap(grid.x - x0 - c * t, L)
    x_local = z + x0 + c * t
    sech = 1.0 / np.cosh(eta * z)
    phase = c * x_local / 2 + (eta**2 - c**2 / 4) * t
    u = amplitude * sech * np.exp(1j * phase)
    density = amplitude**2 * sech**2
    density_x = -2 * eta * np.tanh(eta * z) * density
    n = -density / (1 - c * c)
    nt = c * density_x / (1 - c * c)
    return ZakharovState(t, Field(grid, u), WavePair.from_arrays(grid, n, nt), 1.0)


def soliton_mass(eta: float, c: float) -> float:
    return 4 * eta * (1 - c * c)


def random_state(grid: Grid1D, rng: np.random.Generator, u_l2: float = 1.0, wave_norm: float = 1.0,
                 eps: float = 0.01, coupling: float = 1.0) -> ZakharovState:
    """Seeded data at the edge of L^2 x H^-1/2 x H^-3/2, scaled to the given norms."""
    u = rough_field(grid, 0.0, rng, eps, real=False)
    n0 = rough_field(grid, -0.5, rng, eps)
    n1 = rough_field(grid, -1.5, rng, eps)
    pair = WavePair(n0, n1)
    u = u * (u_l2 / sobolev_norm(u, 0.0))
    return ZakharovState(0.0, u, pair * (wave_norm / w_norm(pair)), coupling)


__all__ = [
    "ZakharovState", "PicardParams", "local_solve", "mass", "hamiltonian",
    "soliton", "soliton_mass", "random_state", "picard_iterate",
]
