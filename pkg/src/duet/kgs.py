"""Three-dimensional Klein-Gordon-Schroedinger system with Yukawa coupling.

    i u_t + Lap u = -gamma n u,
    n_tt + alpha beta (1 - Lap) n = -beta gamma |u|^2.

The local solver is the same whole-interval Picard iteration as the Zakharov
solver, with the Klein-Gordon flow of frequency ``sqrt(alpha beta (1 + |xi|^2))``
evaluated per mode (hyperbolic when ``alpha beta < 0``).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateCouplings, EmptyTrajectory, ZeroBeta
from .propagators import (
    Trajectory,
    cumulative_kg,
    cumulative_schrodinger,
    kg_coeffs,
    kg_frequency_squared,
    schrodinger_symbol,
    uniform_nodes,
)
from .spectral import Field, Grid, WavePair, rough_field, g_norm, sobolev_norm, spacetime_norm
from .zakharov import PicardParams, dealiased_product, dealiased_square, picard_iterate, mass

STRICHARTZ_PAIRS = ((10 / 3, 10 / 3), (8.0, 12 / 5), (np.inf, 2.0))


@dataclass(frozen=True, eq=False)
class KGSState:
    time: float
    u: Field
    wave: WavePair
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.u.grid != self.wave.grid:
            raise ValueError("u and the wave pair live on different grids")
        object.__setattr__(self, "u", self.u.physical())
        object.__setattr__(self, "time", float(self.time))
        for name in ("alpha", "beta", "gamma"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @property
    def n(self) -> Field:
        return self.wave.n

    @property
    def nt(self) -> Field:
        return self.wave.nt

    @property
    def couplings(self) -> tuple:
        return (self.alpha, self.beta, self.gamma)

    @classmethod
    def zeros(cls, grid: Grid, time: float = 0.0, couplings=(1.0, 1.0, 1.0)) -> "KGSState":
        return cls(time, Field(grid, np.zeros(grid.shape, dtype=complex)), WavePair.zeros(grid), *couplings)


def free_flow(s: KGSState, t: float) -> KGSState:
    """Linear evolution (no coupling) of both fields by ``t``."""
    grid = s.grid
    u = Field(grid, grid.inverse(s.u.coeffs * schrodinger_symbol(grid, t)))
    omega2 = kg_frequency_squared(grid, s.alpha * s.beta)
    n, nt = kg_coeffs(s.n.coeffs, s.nt.coeffs, omega2, t)
    wave = WavePair.from_arrays(grid, grid.inverse(n), grid.inverse(nt))
    return replace(s, time=s.time + t, u=u, wave=wave)


def local_solve(s0: KGSState, T: float, p: PicardParams = PicardParams()) -> Trajectory:
    """Picard solve on [t0, t0 + T]; returns the ``M + 1`` substep states."""
    if not T > 0:
        raise ValueError("interval length must be positive")
    grid = s0.grid
    alpha, beta, gamma = s0.couplings
    M = p.substeps
    h = T / M
    offsets = np.linspace(0.0, T, M + 1)
    omega2 = kg_frequency_squared(grid, alpha * beta)

    u_free = schrodinger_symbol(grid, offsets) * s0.u.coeffs
    n_free, nt_free = kg_coeffs(s0.n.coeffs, s0.nt.coeffs, omega2, offsets)

    def update(iterate):
        u_hat, n_hat, _ = iterate
        forcing = gamma * dealiased_product(grid, n_hat, u_hat)
        u_new = u_free + 1j * cumulative_schrodinger(forcing, h, grid)
        source = -beta * gamma * dealiased_square(grid, u_hat)
        dn, dnt = cumulative_kg(source, h, grid, alpha * beta)
        return u_new, n_free + dn, nt_free + dnt

    (u_hat, n_hat, nt_hat), iterations, history = picard_iterate(
        update, (u_free, n_free, nt_free), p)

    times = uniform_nodes(s0.time, T, M)
    u_phys = grid.inverse(u_hat)
    n_phys = grid.inverse(n_hat).real
    nt_phys = grid.inverse(nt_hat).real
    states = tuple(
        KGSState(t, Field(grid, u_phys[m]), WavePair.from_arrays(grid, n_phys[m], nt_phys[m]),
                 alpha, beta, gamma)
        for m, t in enumerate(times))
    return Trajectory(times, states, iterations, tuple(history))


def _energy(s: KGSState, alpha: float, beta: float, gamma: float) -> float:
    grid = s.grid
    gradient = grid.spectral_sum(s.u.coeffs, grid.xi_squared)
    kinetic = grid.spectral_sum(s.nt.coeffs) / (2 * beta)
    potential = 0.5 * alpha * grid.spectral_sum(s.n.coeffs, 1.0 + grid.xi_squared)
    cubic = gamma * float(np.sum(s.n.values * np.abs(s.u.values) ** 2) * grid.cell_volume)
    return gradient + kinetic + potential + cubic


def hamiltonian(s: KGSState) -> float:
    """int |grad u|^2 + n_t^2/(2 beta) + alpha/2 |<grad> n|^2 + gamma n |u|^2 dx."""
    if s.beta == 0:
        raise ZeroBeta("the energy functional needs beta != 0")
    return _energy(s, s.alpha, s.beta, s.gamma)


def conserved_energy(s: KGSState) -> float:
    """Energy functional that the evolution above actually conserves.

    With the sign conventions of the evolution equations the invariant is
    ``hamiltonian`` with all three couplings negated.
    """
    if s.beta == 0:
        raise ZeroBeta("the energy functional needs beta != 0")
    return _energy(s, -s.alpha, -s.beta, -s.gamma)


def _lattice_wavenumber(grid: Grid, k) -> np.ndarray:
    k = np.asarray(k, dtype=float).reshape(-1)
    if k.shape != (grid.ndim,):
        raise ValueError(f"k must have {grid.ndim} components")
    modes = k * np.asarray(grid.periods) / (2 * np.pi)
    if not np.allclose(modes, np.round(modes), atol=1e-9):
        raise ValueError("k is not a lattice wavenumber of the grid")
    if np.any(np.abs(np.round(modes)) >= np.asarray(grid.shape) // 2):
        raise ValueError("k is not resolved by the grid")
    return k


def plane_wave_frequency(A: float, k, alpha: float, gamma: float) -> float:
    return float(np.sum(np.square(k)) + gamma**2 * A**2 / alpha)


def plane_wave(A: float, k, grid: Grid, couplings=(1.0, 1.0, 1.0), t: float = 0.0) -> KGSState:
    """Exact solution ``u = A exp(i(k.x - omega t))`` with constant ``n = -gamma A^2 / alpha``."""
    alpha, beta, gamma = (float(c) for c in couplings)
    if alpha == 0 or beta == 0:
        raise DegenerateCouplings("plane waves need alpha * beta != 0")
    k = _lattice_wavenumber(grid, k)
    omega = plane_wave_frequency(A, k, alpha, gamma)
    phase = sum(kj * xj for kj, xj in zip(k, grid.coordinates))
    u = np.broadcast_to(A * np.exp(1j * (phase - omega * t)), grid.shape)
    n = np.full(grid.shape, -gamma * A * A / alpha)
    return KGSState(t, Field(grid, u.copy()), WavePair.from_arrays(grid, n, np.zeros(grid.shape)),
                    alpha, beta, gamma)


@dataclass(frozen=True)
class StrichartzReport:
    """Space-time norms of ``u`` on one trajectory."""

    l10_3: float
    l8_l12_5: float
    linf_l2: float
    density_l1_hm1: float
    duration: float

    @property
    def embedding_constant(self) -> float:
        """Empirical C in || |u|^2 ||_{L^1 H^-1} <= C T^(3/4) ||u||^2_{L^8 L^12/5}."""
        bound = self.duration**0.75 * self.l8_l12_5**2
        return self.density_l1_hm1 / bound if bound > 0 else 0.0

    def as_dict(self) -> dict:
        return {"L10/3_L10/3": self.l10_3, "L8_L12/5": self.l8_l12_5, "Linf_L2": self.linf_l2,
                "density_L1_H-1": self.density_l1_hm1, "duration": self.duration,
                "embedding_constant": self.embedding_constant}


def strichartz_report(tr: Trajectory) -> StrichartzReport:
    if len(tr) < 2:
        raise EmptyTrajectory("need at least two snapshots")
    fields = [(t, s.u) for t, s in tr]
    norms = [spacetime_norm(fields, q, r) for q, r in STRICHARTZ_PAIRS]
    densities = np.array([sobolev_norm(Field(u.grid, np.abs(u.values) ** 2), -1.0) for _, u in fields])
    return StrichartzReport(*norms, float(np.trapezoid(densities, tr.times)), tr.end - tr.start)


def random_state(grid: Grid, rng: np.random.Generator, u_l2: float = 1.0, wave_norm: float = 1.0,
                 couplings=(1.0, 1.0, 1.0), eps: float = 0.01) -> KGSState:
    """Seeded data at the edge of L^2 x L^2 x H^-1, scaled to the given norms."""
    u = rough_field(grid, 0.0, rng, eps, real=False)
    pair = WavePair(rough_field(grid, 0.0, rng, eps), rough_field(grid, -1.0, rng, eps))
    u = u * (u_l2 / sobolev_norm(u, 0.0))
    return KGSState(0.0, u, pair * (wave_norm / g_norm(pair)), *couplings)


__all__ = [
    "KGSState", "local_solve", "free_flow", "hamiltonian", "conserved_energy", "plane_wave",
    "plane_wave_frequency", "StrichartzReport", "strichartz_report", "random_state", "mass",
]
