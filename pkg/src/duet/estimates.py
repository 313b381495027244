"""Numerical experiments on the bilinear Bourgain-space estimates.

Contents:

* scalar helpers: ``bracket``, ``lambda_plus`` and the dispersion weights;
* two supporting checks: that convolution
  keeps functions nonnegative, even and radially nonincreasing, and an
  adaptive-quadrature evaluation of ``int <y-s>^-2a <y+s>^-2b dy``;
* the trilinear forms ``S``, ``S'`` and ``W`` on a truncated (xi, tau)
  lattice, each by an O(N^4) direct sum and by FFT convolution;
* ``exponent_sweep``, which tabulates the normalised size of a form over
  exponent triples, test-function families and lattice refinements.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Sequence

import numpy as np
from scipy import integrate

from .errors import HypothesisViolated, LatticeMismatch, PreconditionViolated
from .spectral import bracket

SCHRODINGER = "schrodinger"
WAVE_PLUS = "wave_plus"
WAVE_MINUS = "wave_minus"
DISPERSIONS = (SCHRODINGER, WAVE_PLUS, WAVE_MINUS)

SCHRODINGER_FORM = "S"
HOMOGENEOUS_FORM = "Sprime"
WAVE_FORM = "Wform"
KINDS = (SCHRODINGER_FORM, HOMOGENEOUS_FORM, WAVE_FORM)

FAMILIES = ("gaussian", "characteristic", "random")


def lambda_plus(lam: float, eps: float) -> float:
    """``lam`` if positive, ``eps`` if zero, else 0."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if lam > 0:
        return lam
    if lam == 0:
        return eps
    return 0.0


def modulation(xi, tau, dispersion: str):
    """Distance ``sigma`` from the characteristic set of the given dispersion."""
    if dispersion == SCHRODINGER:
        return tau + np.square(xi)
    if dispersion == WAVE_PLUS:
        return tau + xi
    if dispersion == WAVE_MINUS:
        return tau - xi
    raise ValueError(f"unknown dispersion {dispersion!r}")


def xsb_weight(xi, tau, dispersion: str):
    return bracket(modulation(xi, tau, dispersion))


def resonance_gap(xi, xi2, tau, tau2):
    """``sigma_1 - sigma - sigma_2`` for xi_1 = xi + xi_2, tau_1 = tau + tau_2.

    ``sigma`` is the wave (plus) modulation, ``sigma_1`` and ``sigma_2`` the
    Schroedinger ones.  Works with exact rationals.
    """
    xi1, tau1 = xi + xi2, tau + tau2
    return (tau1 + xi1 * xi1) - (tau + xi) - (tau2 + xi2 * xi2)


def resonance_identity_holds(xi, xi2, tau, tau2) -> bool:
    half = Fraction(1, 2)
    xi1 = xi + xi2
    return resonance_gap(xi, xi2, tau, tau2) == (xi1 - half) ** 2 - (xi2 - half) ** 2


def check_resonance_identity(samples: int, rng: np.random.Generator, denominator: int = 997) -> int:
    """Number of failures of the resonance identity on random rational triples."""
    failures = 0
    for _ in range(samples):
        xi, xi2, tau, tau2 = (Fraction(int(v), denominator)
                              for v in rng.integers(-10**6, 10**6, size=4))
        failures += not resonance_identity_holds(xi, xi2, tau, tau2)
    return failures


# ---------------------------------------------------------------------------
# Convolution and decay-integral checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvolutionCheck:
    passed: bool
    nonnegative: bool
    even: bool
    nonincreasing: bool
    convolution: np.ndarray


def _symmetric_profile_defects(values: np.ndarray, tol: float):
    scale = max(float(np.abs(values).max(initial=0.0)), np.finfo(float).tiny)
    centre = len(values) // 2
    nonnegative = bool(np.all(values >= -tol * scale))
    even = bool(np.all(np.abs(values - values[::-1]) <= tol * scale))
    nonincreasing = bool(np.all(np.diff(values[centre:]) <= tol * scale))
    return nonnegative, even, nonincreasing


def convolution_profile_check(f: np.ndarray, g: np.ndarray, dy: float = 1.0, tol: float = 1e-10) -> ConvolutionCheck:
    """Convolve two nonnegative, even, radially nonincreasing samples and test the result.

    Both arrays are samples on the same symmetric grid of odd length centred
    at zero.  Raises ``PreconditionViolated`` if an input lacks a property.
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != g.shape or f.ndim != 1 or len(f) % 2 == 0:
        raise PreconditionViolated("samples must share one odd-length symmetric grid")
    for name, values in (("f", f), ("g", g)):
        props = _symmetric_profile_defects(values, tol)
        if not all(props):
            missing = [p for p, ok in zip(("nonnegative", "even", "nonincreasing"), props) if not ok]
            raise PreconditionViolated(f"{name} is not {', '.join(missing)}")
    conv = np.convolve(f, g, mode="same") * dy
    props = _symmetric_profile_defects(conv, tol)
    return ConvolutionCheck(all(props), *props, conv)


def decay_exponent(a_plus: float, a_minus: float, eps: float) -> float:
    return 2 * a_minus - lambda_plus(1 - 2 * a_plus, eps)


def bracket_product_integral(a_plus: float, a_minus: float, s: float, radius: float):
    """``int_{-R}^{R} <y-s>^-2a+ <y+s>^-2a- dy`` and a bound on the discarded tails."""
    def integrand(y):
        return (1 + (y - s) ** 2) ** (-a_plus) * (1 + (y + s) ** 2) ** (-a_minus)

    shift = abs(s)
    cuts = sorted({-radius, -shift, 0.0, shift, radius})
    # Extra cuts keep each panel within a few widths of a peak.
    for centre in (-shift, shift):
        for width in (1.0, 10.0, 100.0):
            for point in (centre - width, centre + width):
                if -radius < point < radius:
                    cuts.append(point)
    cuts = sorted(set(cuts))
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        value, _ = integrate.quad(integrand, lo, hi, limit=200, epsabs=0.0, epsrel=1e-12)
        total += value
    exponent = 2 * (a_plus + a_minus)
    tail = 2 * (radius - shift) ** (1 - exponent) / (exponent - 1)
    return total, tail


@dataclass(frozen=True)
class DecayCheck:
    alpha: float
    s_values: np.ndarray
    integrals: np.ndarray
    tails: np.ndarray
    ratios: np.ndarray

    @property
    def sup_ratio(self) -> float:
        return float(np.max(self.ratios))

    @property
    def finite(self) -> bool:
        return bool(np.all(np.isfinite(self.ratios)))


def decay_integral_check(a_plus: float, a_minus: float, s_values: Iterable[float], eps: float = 0.01,
                  domain_factor: float = 100.0) -> DecayCheck:
    """Sup over ``s`` of ``<s>^alpha int <y-s>^-2a+ <y+s>^-2a- dy``.

    The integral is truncated to ``|y| <= domain_factor * <s>``; the tail is
    bounded analytically and included in the ratio, which is therefore an
    upper estimate.
    """
    if not (0 <= a_minus <= a_plus and a_plus + a_minus > 0.5):
        raise HypothesisViolated("need 0 <= a_minus <= a_plus and a_plus + a_minus > 1/2")
    alpha = decay_exponent(a_plus, a_minus, eps)
    s_values = np.asarray(list(s_values), dtype=float)
    integrals, tails = [], []
    for s in s_values:
        radius = domain_factor * float(bracket(s)) + abs(s)
        value, tail = bracket_product_integral(a_plus, a_minus, s, radius)
        integrals.append(value)
        tails.append(tail)
    integrals = np.array(integrals)
    tails = np.array(tails)
    ratios = (integrals + tails) * bracket(s_values) ** alpha
    return DecayCheck(alpha, s_values, integrals, tails, ratios)


def bracket_power_integral(total_exponent: float) -> float:
    """Closed form of ``int (1 + y^2)^-A dy`` for A > 1/2."""
    return math.sqrt(math.pi) * math.gamma(total_exponent - 0.5) / math.gamma(total_exponent)


# ---------------------------------------------------------------------------
# Space-time lattices and trilinear forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpaceTimeLattice:
    """Nodes ``xi_i = (i - N/2) d_xi`` and ``tau_j = (j - N_tau/2) d_tau``."""

    n_xi: int
    n_tau: int
    d_xi: float
    d_tau: float

    def __post_init__(self):
        if self.n_xi < 2 or self.n_tau < 2 or self.n_xi % 2 or self.n_tau % 2:
            raise ValueError("point counts must be even and at least 2")
        if not (self.d_xi > 0 and self.d_tau > 0):
            raise ValueError("spacings must be positive")

    @classmethod
    def from_extent(cls, xi_max: float, n_xi: int, tau_max: float, n_tau: int) -> "SpaceTimeLattice":
        return cls(n_xi, n_tau, 2 * xi_max / n_xi, 2 * tau_max / n_tau)

    @classmethod
    def parabolic(cls, n_xi: int, d_xi: float = 0.25, d_tau: float = 1.0) -> "SpaceTimeLattice":
        """Lattice with tau extent about the square of the xi extent."""
        xi_max = n_xi * d_xi / 2
        n_tau = 2 * max(1, int(math.ceil(xi_max**2 / d_tau)))
        return cls(n_xi, n_tau, d_xi, d_tau)

    @property
    def xi(self) -> np.ndarray:
        return (np.arange(self.n_xi) - self.n_xi // 2) * self.d_xi

    @property
    def tau(self) -> np.ndarray:
        return (np.arange(self.n_tau) - self.n_tau // 2) * self.d_tau

    @property
    def shape(self) -> tuple:
        return (self.n_xi, self.n_tau)

    @property
    def cell(self) -> float:
        return self.d_xi * self.d_tau

    def mesh(self):
        return np.meshgrid(self.xi, self.tau, indexing="ij")


@dataclass(frozen=True, eq=False)
class LatticeFunction:
    lattice: SpaceTimeLattice
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.lattice.shape:
            raise ValueError(f"values shape {values.shape} does not match lattice {self.lattice.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("lattice function has non-finite entries")
        object.__setattr__(self, "values", values)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.lattice.cell))

    def __mul__(self, scalar) -> "LatticeFunction":
        return LatticeFunction(self.lattice, self.values * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class ExponentTriple:
    """Modulation exponents on the three factors: ``<sigma>^b <sigma_1>^c1 <sigma_2>^b1``.

    The wave-coupling form uses ``(c, b1, b1)``; build it with :meth:`wave`.
    """

    b: float
    b1: float
    c1: float
    enforce_range: bool = True

    def __post_init__(self):
        if self.enforce_range:
            for name in ("b", "b1", "c1"):
                value = getattr(self, name)
                if not 0.25 < value < 0.5:
                    raise ValueError(f"{name}={value} outside (1/4, 1/2)")

    @classmethod
    def wave(cls, c: float, b1: float, enforce_range: bool = True) -> "ExponentTriple":
        return cls(c, b1, b1, enforce_range)

    @property
    def total(self) -> float:
        return self.b + self.b1 + self.c1


def _frequency_weight(xi: np.ndarray, kind: str) -> np.ndarray:
    if kind == SCHRODINGER_FORM:
        return np.sqrt(bracket(xi))
    if kind == HOMOGENEOUS_FORM:
        return np.sqrt(np.abs(xi))
    if kind == WAVE_FORM:
        return np.abs(xi) / np.sqrt(bracket(xi))
    raise ValueError(f"unknown form {kind!r}")


def _weighted_factors(v, v1, v2, exps: ExponentTriple, kind: str):
    lattice = v.lattice
    if v1.lattice != lattice or v2.lattice != lattice:
        raise LatticeMismatch("all three functions must live on one lattice")
    xi, tau = lattice.mesh()
    a = v.values * _frequency_weight(xi, kind) / xsb_weight(xi, tau, WAVE_PLUS) ** exps.b
    schrodinger = xsb_weight(xi, tau, SCHRODINGER)
    a1 = v1.values / schrodinger**exps.c1
    a2 = v2.values / schrodinger**exps.b1
    return lattice, a, a1, a2


def _form_direct(lattice: SpaceTimeLattice, a, a1, a2) -> complex:
    nx, nt = lattice.shape
    hx, ht = nx // 2, nt // 2
    total = 0j
    for i2 in range(nx):
        # xi_1 = xi + xi_2 on the lattice: i1 = i + i2 - N/2.
        i_lo, i_hi = max(0, hx - i2), min(nx, nx + hx - i2)
        if i_lo >= i_hi:
            continue
        for j2 in range(nt):
            j_lo, j_hi = max(0, ht - j2), min(nt, nt + ht - j2)
            if j_lo >= j_hi:
                continue
            block = a[i_lo:i_hi, j_lo:j_hi]
            shifted = a1[i_lo + i2 - hx:i_hi + i2 - hx, j_lo + j2 - ht:j_hi + j2 - ht]
            total += a2[i2, j2] * np.sum(block * shifted)
    return total


def _form_fast(lattice: SpaceTimeLattice, a, a1, a2) -> complex:
    nx, nt = lattice.shape
    shape = (2 * nx, 2 * nt)
    conv = np.fft.ifft2(np.fft.fft2(a, shape) * np.fft.fft2(a2, shape))
    # conv[k, l] collects i + i2 = k; the constraint reads k = i1 + N/2.
    window = conv[nx // 2:nx // 2 + nx, nt // 2:nt // 2 + nt]
    return np.sum(window * a1)


def trilinear_form(v: LatticeFunction, v1: LatticeFunction, v2: LatticeFunction,
                   exps: ExponentTriple, kind: str = SCHRODINGER_FORM, method: str = "fast") -> float:
    """|sum over xi_1 = xi + xi_2, tau_1 = tau + tau_2 of the weighted product|."""
    lattice, a, a1, a2 = _weighted_factors(v, v1, v2, exps, kind)
    if method == "direct":
        total = _form_direct(lattice, a, a1, a2)
    elif method == "fast":
        total = _form_fast(lattice, a, a1, a2)
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(abs(total) * lattice.cell**2)


def normalised_form(v, v1, v2, exps: ExponentTriple, kind: str = SCHRODINGER_FORM, method: str = "fast") -> float:
    denominator = v.norm() * v1.norm() * v2.norm()
    if denominator == 0:
        return 0.0
    return trilinear_form(v, v1, v2, exps, kind, method) / denominator


# ---------------------------------------------------------------------------
# Test-function families and the sweep
# ---------------------------------------------------------------------------


def _gaussian(lattice: SpaceTimeLattice, dispersion: str, rng: np.random.Generator) -> np.ndarray:
    xi, tau = lattice.mesh()
    xi_max = lattice.n_xi * lattice.d_xi / 2
    centre = rng.uniform(-0.5, 0.5) * xi_max
    width = 0.25 * xi_max
    sigma = modulation(xi, tau, dispersion)
    return np.exp(-((xi - centre) / width) ** 2 - (sigma / (4.0 + width)) ** 2)


def _characteristic(lattice: SpaceTimeLattice, dispersion: str, rng: np.random.Generator) -> np.ndarray:
    xi, tau = lattice.mesh()
    xi_max = lattice.n_xi * lattice.d_xi / 2
    near = xsb_weight(xi, tau, dispersion) <= 2.0
    inside = np.abs(xi) <= rng.uniform(0.5, 0.9) * xi_max
    return (near & inside).astype(float)


def _random(lattice: SpaceTimeLattice, dispersion: str, rng: np.random.Generator) -> np.ndarray:
    phases = np.exp(2j * np.pi * rng.uniform(size=lattice.shape))
    return _gaussian(lattice, dispersion, rng) * phases


_FAMILY_BUILDERS = {"gaussian": _gaussian, "characteristic": _characteristic, "random": _random}


def family_functions(lattice: SpaceTimeLattice, family: str, rng: np.random.Generator):
    """``(v, v1, v2)`` with ``v`` adapted to the wave and the others to the Schroedinger dispersion."""
    build = _FAMILY_BUILDERS[family]
    return (LatticeFunction(lattice, build(lattice, WAVE_PLUS, rng)),
            LatticeFunction(lattice, build(lattice, SCHRODINGER, rng)),
            LatticeFunction(lattice, build(lattice, SCHRODINGER, rng)))


@dataclass
class SweepConfig:
    triples: Sequence[ExponentTriple]
    lattice_sizes: Sequence[int] = (64, 128, 256)
    families: Sequence[str] = FAMILIES
    kind: str = SCHRODINGER_FORM
    samples: int = 3
    seed: int = 0
    d_xi: float = 0.25
    d_tau: float = 1.0
    workers: int = 1

    def __post_init__(self):
        for family in self.families:
            if family not in _FAMILY_BUILDERS:
                raise ValueError(f"unknown test-function family {family!r}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown form {self.kind!r}")


@dataclass(frozen=True)
class SweepRow:
    kind: str
    b: float
    b1: float
    c1: float
    total: float
    side: str
    family: str
    n_xi: int
    n_tau: int
    ratio: float
    growth: float

    FIELDS = ("kind", "b", "b1", "c1", "total", "side", "family", "n_xi", "n_tau", "ratio", "growth")

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, name) for name in self.FIELDS)


def threshold_side(total: float, tol: float = 1e-9) -> str:
    if abs(total - 1.0) <= tol:
        return "at"
    return "above" if total > 1.0 else "below"


def _cell(args) -> float:
    triple, family, n_xi, config, cell_seed = args
    lattice = SpaceTimeLattice.parabolic(n_xi, config.d_xi, config.d_tau)
    rng = np.random.default_rng(cell_seed)
    best = 0.0
    for _ in range(config.samples):
        v, v1, v2 = family_functions(lattice, family, rng)
        best = max(best, normalised_form(v, v1, v2, triple, config.kind))
    return best


def exponent_sweep(config: SweepConfig) -> List[SweepRow]:
    """Max normalised form per (triple, family, lattice size), in a deterministic order."""
    cells = []
    for triple in config.triples:
        for f_index, family in enumerate(config.families):
            for n_xi in config.lattice_sizes:
                # One seed per family: every triple and lattice size sees the same draws.
                seed = np.random.SeedSequence([config.seed, f_index]).generate_state(1)[0]
                cells.append((triple, family, n_xi, config, int(seed)))
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            ratios = list(pool.map(_cell, cells))
    else:
        ratios = [_cell(c) for c in cells]

    rows: List[SweepRow] = []
    previous = {}
    for (triple, family, n_xi, _, _), ratio in zip(cells, ratios):
        key = (triple, family)
        growth = ratio / previous[key] if key in previous and previous[key] > 0 else math.nan
        previous[key] = ratio
        lattice = SpaceTimeLattice.parabolic(n_xi, config.d_xi, config.d_tau)
        rows.append(SweepRow(config.kind, triple.b, triple.b1, triple.c1, triple.total,
                             threshold_side(triple.total), family, n_xi, lattice.n_tau, ratio, growth))
    return rows


def growth_factors(rows: Sequence[SweepRow], family: str) -> dict:
    """Successive-lattice growth factors per exponent sum for one family."""
    table = {}
    for row in rows:
        if row.family == family and not math.isnan(row.growth):
            table.setdefault(round(row.total, 12), []).append(row.growth)
    return table


def uniform_triple(total: float) -> ExponentTriple:
    """Equal exponents with the given sum."""
    value = total / 3
    return ExponentTriple(value, value, value)


__all__ = [
    "KINDS", "SCHRODINGER_FORM", "HOMOGENEOUS_FORM", "WAVE_FORM", "FAMILIES", "SCHRODINGER", "WAVE_PLUS", "WAVE_MINUS",
    "lambda_plus", "bracket", "modulation", "xsb_weight", "resonance_gap", "check_resonance_identity",
    "convolution_profile_check", "decay_integral_check", "decay_exponent", "bracket_power_integral", "SpaceTimeLattice",
    "LatticeFunction", "ExponentTriple", "trilinear_form", "normalised_form", "SweepConfig",
    "SweepRow", "exponent_sweep", "growth_factors", "uniform_triple", "family_functions",
]
