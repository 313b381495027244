"""Norm-driven globalization driver.

Each step picks ``dt = c_step * min((1 + |u|)^-gamma, (1 + |n|)^-beta, 1)``,
runs a local Picard solve and halves ``dt`` when the iteration fails to
contract.  Every accepted step is logged.  ``bound_check`` fits the
smallest exponential envelope ``exp(c t |u0|^2) max(|n0|, |u0|^2)`` that
contains the logged wave norms.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional

from . import kgs, zakharov
from .errors import EmptyLog, NoContraction, NonzeroMeanVelocity, StepUnderflow, ZeroBeta
from .spectral import g_norm, l2_norm, w_norm
from .zakharov import PicardParams

logger = logging.getLogger(__name__)

ZAKHAROV = "zakharov"
KGS = "kgs"
SYSTEMS = (ZAKHAROV, KGS)

# Local-existence exponents per system: (u exponent, n exponent, increment exponent).
DEFAULT_EXPONENTS = {ZAKHAROV: (2.0, 2.0, 0.5), KGS: (4.0, 4.0, 0.75)}


@dataclass(frozen=True)
class ScheduleParams:
    gamma_exp: float = 2.0
    beta_exp: float = 2.0
    delta_exp: float = 0.5
    c_step: float = 0.5
    min_step: float = 1e-6
    max_retries: int = 8

    def __post_init__(self):
        for name in ("gamma_exp", "beta_exp", "delta_exp", "c_step", "min_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.c_step > 1:
            raise ValueError("c_step must be at most 1")
        if self.max_retries < 0:
            raise ValueError("max_retries must be nonnegative")

    @classmethod
    def for_system(cls, system: str, **overrides) -> "ScheduleParams":
        gamma_exp, beta_exp, delta_exp = DEFAULT_EXPONENTS[system]
        values = dict(gamma_exp=gamma_exp, beta_exp=beta_exp, delta_exp=delta_exp)
        values.update(overrides)
        return cls(**values)

    @property
    def growth_exponent(self) -> float:
        """1 - beta + delta beta; zero means the doubling time is norm-independent."""
        return 1.0 - self.beta_exp + self.delta_exp * self.beta_exp


def step_size(u_norm: float, n_norm: float, p: ScheduleParams) -> float:
    if u_norm < 0 or n_norm < 0:
        raise ValueError("norms must be nonnegative")
    dt = p.c_step * min((1.0 + u_norm) ** -p.gamma_exp, (1.0 + n_norm) ** -p.beta_exp, 1.0)
    if dt < p.min_step:
        raise StepUnderflow(f"step {dt:.3e} below min_step {p.min_step:.3e}")
    return dt


def predicted_doubling_count(n_norm: float, u_norm: float, dt: float, system: str) -> float:
    """Number of steps of size ``dt`` before the wave norm can double."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if system == ZAKHAROV:
        return n_norm / (dt**0.5 * (u_norm**2 + 1.0))
    if system == KGS:
        denominator = dt**0.75 * u_norm**2
        return n_norm / denominator if denominator > 0 else math.inf
    raise ValueError(f"unknown system {system!r}")


# ---------------------------------------------------------------------------
# System adapters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SystemOps:
    name: str
    local_solve: Callable
    wave_norm: Callable
    energy: Callable


def _safe_energy(func):
    def energy(state):
        try:
            return func(state)
        except (NonzeroMeanVelocity, ZeroBeta):
            return math.nan
    return energy


SYSTEM_OPS = {
    ZAKHAROV: SystemOps(ZAKHAROV, zakharov.local_solve, lambda s: w_norm(s.wave),
                        _safe_energy(zakharov.hamiltonian)),
    KGS: SystemOps(KGS, kgs.local_solve, lambda s: g_norm(s.wave), _safe_energy(kgs.hamiltonian)),
}


def system_of(state) -> str:
    if isinstance(state, zakharov.ZakharovState):
        return ZAKHAROV
    if isinstance(state, kgs.KGSState):
        return KGS
    raise TypeError(f"unsupported state type {type(state).__name__}")


# ---------------------------------------------------------------------------
# Run log
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StepRecord:
    time: float
    dt: float
    u_norm: float
    n_norm: float
    mass: float
    mass_drift: float
    hamiltonian: float
    picard_iters: int
    retries: int


@dataclass
class RunLog:
    system: str
    records: List[StepRecord] = field(default_factory=list)
    retry_events: List[tuple] = field(default_factory=list)
    doubling_times: List[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def times(self) -> List[float]:
        return [r.time for r in self.records]

    @property
    def n_norms(self) -> List[float]:
        return [r.n_norm for r in self.records]

    @property
    def steps(self) -> int:
        return max(len(self.records) - 1, 0)

    @property
    def mass_drift(self) -> float:
        return self.records[-1].mass_drift if self.records else 0.0

    @property
    def final_time(self) -> float:
        return self.records[-1].time


@dataclass
class RunResult:
    log: RunLog
    state: object


def _record(ops: SystemOps, state, dt, mass0, previous: Optional[StepRecord], iters, retries) -> StepRecord:
    m = zakharov.mass(state.u)
    drift = 0.0
    if previous is not None:
        drift = previous.mass_drift + (abs(m - previous.mass) / mass0 if mass0 > 0 else 0.0)
    return StepRecord(state.time, dt, l2_norm(state.u), ops.wave_norm(state), m, drift,
                      ops.energy(state), iters, retries)


def run(state, t_end: float, p: Optional[ScheduleParams] = None,
        picard: PicardParams = PicardParams()) -> RunResult:
    system = system_of(state)
    ops = SYSTEM_OPS[system]
    p = p or ScheduleParams.for_system(system)
    if not t_end > state.time:
        raise ValueError("t_end must exceed the initial time")
    log = RunLog(system)
    mass0 = zakharov.mass(state.u)
    log.records.append(_record(ops, state, 0.0, mass0, None, 0, 0))
    reference = log.records[0].n_norm

    while state.time < t_end:
        last = log.records[-1]
        try:
            dt = step_size(last.u_norm, last.n_norm, p)
        except StepUnderflow as exc:
            raise StepUnderflow(str(exc), log, state) from None
        # A leftover shorter than min_step is folded into this step.
        clipped = t_end - (state.time + dt) < p.min_step
        if clipped:
            dt = t_end - state.time
        retries = 0
        while True:
            try:
                traj = ops.local_solve(state, dt, picard)
                break
            except NoContraction as exc:
                retries += 1
                log.retry_events.append((state.time, dt, exc.iterations))
                logger.info("no contraction at t=%.6g with dt=%.3e; halving", state.time, dt)
                if retries > p.max_retries:
                    raise NoContraction(f"{p.max_retries} retries exhausted at t={state.time}",
                                        exc.iterations, exc.history) from exc
                dt /= 2
                clipped = False
                if dt < p.min_step:
                    raise StepUnderflow(f"retry step {dt:.3e} below min_step", log, state) from exc
        new_state = traj.final
        if clipped:
            new_state = replace(new_state, time=t_end)
        state = new_state
        record = _record(ops, state, dt, mass0, last, traj.iterations, retries)
        log.records.append(record)
        if reference > 0 and record.n_norm > 2 * reference:
            log.doubling_times.append(record.time)
            reference = record.n_norm
        logger.debug("t=%.6g dt=%.3e n=%.6g", state.time, dt, record.n_norm)
    return RunResult(log, state)


# ---------------------------------------------------------------------------
# Exponential envelope
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundFit:
    c: float
    passed: bool
    base: float

    def envelope(self, elapsed: float, u0_mass: float) -> float:
        return math.exp(self.c * elapsed * u0_mass) * self.base


def bound_check(log: RunLog, u0_mass: float, n0_norm: float) -> BoundFit:
    if not log.records:
        raise EmptyLog("cannot fit an envelope to an empty log")
    base = max(n0_norm, u0_mass)
    t0 = log.records[0].time
    slack = 1e-12
    c = 0.0
    for r in log.records:
        elapsed = r.time - t0
        if r.n_norm <= base * (1 + slack):
            continue
        if elapsed <= 0 or u0_mass <= 0 or base <= 0:
            c = math.inf
            break
        c = max(c, math.log(r.n_norm / base) / (elapsed * u0_mass))
    passed = math.isfinite(c)
    if passed and len(log.records) >= 2:
        prev, last = log.records[-2], log.records[-1]
        step = last.time - prev.time
        if step > 0:
            projected = last.n_norm + (last.n_norm - prev.n_norm)
            elapsed = last.time + step - t0
            passed = projected <= math.exp(c * elapsed * u0_mass) * base * (1 + 1e-9)
    return BoundFit(c, passed, base)


__all__ = [
    "ScheduleParams", "StepRecord", "RunLog", "RunResult", "BoundFit", "step_size",
    "predicted_doubling_count", "run", "bound_check", "system_of", "ZAKHAROV", "KGS",
]
