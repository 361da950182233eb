"""Steady-state regimes: classification by the sign of lambda0 and the critical family."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import BracketError, DomainError, SteadyStateError
from .heatgrid import DiffusionPropagator
from .simulate import LockstepSolver, SimConfig, field_norms, run
from .spectral import find_lambda0, gamma_of_lambda

ZERO_TOL = 1e-6


class RegimeKind(enum.Enum):
    SUPERCRITICAL = "supercritical"
    CRITICAL = "critical"
    SUBCRITICAL = "subcritical"

    @property
    def description(self):
        return {
            "supercritical": "no nonnegative steady state",
            "critical": "one-parameter family of steady states",
            "subcritical": "trivial steady state only",
        }[self.value]


@dataclass(frozen=True)
class Regime:
    kind: RegimeKind
    lambda0: float
    zero_tol: float

    def to_dict(self):
        return {"regime": self.kind.value, "lambda0": self.lambda0,
                "zero_tol": self.zero_tol, "report": self.kind.description}


def classify(lambda0, zero_tol=ZERO_TOL) -> Regime:
    if not zero_tol > 0:
        raise DomainError("zero_tol must be positive")
    if lambda0 > zero_tol:
        kind = RegimeKind.SUPERCRITICAL
    elif lambda0 < -zero_tol:
        kind = RegimeKind.SUBCRITICAL
    else:
        kind = RegimeKind.CRITICAL
    return Regime(kind, float(lambda0), float(zero_tol))


@dataclass(frozen=True, eq=False)
class Criticalization:
    rates: object
    scale: float
    spectral: object


def criticalize(params, rates, grid, m_range=(1e-6, 1e6), tol=1e-8) -> Criticalization:
    """Scale the fertility by ``m*`` so that ``lambda0 = 0`` on this grid.

    ``B_0`` is linear in ``beta``, so ``gamma(B_0)`` scales by ``m`` and
    ``m* = 1 / gamma(B_0)`` exactly; no root search on ``m`` is needed.
    """
    gamma0 = gamma_of_lambda(params, rates, grid, 0.0)
    if gamma0 <= 0:
        raise BracketError("renewal operator vanishes: no fertility scale reaches criticality")
    m = 1.0 / gamma0
    lo, hi = m_range
    if not lo <= m <= hi:
        raise BracketError(f"critical scale {m:.6g} outside [{lo:g}, {hi:g}]")
    scaled = rates.scaled(m)
    spec = find_lambda0(params, scaled, grid)
    if abs(spec.lambda0) > tol:
        raise BracketError(f"criticalized lambda0 = {spec.lambda0:.3e} exceeds {tol:g}")
    return Criticalization(scaled, m, spec)


@dataclass(frozen=True, eq=False)
class SteadyState:
    """``profile = c * T(0, a) phi`` at the cell centres with its positivity certificate.

    ``rho0`` is the minimum over cells with ``a <= a1``; ``v`` is the
    survival-free profile ``exp(int mu) p_s``, which is pure heat flow of ``phi``.
    """

    profile: np.ndarray
    c: float
    rho0: float
    a1: float
    lambda0: float
    grid: object
    survival: np.ndarray

    @property
    def v(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.survival[:, None] > 0, self.profile / self.survival[:, None], 0.0)

    def scaled(self, alpha):
        return SteadyState(self.profile * alpha, self.c * alpha, self.rho0 * alpha,
                           self.a1, self.lambda0, self.grid, self.survival)

    def certificate(self, residual=None):
        return {"lambda0": self.lambda0, "c": self.c, "rho0": self.rho0, "a1": self.a1,
                "residual": residual}


def build_steady(spectral, rates, params, c=1.0, a1=None, zero_tol=ZERO_TOL) -> SteadyState:
    """Member ``c`` of the critical ray, with ``rho0 = min`` over ``(0, a1] x grid``."""
    regime = classify(spectral.lambda0, zero_tol)
    if regime.kind is not RegimeKind.CRITICAL:
        raise DomainError(f"steady states need a critical instance; {regime.kind.description}")
    if c < 0:
        raise DomainError("scale c must be >= 0")
    grid = spectral.grid
    a1 = 0.9 * params.a_dagger if a1 is None else a1
    if not 0 < a1 < params.a_dagger:
        raise DomainError("a1 must lie in (0, a_dagger)")
    ages = grid.ages.centers
    heat = DiffusionPropagator(params.delta, grid.circle)
    mode = heat.apply(np.broadcast_to(spectral.phi, (grid.n_a, grid.n_x)), ages)
    surv = rates.survival(ages)
    profile = c * surv[:, None] * mode
    mask = ages <= a1
    rho0 = float(profile[mask].min()) if mask.any() else math.nan
    if c > 0 and not rho0 > 0:
        raise SteadyStateError(f"positivity certificate failed: rho0 = {rho0:.3e}")
    return SteadyState(profile, float(c), rho0, float(a1), spectral.lambda0, grid, surv)


@dataclass(frozen=True)
class SteadyReport:
    residual: float
    drift: float
    horizon: float
    residual_tol: float
    drift_tol: float

    @property
    def stationary(self):
        return self.residual <= self.residual_tol and self.drift <= self.drift_tol

    def to_dict(self):
        return {"residual": self.residual, "drift": self.drift, "horizon": self.horizon,
                "stationary": self.stationary}


def verify_steady(state, config: SimConfig, rates, params, residual_tol=1e-3, drift_tol=1e-2,
                  horizon=None) -> SteadyReport:
    """One-step residual and relative norm drift over ``horizon`` (default ``10 a_dagger``)."""
    grid = config.grid(params)
    if state.profile.shape != (grid.n_a, grid.n_x):
        raise DomainError("steady profile and simulation grid differ")
    horizon = 10.0 * params.a_dagger if horizon is None else horizon
    p = state.profile
    n0, _ = field_norms(p, grid)
    if n0 == 0:
        return SteadyReport(0.0, 0.0, horizon, residual_tol, drift_tol)
    solver = LockstepSolver(params, rates, grid)
    r = field_norms(solver.step(p) - p, grid)[0] / n0
    long = SimConfig(grid.n_x, grid.n_a, t_end=horizon, record_every=10 ** 9,
                     age_order=config.age_order)
    traj = run(p, long, rates, params, solver=solver)
    drift = abs(traj.l2_norm[-1] / n0 - 1.0)
    return SteadyReport(float(r), float(drift), float(horizon), residual_tol, drift_tol)


__all__ = [
    "ZERO_TOL", "RegimeKind", "Regime", "classify", "Criticalization", "criticalize",
    "SteadyState", "build_steady", "SteadyReport", "verify_steady",
]
