"""Time stepping along characteristics (age and time advance together).

Each age cell is a cohort: one step of length ``da`` moves cell ``k`` to
``k + 1`` while applying the exact survival factor and the exact heat flow. The
oldest cell leaves the domain. Newborns are computed from the renewal integral
of the population half a step ahead, which keeps the coupling second order in
``da``; the newborns of the first half step enter through a small linear solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalError
from .heatgrid import DiffusionPropagator, Grid
from .model import kernel_weights


@dataclass
class PopulationField:
    """Density on the ``(n_a, n_x)`` grid at time ``t``."""

    values: np.ndarray
    t: float = 0.0


@dataclass(frozen=True)
class SimConfig:
    """Grid sizes and output cadence; the time step is always ``a_dagger / n_a``.

    ``t_end`` falls back to ``ModelParams.t_end``. Snapshots are stored at step
    0, every ``record_every`` steps and at the final step; norms every step.
    """

    n_x: int = 64
    n_a: int = 200
    t_end: float | None = None
    record_every: int = 50
    age_order: int = 4

    def grid(self, params):
        return Grid(self.n_x, self.n_a, params.a_dagger, self.age_order)

    def n_steps(self, params):
        t_end = params.t_end if self.t_end is None else self.t_end
        dt = params.a_dagger / self.n_a
        if t_end < dt * (1 - 1e-12):
            raise DomainError(f"t_end={t_end} is shorter than one step ({dt})")
        return int(round(t_end / dt))


@dataclass
class Trajectory:
    times: np.ndarray
    l2_norm: np.ndarray
    total_pop: np.ndarray
    grid: Grid
    snapshots: list = field(default_factory=list)  # [(step, t, values)]

    def snapshot_times(self):
        return np.array([t for _, t, _ in self.snapshots])


def field_norms(values, grid):
    cell = grid.ages.da * grid.circle.h
    return float(np.sqrt(cell * np.sum(values * values))), float(cell * np.sum(values))


class LockstepSolver:
    """Precomputed one-step map of the discretized model."""

    def __init__(self, params, rates, grid: Grid):
        self.params, self.rates, self.grid = params, rates, grid
        ages = grid.ages
        da = ages.da
        self.heat = DiffusionPropagator(params.delta, grid.circle)
        self.W = kernel_weights(grid.n_x, params.eta, params.periodic_kernel)

        ls_c = rates.log_survival(ages.centers)
        ls_e = rates.log_survival(ages.edges)
        with np.errstate(invalid="ignore"):
            # center k -> center k+1
            self.transport = np.exp(ls_c[1:] - ls_c[:-1])
            # center k -> upper edge k+1; zero where survival vanishes at a_dagger
            half = np.exp(ls_e[1:] - ls_c)
        half = np.where(np.isnan(half), 0.0, half)
        weights = np.full(grid.n_a, da)
        weights[-1] = 0.5 * da  # upper half of the last cell lies beyond a_dagger
        self.half_weights = weights * rates.beta(ages.edges[1:]) * half

        # newborns of the first half step: ages (0, da/2) sampled at da/4
        q = 0.25 * da
        c = 0.5 * da * float(rates.beta(q)) * float(np.exp(rates.log_survival(q)))
        A = np.eye(grid.n_x) - c * self.W @ self.heat.matrix(q)
        self.newborn_map = (float(np.exp(ls_c[0])) * self.heat.matrix(0.5 * da)
                            @ np.linalg.inv(A))

    def newborns(self, values):
        agesum = self.half_weights @ values
        return self.newborn_map @ (self.W @ self.heat.apply(agesum, 0.5 * self.grid.ages.da))

    def step(self, values):
        values = np.asarray(values, dtype=float)
        new = np.empty_like(values)
        new[0] = self.newborns(values)
        new[1:] = self.heat.apply(self.transport[:, None] * values[:-1], self.grid.ages.da)
        return new


def renewal_boundary(field, rates, params, grid):
    """Newborn density ``int beta(a) int K(x, s) p(a, s) ds da`` of a field (midpoint in age)."""
    values = field.values if isinstance(field, PopulationField) else np.asarray(field, float)
    ages = grid.ages
    agesum = (ages.da * rates.beta(ages.centers)) @ values
    return kernel_weights(grid.n_x, params.eta, params.periodic_kernel) @ agesum


def step(field, rates, params, grid=None, solver=None):
    """Advance a ``PopulationField`` by one lockstep ``dt = da``."""
    if solver is None:
        if grid is None:
            n_a, n_x = np.shape(field.values)
            grid = Grid(n_x, n_a, params.a_dagger)
        solver = LockstepSolver(params, rates, grid)
    return PopulationField(solver.step(field.values), field.t + solver.grid.ages.da)


def run(p0, config: SimConfig, rates, params, solver=None) -> Trajectory:
    """Simulate from ``p0`` (shape ``(n_a, n_x)``) to ``t_end``; deterministic."""
    grid = config.grid(params)
    p = np.array(p0, dtype=float)
    if p.shape != (grid.n_a, grid.n_x):
        raise DomainError(f"initial data has shape {p.shape}, expected {(grid.n_a, grid.n_x)}")
    solver = solver or LockstepSolver(params, rates, grid)
    n_steps = config.n_steps(params)
    dt = grid.ages.da
    times = dt * np.arange(n_steps + 1)
    l2 = np.empty(n_steps + 1)
    total = np.empty(n_steps + 1)
    l2[0], total[0] = field_norms(p, grid)
    snapshots = [(0, 0.0, p.copy())]
    every = max(int(config.record_every), 1)
    for n in range(1, n_steps + 1):
        p = solver.step(p)
        l2[n], total[n] = field_norms(p, grid)
        if n % every == 0 or n == n_steps:
            snapshots.append((n, times[n], p.copy()))
    return Trajectory(times, l2, total, grid, snapshots)


def growth_rate(trajectory, window):
    """Least-squares slope of ``log ||p||_2`` over ``window = (t1, t2)``, ``t1 >= a_dagger``."""
    t1, t2 = window
    if t1 < trajectory.grid.a_dagger * (1 - 1e-12):
        raise DomainError("growth-rate window must start at or after a_dagger")
    if not t2 > t1:
        raise DomainError("growth-rate window needs t2 > t1")
    eps = 1e-9 * max(abs(t2), 1.0)
    m = (trajectory.times >= t1 - eps) & (trajectory.times <= t2 + eps)
    if m.sum() < 2:
        raise DomainError("fewer than two samples in the growth-rate window")
    norms = trajectory.l2_norm[m]
    if np.any(norms <= 0):
        raise NumericalError("population norm vanished in the window (extinct)")
    return float(np.polyfit(trajectory.times[m], np.log(norms), 1)[0])


# --------------------------------------------------------------------------
# rank-one asymptotics


def asymptotic_prediction(spectral, p0, rates, params):
    """Leading-order profile ``q(a, x)`` with ``p(a, t, x) ~ exp(lambda0 t) q(a, x)``.

    ``q = exp(-lambda0 a) T(0, a) C w`` where ``C`` is the rank-one residue and
    ``w(x)`` the discounted offspring of every initial cohort::

        w = int_0^a_dag beta(a) int K(x, s) int_0^a exp(-lambda0 (a - sig)) [T(sig, a) p0(sig)](s) dsig ds da
    """
    grid = spectral.grid
    lam0 = spectral.lambda0
    ages = grid.ages
    da = ages.da
    centers = ages.centers
    xi2 = grid.circle.xi ** 2
    p0 = np.asarray(p0, dtype=float)

    g, gw = np.polynomial.legendre.leggauss(grid.age_order)
    # half-cell nodes ordered [lower_0, upper_0, lower_1, upper_1, ...]
    lo = 0.5 * da * np.arange(2 * grid.n_a)
    nodes = (lo[:, None] + 0.25 * da * (g[None, :] + 1.0))
    weights = np.broadcast_to(0.25 * da * gw, nodes.shape)
    nodes, weights = nodes.ravel(), weights.ravel()
    beta = rates.beta(nodes)
    ls_nodes = rates.log_survival(nodes)
    ls_c = rates.log_survival(centers)

    p0_hat = np.fft.rfft(p0, axis=-1)
    acc = np.zeros(grid.circle.xi.size, dtype=complex)
    for j in range(grid.n_a):
        start = (2 * j + 1) * grid.age_order
        a = nodes[start:]
        tau = a - centers[j]
        with np.errstate(invalid="ignore"):
            fac = weights[start:] * beta[start:] * np.exp(-lam0 * tau + ls_nodes[start:] - ls_c[j])
        fac = np.where(np.isnan(fac), 0.0, fac)
        acc += da * (fac @ np.exp(-params.delta * tau[:, None] * xi2[None, :])) * p0_hat[j]
    W = kernel_weights(grid.n_x, params.eta, params.periodic_kernel)
    w = W @ np.fft.irfft(acc, n=grid.n_x)

    amplitude = spectral.residue_scale * float(spectral.psi @ w)
    heat = DiffusionPropagator(params.delta, grid.circle)
    mode = heat.apply(np.broadcast_to(spectral.phi, (grid.n_a, grid.n_x)), centers)
    return amplitude * (np.exp(-lam0 * centers + ls_c))[:, None] * mode


@dataclass
class ProfileCheck:
    times: np.ndarray
    errors: np.ndarray
    decay_rate: float
    monotone: bool


def asymptotic_profile_check(trajectory, spectral, p0, rates, params, t_min=None):
    """Relative distance ``e(t) = ||exp(-lambda0 t) p(t) - q|| / ||q||`` at each snapshot.

    ``monotone`` and ``decay_rate`` (minus the log-linear slope of ``e``) refer
    to snapshots with ``t >= t_min`` (default ``a_dagger``).
    """
    q = asymptotic_prediction(spectral, p0, rates, params)
    qn = np.linalg.norm(q)
    if qn == 0:
        raise NumericalError("prediction vanishes: initial data has no component on the Perron mode")
    times = np.array([t for _, t, _ in trajectory.snapshots])
    errors = np.array([np.linalg.norm(v * np.exp(-spectral.lambda0 * t) - q) / qn
                       for _, t, v in trajectory.snapshots])
    t_min = trajectory.grid.a_dagger if t_min is None else t_min
    m = times >= t_min - 1e-9
    late_t, late_e = times[m], errors[m]
    monotone = bool(np.all(np.diff(late_e) < 0))
    rate = float(-np.polyfit(late_t, np.log(late_e), 1)[0]) if late_t.size >= 2 else float("nan")
    return ProfileCheck(times, errors, rate, monotone)
