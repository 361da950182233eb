"""Grids, the exact periodic heat propagator and the survival-weighted evolution family."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError
from .model import DOMAIN_LENGTH


@dataclass(frozen=True)
class CircleGrid:
    """``n_x`` uniform nodes ``x_i = i h`` on [0, 24); index arithmetic is mod ``n_x``."""

    n_x: int

    def __post_init__(self):
        if self.n_x < 2:
            raise DomainError("n_x must be >= 2")

    @property
    def h(self):
        return DOMAIN_LENGTH / self.n_x

    @property
    def x(self):
        return np.arange(self.n_x) * self.h

    @property
    def xi(self):
        """Angular frequencies of the real-FFT modes, ``2 pi k / 24`` for k = 0..n_x/2."""
        return 2.0 * np.pi * np.arange(self.n_x // 2 + 1) / DOMAIN_LENGTH


@dataclass(frozen=True)
class AgeGrid:
    """``n_a`` cells of width ``da`` on (0, a_dagger), values at cell centers."""

    n_a: int
    a_dagger: float

    def __post_init__(self):
        if self.n_a < 1:
            raise DomainError("n_a must be >= 1")

    @property
    def da(self):
        return self.a_dagger / self.n_a

    @property
    def centers(self):
        return (np.arange(self.n_a) + 0.5) * self.da

    @property
    def edges(self):
        return np.arange(self.n_a + 1) * self.da


@dataclass(frozen=True)
class Grid:
    """Age x biting-time discretization.

    ``age_order`` Gauss-Legendre points per age cell are used by the spectral
    quadratures; they never touch the cell edges, so a mortality blow-up at
    ``a_dagger`` is never evaluated.
    """

    n_x: int
    n_a: int
    a_dagger: float
    age_order: int = 4

    @property
    def circle(self):
        return CircleGrid(self.n_x)

    @property
    def ages(self):
        return AgeGrid(self.n_a, self.a_dagger)

    @cached_property
    def age_quadrature(self):
        """Composite Gauss-Legendre nodes and weights over (0, a_dagger)."""
        g, w = np.polynomial.legendre.leggauss(self.age_order)
        da = self.a_dagger / self.n_a
        left = np.arange(self.n_a)[:, None] * da
        nodes = (left + 0.5 * da * (g[None, :] + 1.0)).ravel()
        weights = np.tile(0.5 * da * w, self.n_a)
        return nodes, weights

    def refined(self, factor=2):
        return Grid(self.n_x * factor, self.n_a * factor, self.a_dagger, self.age_order)


def circulant(first_column):
    """Dense circulant matrix ``C[i, j] = c[(i - j) mod n]``."""
    c = np.asarray(first_column)
    n = c.shape[0]
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return c[idx]


def circulant_from_symbol(symbol, n_x):
    """Real circulant matrix whose real-FFT eigenvalues are ``symbol`` (length n_x//2 + 1)."""
    return circulant(np.fft.irfft(symbol, n=n_x))


@dataclass(frozen=True)
class DiffusionPropagator:
    """``exp(t delta d2/dx2)`` on the periodic grid, applied mode by mode.

    Mode ``k`` is damped by ``exp(-delta xi_k**2 t)`` exactly. The discrete
    kernel is only nonnegative (to roundoff) once ``delta t`` exceeds roughly
    ``3.5 h**2``; below that the Nyquist-range modes give small negative side
    lobes.
    """

    delta: float
    circle: CircleGrid

    def symbol(self, t):
        """Mode multipliers; ``t`` may be an array, giving shape ``t.shape + (n_x//2+1,)``."""
        t = np.asarray(t, dtype=float)
        return np.exp(-self.delta * self.circle.xi ** 2 * t[..., None])

    def apply(self, field, t):
        field = np.asarray(field, dtype=float)
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError("heat propagation time must be >= 0")
        if self.delta == 0 or np.all(t == 0):
            return field.copy()
        spec = np.fft.rfft(field, axis=-1)
        return np.fft.irfft(spec * self.symbol(t), n=self.circle.n_x, axis=-1)

    def matrix(self, t):
        return circulant_from_symbol(self.symbol(t), self.circle.n_x)

    def positivity_threshold(self):
        """Smallest step ``t`` for which the discrete kernel is nonnegative to ~1e-15."""
        return 3.5 * self.circle.h ** 2 / self.delta if self.delta > 0 else 0.0


def heat_step(field, t, delta, circle=None):
    """Propagate ``field`` (last axis on the circle) by pure diffusion for time ``t``."""
    field = np.asarray(field, dtype=float)
    circle = circle or CircleGrid(field.shape[-1])
    return DiffusionPropagator(delta, circle).apply(field, t)


@dataclass(frozen=True, eq=False)
class EvolutionFamily:
    """Cohort propagator: survival from age ``s0+tau`` to ``s0+s`` times heat flow over ``s-tau``."""

    rates: object
    propagator: DiffusionPropagator

    def factor(self, s0, tau, s):
        ls = self.rates.log_survival(s0 + s) - self.rates.log_survival(s0 + tau)
        return float(np.exp(ls)) if np.isfinite(ls) else 0.0

    def __call__(self, s0, tau, s, field):
        return evolve(self, s0, tau, s, field)


def evolve(family, s0, tau, s, field):
    """Apply the cohort propagator from age ``tau`` to age ``s`` (offset ``s0``)."""
    a_dag = family.rates.a_dagger
    if tau < 0 or s < tau:
        raise DomainError(f"need 0 <= tau <= s, got tau={tau}, s={s}")
    if s0 < 0 or s0 + s > a_dag * (1 + 1e-12):
        raise DomainError(f"s0 + s must lie in [0, {a_dag}]")
    if s == tau:
        return np.array(field, dtype=float)
    return family.factor(s0, tau, s) * family.propagator.apply(field, s - tau)
