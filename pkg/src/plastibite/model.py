"""Model constants, vital-rate curves and the biting-time redistribution kernel.

Ages ``a`` and times ``t`` share one abstract unit; the biting-time coordinate
``x`` is measured in hours on the 24-hour circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError

DOMAIN_LENGTH = 24.0


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the model.

    ``periodic_kernel`` switches the renewal integral to a periodic wrap of the
    kernel window. It is off by default: the kernel vanishes for sources
    outside (0, 24) even though the diffusion boundary is periodic.
    """

    delta: float
    eta: float
    a_dagger: float
    t_end: float = 50.0
    domain_length: float = DOMAIN_LENGTH
    periodic_kernel: bool = False

    def __post_init__(self):
        if not math.isfinite(self.delta) or self.delta < 0:
            raise DomainError(f"delta must be finite and >= 0, got {self.delta}")
        if not (0 < self.eta <= DOMAIN_LENGTH):
            raise DomainError(f"eta must lie in (0, 24], got {self.eta}")
        if not math.isfinite(self.a_dagger) or self.a_dagger <= 0:
            raise DomainError(f"a_dagger must be finite and > 0, got {self.a_dagger}")
        if not math.isfinite(self.t_end) or self.t_end <= 0:
            raise DomainError(f"t_end must be finite and > 0, got {self.t_end}")
        if self.domain_length != DOMAIN_LENGTH:
            raise DomainError("domain_length is fixed at 24 hours")


# --------------------------------------------------------------------------
# mortality


class _Mortality:
    # ``diverges`` is True/False for closed forms, None when it cannot be
    # decided from the representation (tables).
    diverges = None

    def rate(self, a):
        raise NotImplementedError

    def cumulative(self, a):
        """Integral of the rate from 0 to ``a``."""
        raise NotImplementedError

    def shifted(self, c):
        return ShiftedMortality(self, c)

    def reference_rate(self, a_dagger):
        """A finite representative rate, used to size root-finding brackets."""
        a = np.linspace(0.0, 0.5 * a_dagger, 33)
        return float(np.mean(np.abs(self.rate(a))))


@dataclass(frozen=True)
class ConstantMortality(_Mortality):
    mu0: float

    diverges = False

    def rate(self, a):
        return np.full_like(np.asarray(a, dtype=float), self.mu0)

    def cumulative(self, a):
        return self.mu0 * np.asarray(a, dtype=float)

    def shifted(self, c):
        return ConstantMortality(self.mu0 + c)


@dataclass(frozen=True)
class BlowupMortality(_Mortality):
    """``mu0 + kappa / (a_dagger - a)``; survival is ``exp(-mu0 a) (1 - a/a_dagger)**kappa``."""

    mu0: float
    kappa: float
    a_dagger: float

    @property
    def diverges(self):
        return self.kappa > 0

    def rate(self, a):
        a = np.asarray(a, dtype=float)
        with np.errstate(divide="ignore"):
            return self.mu0 + self.kappa / (self.a_dagger - a)

    def cumulative(self, a):
        a = np.asarray(a, dtype=float)
        with np.errstate(divide="ignore"):
            return self.mu0 * a - self.kappa * np.log1p(-a / self.a_dagger)

    def shifted(self, c):
        return BlowupMortality(self.mu0 + c, self.kappa, self.a_dagger)


@dataclass(frozen=True, eq=False)
class TabulatedMortality(_Mortality):
    """Piecewise-linear rate through ``(ages, values)``; integrated exactly."""

    ages: np.ndarray
    values: np.ndarray
    _cum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        ages = np.asarray(self.ages, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if ages.ndim != 1 or ages.shape != values.shape or ages.size < 2:
            raise DomainError("mortality table needs matching 1-D ages/values, length >= 2")
        if np.any(np.diff(ages) <= 0):
            raise DomainError("mortality table ages must be strictly increasing")
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (values[1:] + values[:-1]) * np.diff(ages))])
        object.__setattr__(self, "ages", ages)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_cum", cum)
        object.__setattr__(self, "_cum", cum - float(self.cumulative(0.0)))

    def rate(self, a):
        return np.interp(a, self.ages, self.values)

    def cumulative(self, a):
        a = np.asarray(a, dtype=float)
        j = np.clip(np.searchsorted(self.ages, a, side="right") - 1, 0, self.ages.size - 2)
        a0 = self.ages[j]
        d = a - a0
        slope = (self.values[j + 1] - self.values[j]) / (self.ages[j + 1] - a0)
        return self._cum[j] + self.values[j] * d + 0.5 * slope * d * d


@dataclass(frozen=True)
class ShiftedMortality(_Mortality):
    base: _Mortality
    c: float

    @property
    def diverges(self):
        return self.base.diverges

    def rate(self, a):
        return self.base.rate(a) + self.c

    def cumulative(self, a):
        return self.base.cumulative(a) + self.c * np.asarray(a, dtype=float)


# --------------------------------------------------------------------------
# fertility


@dataclass(frozen=True)
class ConstantFertility:
    beta0: float

    def __call__(self, a):
        return np.full_like(np.asarray(a, dtype=float), self.beta0)

    def scaled(self, m):
        return ConstantFertility(self.beta0 * m)


@dataclass(frozen=True, eq=False)
class TabulatedFertility:
    """Piecewise-linear fertility through ``(ages, values)``, zero outside the table."""

    ages: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        ages = np.asarray(self.ages, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if ages.ndim != 1 or ages.shape != values.shape or ages.size < 2:
            raise DomainError("fertility table needs matching 1-D ages/values, length >= 2")
        if np.any(np.diff(ages) <= 0):
            raise DomainError("fertility table ages must be strictly increasing")
        object.__setattr__(self, "ages", ages)
        object.__setattr__(self, "values", values)

    def __call__(self, a):
        return np.interp(a, self.ages, self.values, left=0.0, right=0.0)

    def scaled(self, m):
        return TabulatedFertility(self.ages, self.values * m)


@dataclass(frozen=True, eq=False)
class VitalRates:
    mortality: _Mortality
    fertility: object
    a_dagger: float

    def mu(self, a):
        return self.mortality.rate(a)

    def beta(self, a):
        return self.fertility(a)

    def log_survival(self, a):
        """``-int_0^a mu``; ``-inf`` where the integral diverges."""
        with np.errstate(invalid="ignore"):
            return -self.mortality.cumulative(a)

    def survival(self, a):
        """Survival probability, clamped to [0, 1]; no range check."""
        ls = self.log_survival(a)
        return np.clip(np.exp(np.where(np.isnan(ls), -np.inf, ls)), 0.0, 1.0)

    def shifted(self, c):
        """Rates with mortality ``mu + c``."""
        return VitalRates(self.mortality.shifted(c), self.fertility, self.a_dagger)

    def scaled(self, m):
        """Rates with fertility ``m * beta``."""
        return VitalRates(self.mortality, self.fertility.scaled(m), self.a_dagger)


def survival(rates, a):
    """Probability of surviving to age ``a``; ``a`` must lie in [0, a_dagger]."""
    arr = np.asarray(a, dtype=float)
    if np.any(arr < 0) or np.any(arr > rates.a_dagger) or np.any(np.isnan(arr)):
        raise DomainError(f"age outside [0, {rates.a_dagger}]")
    out = rates.survival(arr)
    return float(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# kernel


def kernel_eval(x, s):
    """Redistribution weight ``(x-s)**2 exp(-(x-s)**2)`` for sources ``s`` in (0, 24), else 0."""
    x = np.asarray(x, dtype=float)
    s = np.asarray(s, dtype=float)
    d2 = (x - s) ** 2
    out = np.where((s > 0) & (s < DOMAIN_LENGTH), d2 * np.exp(-d2), 0.0)
    return float(out) if out.ndim == 0 else out


def _kernel_profile(d):
    d2 = d * d
    return d2 * np.exp(-d2)


@lru_cache(maxsize=64)
def _kernel_weights(n_x, eta, periodic, order):
    h = DOMAIN_LENGTH / n_x
    nodes, gw = np.polynomial.legendre.leggauss(order)
    W = np.zeros((n_x, n_x))
    for i in range(n_x):
        x = i * h
        lo, hi = x - eta, x + eta
        if not periodic:
            lo, hi = max(lo, 0.0), min(hi, DOMAIN_LENGTH)
        m = np.arange(math.floor(lo / h), math.ceil(hi / h))
        u = np.maximum(lo, m * h)
        v = np.minimum(hi, (m + 1) * h)
        keep = v > u
        m, u, v = m[keep], u[keep], v[keep]
        s = 0.5 * (u + v)[:, None] + 0.5 * (v - u)[:, None] * nodes[None, :]
        w = 0.5 * (v - u)[:, None] * gw[None, :] * _kernel_profile(x - s)
        tau = s / h - m[:, None]
        np.add.at(W[i], m % n_x, (w * (1.0 - tau)).sum(axis=1))
        np.add.at(W[i], (m + 1) % n_x, (w * tau).sum(axis=1))
    W.setflags(write=False)
    return W


def kernel_weights(n_x, eta, periodic=False, order=16):
    """Quadrature matrix of the renewal integral over biting time.

    Row ``i`` holds the weights of the nodal values in
    ``int K(x_i, s) p(s) ds`` over ``(x_i - eta, x_i + eta)``, clipped to
    (0, 24) unless ``periodic``. The kernel is integrated exactly (Gauss-Legendre
    of ``order`` points per cell) against the periodic piecewise-linear
    interpolant of ``p``, so window ends need not fall on nodes.
    """
    return _kernel_weights(int(n_x), float(eta), bool(periodic), int(order))


# --------------------------------------------------------------------------
# validation


@dataclass
class Check:
    name: str
    status: str  # "pass" | "fail" | "unverifiable"
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list

    @property
    def ok(self):
        return all(c.status != "fail" for c in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if c.status == "fail"]

    def status(self, name):
        for c in self.checks:
            if c.name == name:
                return c.status
        raise KeyError(name)

    def __str__(self):
        return "\n".join(f"{c.name}: {c.status}" + (f" ({c.detail})" if c.detail else "")
                         for c in self.checks)


def validate(params, rates, p0=None, n_samples=2001):
    """Check the standing assumptions on the discrete representation.

    (J1) nonnegative, locally integrable mortality with divergent integral at
    ``a_dagger``; (J2) bounded nonnegative fertility, positive on a set of
    positive measure; (J3) bounded nonnegative initial data. Divergence can only
    be decided for closed-form mortality families; tables report
    ``unverifiable``.
    """
    checks = []

    ok = params.delta > 0 and math.isclose(params.a_dagger, rates.a_dagger, rel_tol=1e-12)
    detail = ""
    if params.delta <= 0:
        detail = "delta must be > 0"
    elif not ok:
        detail = f"a_dagger mismatch: params {params.a_dagger} vs rates {rates.a_dagger}"
    checks.append(Check("params", "pass" if ok else "fail", detail))

    a_dag = rates.a_dagger
    # open interval samples: never touch a_dagger itself
    a = (np.arange(n_samples) + 0.5) * (a_dag / n_samples)

    mu = rates.mu(a)
    cum = rates.mortality.cumulative(a)
    if np.any(~np.isfinite(mu)) or np.any(mu < 0):
        checks.append(Check("J1", "fail", "mortality negative or non-finite below a_dagger"))
    elif np.any(~np.isfinite(cum)):
        checks.append(Check("J1", "fail", "cumulative mortality not locally integrable"))
    elif rates.mortality.diverges is None:
        checks.append(Check("J1", "unverifiable", "divergence at a_dagger undecidable for tables"))
    elif rates.mortality.diverges:
        checks.append(Check("J1", "pass"))
    else:
        checks.append(Check("J1", "fail", "cumulative mortality is finite at a_dagger"))

    beta = rates.beta(np.linspace(0.0, a_dag, n_samples))
    if np.any(~np.isfinite(beta)):
        checks.append(Check("J2", "fail", "fertility unbounded"))
    elif np.any(beta < 0):
        checks.append(Check("J2", "fail", "fertility negative"))
    elif not np.any(rates.beta(a) > 0):
        checks.append(Check("J2", "fail", "fertility vanishes almost everywhere"))
    else:
        checks.append(Check("J2", "pass"))

    if p0 is not None:
        p0 = np.asarray(p0, dtype=float)
        if np.any(~np.isfinite(p0)):
            checks.append(Check("J3", "fail", "initial data not bounded"))
        elif np.any(p0 < 0):
            checks.append(Check("J3", "fail", f"{int(np.sum(p0 < 0))} negative samples"))
        else:
            checks.append(Check("J3", "pass"))
    return ValidationReport(checks)
