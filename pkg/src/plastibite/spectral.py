"""Renewal operator, Perron root, dominant eigenvalue and rank-one residue.

The net-reproduction operator acts on biting-time profiles::

    (B_lam phi)(x) = int_0^a_dag beta(a) int K(x, s) exp(-lam a) [T(0, a) phi](s) ds da

where ``T(0, a)`` is survival times heat flow. On the grid it is the product
``W @ G(lam)`` of the kernel quadrature matrix ``W`` and a circulant matrix
``G(lam)`` whose Fourier symbol is the age integral of
``beta exp(-lam a) S(a) exp(-delta xi**2 a)``. The dominant eigenvalue
``lambda0`` of the full generator solves ``gamma(B_lam) = 1``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate, optimize

from .errors import BracketError, ConvergenceError, NumericalError
from .heatgrid import Grid, circulant_from_symbol
from .model import kernel_weights

ROOT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class RenewalOperator:
    lam: float
    matrix: np.ndarray
    age_nodes: np.ndarray
    age_weights: np.ndarray


def _age_symbol(params, rates, grid, lam, moment=0):
    a, w = grid.age_quadrature
    with np.errstate(over="raise"):
        try:
            base = w * rates.beta(a) * np.exp(-lam * a + rates.log_survival(a))
        except FloatingPointError:
            raise BracketError(f"renewal operator overflows at lambda={lam}") from None
    if moment:
        base = base * (-a) ** moment
    modes = np.exp(-params.delta * grid.circle.xi[None, :] ** 2 * a[:, None])
    return base @ modes


def _kernel_matrix(params, grid):
    return kernel_weights(grid.n_x, params.eta, params.periodic_kernel)


def assemble(params, rates, grid: Grid, lam: float) -> RenewalOperator:
    """Discrete ``B_lam`` as a dense nonnegative ``n_x x n_x`` matrix."""
    G = circulant_from_symbol(_age_symbol(params, rates, grid, lam), grid.n_x)
    M = _kernel_matrix(params, grid) @ G
    a, w = grid.age_quadrature
    return RenewalOperator(float(lam), M, a, w)


def d_lambda_operator(params, rates, grid, lam):
    """Derivative of ``B_lam`` with respect to ``lam`` (integrand times ``-a``)."""
    G = circulant_from_symbol(_age_symbol(params, rates, grid, lam, moment=1), grid.n_x)
    return _kernel_matrix(params, grid) @ G


def fourier_operator(params, rates, grid, C, lam):
    """The local-renewal operator ``int C beta exp(-lam a) S(a) exp(B a) da`` (no kernel)."""
    return circulant_from_symbol(C * _age_symbol(params, rates, grid, lam), grid.n_x)


# --------------------------------------------------------------------------
# Perron pair


@dataclass(frozen=True, eq=False)
class PerronPair:
    gamma: float
    phi: np.ndarray
    psi: np.ndarray
    residual: float
    iterations: int


def _power(M, tol, max_iter):
    n = M.shape[0]
    scale = np.linalg.norm(M)
    v = np.full(n, 1.0 / math.sqrt(n))
    rho_prev = math.inf
    res = math.inf
    for it in range(1, max_iter + 1):
        w = M @ v
        rho = float(v @ w)
        res = float(np.linalg.norm(w - rho * v))
        if res <= tol * scale and abs(rho - rho_prev) <= 1e-12 * max(abs(rho), 1e-300):
            return rho, v, res, it
        nw = np.linalg.norm(w)
        if not np.isfinite(nw) or nw == 0:
            raise ConvergenceError("power iteration collapsed", residual=res, iterations=it)
        v = w / nw
        rho_prev = rho
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations (residual {res:.3e})",
        residual=res, iterations=max_iter)


def perron(op, tol=1e-12, max_iter=50_000, neg_tol=1e-3) -> PerronPair:
    """Spectral radius with right/left Perron vectors of a nonnegative matrix.

    Power iteration seeded with the uniform vector, so a degenerate dominant
    eigenvalue returns the uniform-seeded limit. ``phi`` has unit 2-norm, ``psi``
    is scaled to ``psi @ phi == 1``. Convergence requires the residual to fall
    below ``tol * ||M||_F`` and successive Rayleigh quotients to agree to 1e-12.

    The exact-symbol heat flow gives the discrete operator small negative side
    lobes when ``delta`` is small, so entries down to ``-neg_tol * max(M)`` are
    accepted; the vectors are then only sign-normalized, not clipped.
    """
    M = op.matrix if isinstance(op, RenewalOperator) else np.asarray(op, dtype=float)
    if not np.any(M):
        raise ValueError("perron needs a matrix that is not identically zero")
    if M.min() < -neg_tol * M.max():
        raise ValueError("perron needs an entrywise nonnegative matrix")
    gamma, phi, res, it = _power(M, tol, max_iter)
    _, psi, res_t, it_t = _power(M.T, tol, max_iter)
    phi = phi * np.sign(phi.sum())
    phi /= np.linalg.norm(phi)
    pairing = float(psi @ phi)
    if pairing == 0:
        raise ConvergenceError("left and right Perron vectors are orthogonal", residual=res)
    psi = psi / pairing
    return PerronPair(gamma, phi, psi, max(res, res_t), it + it_t)


def gamma_of_lambda(params, rates, grid, lam):
    """Spectral radius of ``B_lam``; zero when the operator vanishes."""
    M = assemble(params, rates, grid, lam).matrix
    if not np.all(np.isfinite(M)):
        raise BracketError(f"renewal operator not finite at lambda={lam}")
    peak = float(np.max(np.abs(M)))
    if peak == 0:
        return 0.0
    # normalize so tiny fertilities do not underflow inside the iteration
    return peak * _power(M / peak, 1e-12, 50_000)[0]


# --------------------------------------------------------------------------
# dominant eigenvalue


def _bracket_scale(rates, grid):
    a, _ = grid.age_quadrature
    beta_max = float(np.max(np.abs(rates.beta(a))))
    scale = 10.0 * (beta_max + rates.mortality.reference_rate(rates.a_dagger))
    return scale if scale > 0 else 1.0


def _unit_crossing(f, scale, max_expand=6, xtol=1e-14):
    """Root of the decreasing function ``f(lam) - 1`` by bracket doubling + Brent."""
    lo, hi = -scale, scale
    g = lambda lam: f(lam) - 1.0  # noqa: E731
    for _ in range(max_expand):
        if g(hi) < 0:
            break
        hi *= 2.0
    else:
        raise BracketError(f"spectral radius still >= 1 at lambda={hi}")
    for _ in range(max_expand):
        if g(lo) > 0:
            break
        lo *= 2.0
    else:
        raise BracketError(f"spectral radius still <= 1 at lambda={lo}; fertility degenerate?")
    return optimize.brentq(g, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500)


@dataclass(frozen=True, eq=False)
class SpectralResult:
    """Dominant eigenvalue and its Perron data.

    ``generation_time`` is ``psi @ (-dB/dlam) @ phi`` at ``lambda0`` and
    ``residue_scale`` its reciprocal. ``gap_epsilon`` converts the subdominant
    modulus of ``B_lambda0`` into eigenvalue units, ``log(1/|gamma_2|) /
    generation_time``: an estimate, not a certified bound.
    """

    lambda0: float
    gamma: float
    gamma_residual: float
    phi: np.ndarray
    psi: np.ndarray
    second_modulus: float
    generation_time: float
    gap_epsilon: float
    residue_scale: float
    grid: Grid
    perron_residual: float = 0.0
    matrix: np.ndarray = field(default=None, repr=False)

    def to_dict(self):
        return {
            "lambda0": self.lambda0,
            "gamma_residual": self.gamma_residual,
            "gap_epsilon": self.gap_epsilon,
            "second_modulus": self.second_modulus,
            "generation_time": self.generation_time,
            "residue_scale": self.residue_scale,
            "phi": self.phi.tolist(),
            "psi": self.psi.tolist(),
            "grid": asdict(self.grid),
        }


def find_lambda0(params, rates, grid, tol=ROOT_TOL) -> SpectralResult:
    """Solve ``gamma(B_lam) = 1`` and collect the Perron data at the root."""
    lam0 = _unit_crossing(lambda lam: gamma_of_lambda(params, rates, grid, lam),
                          _bracket_scale(rates, grid))
    op = assemble(params, rates, grid, lam0)
    pair = perron(op)
    if abs(pair.gamma - 1.0) > tol:
        raise ConvergenceError(f"|gamma - 1| = {abs(pair.gamma - 1.0):.3e} at the root",
                               residual=abs(pair.gamma - 1.0))
    D = d_lambda_operator(params, rates, grid, lam0)
    generation = float(pair.psi @ (-D) @ pair.phi)
    mods = np.sort(np.abs(np.linalg.eigvals(op.matrix)))[::-1]
    second = float(mods[1]) if mods.size > 1 else 0.0
    if second > 0 and generation > 0:
        gap = math.log(pair.gamma / second) / generation
    else:
        gap = math.inf
    return SpectralResult(
        lambda0=float(lam0), gamma=pair.gamma, gamma_residual=abs(pair.gamma - 1.0),
        phi=pair.phi, psi=pair.psi, second_modulus=second,
        generation_time=generation, gap_epsilon=gap,
        residue_scale=1.0 / generation if generation > 0 else math.nan,
        grid=grid, perron_residual=pair.residual, matrix=op.matrix)


@dataclass(frozen=True, eq=False)
class RankOneOperator:
    """``v -> scale * phi * (psi @ v)``."""

    phi: np.ndarray
    psi: np.ndarray
    scale: float

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        return self.scale * np.multiply.outer(v @ self.psi, self.phi)

    @property
    def matrix(self):
        return self.scale * np.outer(self.phi, self.psi)


def residue_projection(result: SpectralResult) -> RankOneOperator:
    """Residue of ``(I - B_lam)^-1`` at ``lambda0``: ``phi psi^T / (psi @ (-dB) @ phi)``."""
    if not result.generation_time > 0:
        raise NumericalError(
            f"psi @ (-dB/dlam) @ phi = {result.generation_time} is not positive")
    return RankOneOperator(result.phi, result.psi, 1.0 / result.generation_time)


# --------------------------------------------------------------------------
# local renewal (Lotka) reduction


@dataclass(frozen=True, eq=False)
class LotkaProblem:
    C: float
    rates: object

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("C must be > 0")


def net_reproduction(problem, lam=0.0):
    """``C int_0^a_dag beta(a) exp(-lam a - int_0^a mu) da`` by adaptive quadrature."""
    rates = problem.rates

    def integrand(a):
        return float(rates.beta(a)) * math.exp(-lam * a + float(rates.log_survival(a)))

    points = None
    ages = getattr(rates.fertility, "ages", None)
    if ages is not None:
        points = [p for p in ages if 0 < p < rates.a_dagger]
    val, _ = integrate.quad(integrand, 0.0, rates.a_dagger, epsabs=1e-14, epsrel=1e-13,
                            limit=500, points=points)
    return problem.C * val


def lotka_root(problem: LotkaProblem, xtol=1e-15):
    """Unique real root of ``1 - C int beta exp(-lam a - int mu) da = 0``."""
    a = np.linspace(0.0, problem.rates.a_dagger, 65)
    scale = 10.0 * (float(np.max(problem.rates.beta(a))) * problem.C
                    + problem.rates.mortality.reference_rate(problem.rates.a_dagger))
    try:
        return _unit_crossing(lambda lam: net_reproduction(problem, lam), scale or 1.0,
                              xtol=xtol)
    except OverflowError:
        raise BracketError("net reproduction overflows while bracketing") from None


@dataclass(frozen=True)
class FourierReduction:
    lambda_lotka: float
    lambda_operator: float
    discrepancy: float
    gamma_at_lotka_root: float


def fourier_reduction_check(params, rates, grid, C) -> FourierReduction:
    """Dominant eigenvalue of the local-renewal problem two ways.

    The constant Fourier mode has zero diffusion eigenvalue, so the dominant
    eigenvalue equals the real Lotka root; the second route finds where the
    spectral radius of the age-integrated operator crosses one.
    """
    lam_hat = lotka_root(LotkaProblem(C, rates))

    def radius(lam):
        return _power(fourier_operator(params, rates, grid, C, lam), 1e-12, 50_000)[0]

    lam_op = _unit_crossing(radius, _bracket_scale(rates.scaled(C), grid))
    return FourierReduction(lam_hat, lam_op, abs(lam_hat - lam_op), radius(lam_hat))
