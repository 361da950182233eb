import math

import numpy as np
import pytest

from plastibite import (
    BlowupMortality, CircleGrid, ConstantFertility, ConstantMortality, DiffusionPropagator,
    DomainError, EvolutionFamily, Grid, VitalRates, evolve, heat_step,
)


def test_grid_geometry():
    c = CircleGrid(64)
    assert c.h == 24 / 64 and c.x[-1] == pytest.approx(24 - c.h)
    assert np.allclose(c.xi, 2 * np.pi * np.arange(33) / 24)
    g = Grid(64, 200, 10.0)
    assert g.ages.da == 0.05
    assert g.ages.centers[0] == 0.025 and g.ages.centers[-1] == pytest.approx(9.975)
    nodes, weights = g.age_quadrature
    assert weights.sum() == pytest.approx(10.0, rel=1e-14)
    assert nodes.min() > 0 and nodes.max() < 10.0
    assert g.refined().n_x == 128 and g.refined().n_a == 400


def test_heat_examples():
    c = CircleGrid(64)
    assert np.allclose(heat_step(np.full(64, 3.5), 7.0, 2.0), 3.5, rtol=0, atol=1e-15)
    f = np.cos(2 * np.pi * c.x / 24)
    out = heat_step(f, 1.0, 1.0)
    # 0.9337571..., quoted elsewhere rounded to 0.933758
    assert math.exp(-(2 * np.pi / 24) ** 2) == pytest.approx(0.933758, abs=1e-6)
    assert np.allclose(out, f * math.exp(-(2 * np.pi / 24) ** 2), rtol=0, atol=1e-15)
    g = np.random.default_rng(1).random(64)
    assert np.array_equal(heat_step(g, 0.0, 1.0), g)
    with pytest.raises(DomainError):
        heat_step(g, -1e-3, 1.0)


@pytest.mark.parametrize("k", [1, 5, 17, 32])
def test_single_mode_decay(k):
    c = CircleGrid(64)
    for t in (0.01, 0.3, 2.0):
        f = np.cos(2 * np.pi * k * c.x / 24) + np.sin(2 * np.pi * k * c.x / 24) * (k < 32)
        out = heat_step(f, t, 0.7)
        assert np.max(np.abs(out - f * math.exp(-0.7 * (2 * np.pi * k / 24) ** 2 * t))) < 1e-12


def test_mass_and_semigroup(rng):
    f = rng.random(64)
    a = heat_step(f, 0.3, 2.0)
    assert abs(a.sum() - f.sum()) <= 1e-13
    assert np.max(np.abs(heat_step(a, 0.4, 2.0) - heat_step(f, 0.7, 2.0))) < 1e-12


def test_symbol_invariants():
    prop = DiffusionPropagator(1.0, CircleGrid(32))
    s = prop.symbol(np.array([0.0, 0.5, 3.0]))
    assert s.shape == (3, 17)
    assert np.all(s[:, 0] == 1.0) and np.all((s > 0) & (s <= 1))


def test_matrix_matches_apply(rng):
    prop = DiffusionPropagator(1.5, CircleGrid(16))
    f = rng.random(16)
    assert np.allclose(prop.matrix(0.2) @ f, prop.apply(f, 0.2), atol=1e-14)


def test_maximum_principle_above_positivity_threshold(rng):
    prop = DiffusionPropagator(1.0, CircleGrid(64))
    t0 = prop.positivity_threshold()
    for t in (t0, 2 * t0, 10 * t0):
        for _ in range(20):
            f = rng.random(64) * (rng.random(64) < 0.2)
            out = prop.apply(f, t)
            assert out.min() >= f.min() - 1e-12 and out.max() <= f.max() + 1e-12


def test_exact_symbol_undershoots_for_short_times():
    # The discrete exp(t delta Laplacian) with the exact symbol has negative side lobes
    # when delta t << h^2: a known limitation of the spectral propagator.
    prop = DiffusionPropagator(1.0, CircleGrid(64))
    spike = np.zeros(64)
    spike[10] = 1.0
    assert prop.apply(spike, 0.05).min() < -1e-4
    assert prop.apply(spike, prop.positivity_threshold()).min() > -1e-14


def _family(mortality):
    rates = VitalRates(mortality, ConstantFertility(1.0), 10.0)
    return EvolutionFamily(rates, DiffusionPropagator(1.2, CircleGrid(64)))


def test_evolve_examples(rng):
    f = rng.random(64)
    fam = _family(BlowupMortality(0.1, 1.0, 10.0))
    assert np.array_equal(evolve(fam, 1.0, 2.0, 2.0, f), f)
    fam0 = _family(ConstantMortality(0.0))
    assert np.allclose(evolve(fam0, 0.5, 1.0, 3.0, f), heat_step(f, 2.0, 1.2), atol=1e-15)
    famc = _family(ConstantMortality(0.4))
    out = famc(0.0, 1.0, 4.0, np.full(64, 2.0))
    assert np.allclose(out, 2.0 * math.exp(-0.4 * 3.0), rtol=1e-14)
    with pytest.raises(DomainError):
        evolve(fam, 0.0, 3.0, 2.0, f)
    with pytest.raises(DomainError):
        evolve(fam, 5.0, 0.0, 6.0, f)


def test_evolve_cocycle(rng):
    fam = _family(BlowupMortality(0.1, 1.0, 10.0))
    f = rng.random(64)
    for s0, tau, r, s in ((0.0, 0.5, 2.0, 6.0), (1.0, 0.0, 4.5, 8.9)):
        direct = evolve(fam, s0, tau, s, f)
        split = evolve(fam, s0, r, s, evolve(fam, s0, tau, r, f))
        assert np.max(np.abs(direct - split)) <= 1e-10 * np.max(np.abs(direct))


def test_evolve_positivity(rng):
    fam = _family(BlowupMortality(0.1, 1.0, 10.0))
    t0 = fam.propagator.positivity_threshold()
    for _ in range(50):
        f = rng.random(64) * (rng.random(64) < 0.5)
        tau = rng.uniform(0, 5)
        s = tau + t0 + rng.uniform(0, 4)
        assert evolve(fam, 0.0, tau, s, f).min() >= -1e-12


def test_evolve_to_max_age_vanishes():
    fam = _family(BlowupMortality(0.1, 1.0, 10.0))
    assert np.all(evolve(fam, 0.0, 1.0, 10.0, np.ones(64)) == 0.0)
