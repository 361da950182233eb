import numpy as np
import pytest

from plastibite import (
    BlowupMortality, ConstantFertility, ConstantMortality, Grid, ModelParams, VitalRates,
)

A_DAG = 10.0


def desk(beta0=0.6, delta=8.0, eta=3.0, n_x=64, n_a=200, t_end=50.0):
    params = ModelParams(delta=delta, eta=eta, a_dagger=A_DAG, t_end=t_end)
    rates = VitalRates(BlowupMortality(0.1, 1.0, A_DAG), ConstantFertility(beta0), A_DAG)
    return params, rates, Grid(n_x, n_a, A_DAG)


@pytest.fixture
def supercritical():
    return desk(0.6)


@pytest.fixture
def subcritical():
    return desk(0.25)


@pytest.fixture
def micro():
    """8 x 16 instance with constant rates (mortality does not blow up)."""
    params = ModelParams(delta=1.0, eta=3.0, a_dagger=A_DAG)
    rates = VitalRates(ConstantMortality(0.1), ConstantFertility(1.0), A_DAG)
    return params, rates, Grid(8, 16, A_DAG)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    results = {}
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid or rep.when not in ("call", "setup"):
                continue
            name = nodeid.split("::")[1]
            number = int(name.split("_")[2])
            ok = rep.passed and results.get(number, True)
            results[number] = ok
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if results[number] else 'FAIL'}")
