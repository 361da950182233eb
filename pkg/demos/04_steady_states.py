"""Steady states exist only at criticality.

Scaling the fertility by 1 / gamma(B_0) makes lambda0 = 0. The steady states
are then the ray c * T(0, a) phi, strictly positive away from the maximum age.
Away from criticality the flow grows or decays instead.
"""

import numpy as np

from plastibite import (
    BlowupMortality, ConstantFertility, Grid, ModelParams, SimConfig, VitalRates, build_steady,
    classify, criticalize, find_lambda0, growth_rate, run, verify_steady,
)

params = ModelParams(delta=8.0, eta=3.0, a_dagger=10.0)
base = VitalRates(BlowupMortality(0.1, 1.0, 10.0), ConstantFertility(0.25), 10.0)
grid = Grid(64, 200, 10.0)

for m in (1.0, 2.4):
    rates = base.scaled(m)
    lam0 = find_lambda0(params, rates, grid).lambda0
    regime = classify(lam0)
    traj = run(np.ones((200, 64)), SimConfig(64, 200), rates, params)
    print(f"fertility x{m}: lambda0 {lam0:+.5f} -> {regime.kind.value} "
          f"({regime.kind.description}); simulated rate {growth_rate(traj, (10, 50)):+.5f}")

crit = criticalize(params, base, grid)
print(f"critical fertility scale {crit.scale:.8f}, lambda0 {crit.spectral.lambda0:.1e}")
state = build_steady(crit.spectral, crit.rates, params, c=1.0)
report = verify_steady(state, SimConfig(64, 200), crit.rates, params)
print(f"rho0 = {state.rho0:.4e} on a <= {state.a1}; one-step residual {report.residual:.1e}; "
      f"drift over {report.horizon:g} time units {report.drift:.1e}")
