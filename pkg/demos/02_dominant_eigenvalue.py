"""Dominant eigenvalue from the net-reproduction operator.

lambda0 is where the spectral radius of B_lambda crosses one. The Perron
vectors give the stable biting-time profile and the weights of the rank-one
residue. With the kernel replaced by a constant, the problem reduces to the
scalar Lotka equation, which is a useful independent check.
"""

import numpy as np

from plastibite import (
    BlowupMortality, ConstantFertility, Grid, ModelParams, VitalRates, find_lambda0,
    fourier_reduction_check, gamma_of_lambda, residue_projection,
)

params = ModelParams(delta=8.0, eta=3.0, a_dagger=10.0)
rates = VitalRates(BlowupMortality(0.1, 1.0, 10.0), ConstantFertility(0.6), 10.0)
grid = Grid(64, 200, 10.0)

for lam in (-0.2, 0.0, 0.2, 0.4):
    print(f"gamma(B_{lam:+.1f}) = {gamma_of_lambda(params, rates, grid, lam):.6f}")

res = find_lambda0(params, rates, grid)
print(f"lambda0 = {res.lambda0:.10f}, |gamma - 1| = {res.gamma_residual:.1e}")
print(f"generation time {res.generation_time:.4f}, gap estimate {res.gap_epsilon:.4f}")
print("phi is largest mid-day:", int(np.argmax(res.phi)), "of", grid.n_x, "nodes")

shifted = find_lambda0(params, rates.shifted(0.3), grid)
print(f"mortality + 0.3 moves lambda0 by {shifted.lambda0 - res.lambda0:+.10f}")

C = residue_projection(res)
print(f"residue scale {C.scale:.6f}; C(phi) = scale * phi: {np.allclose(C(res.phi), C.scale * res.phi)}")

red = fourier_reduction_check(params, rates, grid, 1.0)
print(f"local renewal: Lotka root {red.lambda_lotka:.10f}, operator root "
      f"{red.lambda_operator:.10f}, difference {red.discrepancy:.1e}")
