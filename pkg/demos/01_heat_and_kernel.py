"""Heat flow on the 24-hour circle and the biting-time kernel.

Diffusion in biting time is applied mode by mode, so a single Fourier mode
decays by exactly exp(-delta xi^2 t). The redistribution kernel weights a
parent's biting time s against the offspring's x; it vanishes at x = s and
outside the window (x - eta, x + eta), and sources outside (0, 24) do not count.
"""

import math

import numpy as np

from plastibite import CircleGrid, DiffusionPropagator, heat_step, kernel_eval, kernel_weights

circle = CircleGrid(64)
x = circle.x
profile = np.cos(2 * np.pi * x / 24)
out = heat_step(profile, 1.0, 1.0)
print("mode-1 factor after t=1, delta=1:", out[0] / profile[0],
      "closed form:", math.exp(-(2 * np.pi / 24) ** 2))

spike = np.zeros(64)
spike[32] = 1.0
prop = DiffusionPropagator(1.0, circle)
for t in (0.05, prop.positivity_threshold(), 1.0):
    s = prop.apply(spike, t)
    print(f"spike after t={t:.3f}: mass {s.sum():.15f}, min {s.min():+.2e}")

print("K(5, 5) =", kernel_eval(5.0, 5.0), " K(2, 1) =", kernel_eval(2.0, 1.0),
      " K(1, -0.5) =", kernel_eval(1.0, -0.5))
W = kernel_weights(64, 3.0)
rows = W.sum(axis=1)
print(f"kernel mass per row: interior {rows[32]:.6f}, edge x=0 {rows[0]:.6f} (truncated window)")
