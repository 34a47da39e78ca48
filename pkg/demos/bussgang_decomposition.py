#!/usr/bin/env python
"""Bussgang view of a third-order power amplifier.

Draw Gaussian symbols, push them through the PA, and compare sample
moments with the closed-form gain and distortion covariance.
"""

import numpy as np

from dabprecoding import DEFAULT_PA, bussgang_gain, distortion_covariance, expected_output_power, project_power
from dabprecoding.validate import bussgang_moments, empirical_output_power

rng = np.random.default_rng(1)
M, K = 4, 2
P = (rng.standard_normal((M, K)) + 1j * rng.standard_normal((M, K))) / np.sqrt(2)

# the per-antenna gain shrinks as the antenna is driven harder
print("antenna power :", np.round(np.sum(np.abs(P) ** 2, axis=1), 3))
print("bussgang gain :", np.round(bussgang_gain(P, DEFAULT_PA), 4))

# distortion is uncorrelated with the input and has covariance C_e
xe, ee = bussgang_moments(P, DEFAULT_PA, 400_000, seed=2)
C = distortion_covariance(P, DEFAULT_PA)
print("max |E[x e^H]| / SE      :", np.max(np.abs(xe.mean) / xe.stderr).round(2))
print("max |E[e e^H] - C_e| / SE:", np.max(np.abs(ee.mean - C) / ee.stderr).round(2))

# the distortion is correlated across antennas, so it is beamformed too
corr = C / np.sqrt(np.outer(np.diag(C).real, np.diag(C).real))
print("distortion correlation between antennas 0 and 1:", np.round(abs(corr[0, 1]), 3))

# scale P so the *output* power hits 43 dBm
p_tot = 10 ** (43 / 10) * 1e-3
Pp = project_power(P, DEFAULT_PA, p_tot)
mc, se = empirical_output_power(Pp, DEFAULT_PA, 400_000, seed=3)
print(f"output power: closed form {expected_output_power(Pp, DEFAULT_PA):.6f} W, Monte Carlo {mc:.4f} +/- {se:.4f} W")
