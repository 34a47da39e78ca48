#!/usr/bin/env python
"""How quickly the projected gradient ascent settles at low and high SNR."""

import numpy as np

from dabprecoding import GeometryConfig, OptimizerOptions, SweepConfig, run_convergence

cfg = SweepConfig(
    geometry=GeometryConfig(M=16, K=2, L=10, gamma2=1e-11),
    snr_db_list=(0.0, 30.0),
    n_channels=10,
    optimizer=OptimizerOptions(n_random_inits=8),
)
res = run_convergence(cfg, output_path=False)

for snr, trace, n99 in zip(res.snr_db, res.mean, res.iterations_to_fraction(0.99)):
    marks = trace[[0, 1, 2, 5, 10, 20, 50]]
    print(f"{snr:4.0f} dB  iterations 0,1,2,5,10,20,50: {np.round(marks, 2)}  (99% after {n99})")
