#!/usr/bin/env python
"""Where the PA distortion goes: far-field patterns of MRT and DAB.

One user at 90 degrees. MRT sends the distortion along the main beam; at
high SNR DAB moves it away from the user.
"""

import numpy as np

from dabprecoding import OptimizerOptions, PatternConfig, run_pattern

for snr in (30.0, -10.0):
    cfg = PatternConfig(user_aods_deg=(90.0,), snr_db=snr, optimizer=OptimizerOptions(n_random_inits=8))
    res = run_pattern(cfg, output_path=False)
    at_user = int(np.argmin(np.abs(res.psi_deg - 90.0)))
    print(f"SNR {snr:.0f} dB")
    for name in ("mrt", "dab"):
        lin, dist = res.normalized_db(name)
        print(
            f"  {name}: distortion peak at {res.psi_deg[np.argmax(dist)]:.2f} deg, "
            f"{dist[at_user] - dist.max():.1f} dB towards the user relative to that peak"
        )
