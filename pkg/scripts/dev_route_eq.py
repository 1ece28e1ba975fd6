"""Development measurement of route-equivalence quality vs kappa/beta (not shipped)."""
import math
import time

import numpy as np

from sqcav import *
from sqcav.spectra import default_tau_grid

TWO_PI = 2 * math.pi


def run(kb: float, rtol: float, tau_mult: float, n_max: int = 15):
    beta_mhz = 4.2 / kb
    delta_r = 24.0 * 240.0 / (2 * beta_mhz)
    cfg = SystemConfig.from_mhz(n=0.5, m=math.sqrt(0.75), kappa_mhz=4.2, g_mhz=24.0,
                                omega_r_mhz=240.0, delta_r_mhz=delta_r,
                                gamma_r_mhz=5.2, n_max=n_max)
    cfg = balanced_config(cfg)
    rates = bloch_rates("T4R", cfg)
    nu = TWO_PI * np.linspace(-1.0, 1.0, 201)
    ctrl = StepControls(rtol=rtol, atol=1e-10)
    tau_max = tau_mult / min(rates.gamma_y, cfg.cavity.kappa)
    tau = default_tau_grid(cfg.cavity.kappa, rates.gamma_y)
    tau = tau[tau <= tau_max]
    t0 = time.perf_counter()
    for mode in ("single", "sym", "antisym"):
        probe = ProbeConfig.from_mode(mode, TWO_PI * 0.01, nu)
        res = spectrum_scan(cfg, probe, method="both", tier="T4", controls=ctrl, tau_grid=tau)
        ana, num = res["analytic"], res["numeric"]
        out = [f"kb={kb} mode={mode}:"]
        for name, a2a, a2n in (("plus", ana.abs2_plus, num.abs2_plus),
                               ("minus", ana.abs2_minus, num.abs2_minus)):
            peak = a2a.max()
            if peak == 0:
                continue
            mask = a2a > 1e-4 * peak
            rel = np.abs(a2n[mask] - a2a[mask]) / a2a[mask]
            out.append(f"{name} max {rel.max()*100:.2f}%")
        print("  ".join(out), flush=True)
    print(f"kb={kb}: total {time.perf_counter()-t0:.1f} s (tau pts {len(tau)})", flush=True)


if __name__ == "__main__":
    run(7.0, 1e-6, 10.0)
    run(14.0, 1e-6, 10.0)
    run(21.0, 1e-6, 10.0)
