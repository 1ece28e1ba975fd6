"""Development validation of the tier-convergence oracles (not shipped)."""
import math
import time

from sqcav import *
from sqcav.compare import compare_tiers

TWO_PI = 2 * math.pi


def main():
    cfg = reference_config()
    t_final = 3 * cfg.cavity.kappa / cfg.beta_r**2
    t0 = time.perf_counter()
    cmp1 = compare_tiers(cfg, "T4I", "T4R", t_final, samples=31)
    print(f"T4I vs T4R (k/b=7) max dist: {cmp1.max_distance:.5f} ({time.perf_counter()-t0:.1f} s)", flush=True)

    cfg2 = reference_config(delta_r_mhz=2400.0)
    cfg2 = SystemConfig(squeezing=cfg2.squeezing,
                        cavity=CavityParams(kappa=TWO_PI * 16.8, g=cfg2.cavity.g, delta=0.0),
                        raman=cfg2.raman, aux=cfg2.aux, decay=cfg2.decay, trunc=cfg2.trunc)
    cfg2 = balanced_config(cfg2)
    t0 = time.perf_counter()
    cmp2 = compare_tiers(cfg2, "T4I", "T4R", 3 * cfg2.cavity.kappa / cfg2.beta_r**2, samples=31)
    print(f"T4I vs T4R (k/b=14) max dist: {cmp2.max_distance:.5f} ({time.perf_counter()-t0:.1f} s)", flush=True)

    g_mhz, n = 24.0, 0.5
    om_r = 2 * g_mhz * math.sqrt(n)
    for kb, kap in [(14, 4.2), (28, 16.8)]:
        beta_mhz = kap / kb
        delta_r = g_mhz * om_r / (2 * beta_mhz)
        cfg3 = SystemConfig.from_mhz(n=n, m=math.sqrt(n * (n + 1)), kappa_mhz=kap, g_mhz=g_mhz,
                                     omega_r_mhz=om_r, delta_r_mhz=delta_r, n_max=15)
        t0 = time.perf_counter()
        cmp3 = compare_tiers(cfg3, "T3E", "T3R", 3 * cfg3.cavity.kappa / cfg3.beta_r**2, samples=31)
        print(f"T3E vs T3R (k/b={kb}) alpha={alpha(cfg3, 'T3'):.2e} max dist: "
              f"{cmp3.max_distance:.5f} ({time.perf_counter()-t0:.1f} s)", flush=True)

    for scale in (1, 2, 4):
        dr = 300.0 * scale
        cfg6 = SystemConfig.from_mhz(n=0.2, m=math.sqrt(0.2 * 1.2), omega_r_mhz=dr * 0.05,
                                     delta_r_mhz=dr, n_max=15)
        tf = cfg6.cavity.kappa / cfg6.beta_r**2
        t0 = time.perf_counter()
        c = compare_tiers(cfg6, "T3F", "T3E", tf, samples=13)
        print(f"T3F vs T3E (Dr x{scale}) max dist: {c.max_distance:.6f}  "
              f"dist(t_end): {c.distances[-1]:.6f} ({time.perf_counter()-t0:.1f} s)", flush=True)


if __name__ == "__main__":
    main()
