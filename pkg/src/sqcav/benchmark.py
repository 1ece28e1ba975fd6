"""Benchmark the compiled integration kernel against the Python fallback.

Run as ``python -m sqcav.benchmark``.  Workloads mirror the expensive paths:
the full three-level tier (stiff detuned dynamics) and the effective
two-level-plus-cavity tier used by the regression spectra.
"""

from __future__ import annotations

import time

import numpy as np

from .compare import atom_bloch_state, initial_state_for
from .kernel import backend_name, compiled_available, run_rk45
from .models import SystemConfig, build_T3E, build_T3F
from .integrate import StepControls


def _workloads():
    cfg = SystemConfig.from_mhz(
        n=0.2,
        m=np.sqrt(0.2 * 1.2),
        omega_r_mhz=15.0,
        delta_r_mhz=300.0,
        n_max=9,
    )
    t3f = build_T3F(cfg)
    t3e = build_T3E(cfg)
    rho_a = atom_bloch_state(0.0, 1.0, 0.0)
    yield "T3F (3 x Fock, stiff)", t3f, initial_state_for(t3f, cfg, rho_a), 0.25
    yield "T3E (2 x Fock)", t3e, initial_state_for(t3e, cfg, rho_a), 4.0


def run(repeats: int = 1) -> list[dict]:
    controls = StepControls(rtol=1e-8, atol=1e-10)
    rows = []
    for name, liou, rho0, t_final in _workloads():
        t_eval = np.linspace(0.0, t_final, 21)
        entry = {"workload": name, "dim": liou.dim}
        for backend in ("compiled", "python"):
            if backend == "compiled" and not compiled_available():
                entry["compiled_s"] = None
                continue
            best = np.inf
            for _ in range(repeats):
                t0 = time.perf_counter()
                out, stats = run_rk45(
                    liou.folded(),
                    rho0,
                    0.0,
                    t_eval,
                    controls.rtol,
                    controls.atol,
                    controls.max_step,
                    None,
                    controls.max_steps,
                    force_backend=backend,
                )
                best = min(best, time.perf_counter() - t0)
            entry[f"{backend}_s"] = best
            entry[f"{backend}_steps"] = stats["n_steps"]
            entry[f"{backend}_final"] = out[-1]
        if entry.get("compiled_s") and entry.get("python_s"):
            entry["speedup"] = entry["python_s"] / entry["compiled_s"]
            entry["max_abs_diff"] = float(
                np.max(np.abs(entry.pop("compiled_final") - entry.pop("python_final")))
            )
        rows.append(entry)
    return rows


def main():
    print(f"default backend: {backend_name()}")
    if not compiled_available():
        print("compiled kernel not built; benchmarking the fallback only")
    for row in run():
        print(f"\n{row['workload']} (dim {row['dim']})")
        if row.get("compiled_s"):
            print(f"  compiled: {row['compiled_s']:.3f} s ({row['compiled_steps']} steps)")
        print(f"  python:   {row['python_s']:.3f} s ({row['python_steps']} steps)")
        if "speedup" in row:
            print(f"  speedup:  {row['speedup']:.1f}x   max |diff| = {row['max_abs_diff']:.2e}")


if __name__ == "__main__":
    main()
