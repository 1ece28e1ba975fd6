"""Pure-Python adaptive Dormand-Prince 5(4) stepper on matrix-valued ODEs.

Fallback implementation used when the compiled extension is unavailable.
Must match `_rk45.pyx` step for step: same tableau, same error norm, same
controller constants, same step-to-sample-time policy.
"""

from __future__ import annotations

import numpy as np

C2, C3, C4, C5 = 0.2, 0.3, 0.8, 8.0 / 9.0
A21 = 0.2
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
E1, E3, E4, E5, E6, E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0


def _rhs(fold, t, y):
    return fold.apply(y, t)


def _err_norm(e, y0, y1, rtol, atol):
    sc = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean(np.abs(e / sc) ** 2)))


def _initial_step(fold, t0, y0, f0, rtol, atol, max_step, t_span):
    sc = atol + rtol * np.abs(y0)
    d0 = float(np.sqrt(np.mean(np.abs(y0 / sc) ** 2)))
    d1 = float(np.sqrt(np.mean(np.abs(f0 / sc) ** 2)))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = _rhs(fold, t0 + h0, y1)
    d2 = float(np.sqrt(np.mean(np.abs((f1 - f0) / sc) ** 2))) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, max_step, t_span)


def rk45_evolve(
    fold,
    rho0,
    t0,
    t_eval,
    rtol,
    atol,
    max_step,
    first_step,
    max_steps,
    obs=None,
    store_states=True,
):
    """Integrate d(rho)/dt = L(t)[rho] from t0, landing exactly on each t_eval.

    Returns (output, stats).  output is (n_eval, d, d) states when
    store_states, else (n_eval, n_obs) traces tr(obs_k @ rho).  stats is a
    dict with step counters and a status code (0 ok, 1 step underflow,
    2 max_steps exceeded).
    """
    d = fold.dim
    t_eval = np.asarray(t_eval, dtype=float)
    n_eval = len(t_eval)
    y = np.array(rho0, dtype=complex, copy=True)
    if obs is not None:
        obs = np.asarray(obs, dtype=complex)
    if store_states:
        out = np.empty((n_eval, d, d), dtype=complex)
    else:
        out = np.empty((n_eval, obs.shape[0]), dtype=complex)

    def record(i, ymat):
        if store_states:
            out[i] = ymat
        else:
            out[i] = np.einsum("kij,ji->k", obs, ymat)

    t = float(t0)
    i_ev = 0
    while i_ev < n_eval and t_eval[i_ev] <= t + 1e-15 * max(1.0, abs(t)):
        record(i_ev, y)
        i_ev += 1
    if i_ev >= n_eval:
        return out, {"status": 0, "n_steps": 0, "n_accepted": 0, "n_rejected": 0}

    t_span = t_eval[-1] - t
    f1 = _rhs(fold, t, y)
    h_ctrl = first_step if first_step else _initial_step(fold, t, y, f1, rtol, atol, max_step, t_span)
    h_ctrl = min(h_ctrl, max_step)

    n_steps = n_acc = n_rej = 0
    rejected_last = False
    status = 0
    while i_ev < n_eval:
        target = t_eval[i_ev]
        h_try = min(h_ctrl, max_step)
        truncated = False
        if t + h_try >= target:
            h_try = target - t
            truncated = True
        if h_try < 16.0 * np.finfo(float).eps * max(1.0, abs(t)):
            status = 1
            break
        n_steps += 1
        if n_steps > max_steps:
            status = 2
            break
        h = h_try
        k2 = _rhs(fold, t + C2 * h, y + h * (A21 * f1))
        k3 = _rhs(fold, t + C3 * h, y + h * (A31 * f1 + A32 * k2))
        k4 = _rhs(fold, t + C4 * h, y + h * (A41 * f1 + A42 * k2 + A43 * k3))
        k5 = _rhs(fold, t + C5 * h, y + h * (A51 * f1 + A52 * k2 + A53 * k3 + A54 * k4))
        k6 = _rhs(fold, t + h, y + h * (A61 * f1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
        y_new = y + h * (B1 * f1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
        k7 = _rhs(fold, t + h, y_new)
        e = h * (E1 * f1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        err = _err_norm(e, y, y_new, rtol, atol)
        if err > 1.0:
            n_rej += 1
            rejected_last = True
            h_ctrl = h * max(MIN_FACTOR, SAFETY * err ** -0.2)
            continue
        n_acc += 1
        factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR, SAFETY * err ** -0.2)
        if rejected_last:
            factor = min(1.0, factor)
        rejected_last = False
        y = y_new
        f1 = k7
        if truncated:
            t = target
            record(i_ev, y)
            i_ev += 1
            h_ctrl = max(h_ctrl, h * factor)
        else:
            t = t + h
            h_ctrl = h * factor

    return out, {"status": status, "n_steps": n_steps, "n_accepted": n_acc, "n_rejected": n_rej}
