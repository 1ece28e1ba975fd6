"""Backend selection for the hot integration kernel.

The compiled Cython extension is used when it imported successfully and the
environment variable ``SQCAV_PURE_PYTHON`` is unset; otherwise the pure
NumPy implementation takes over with identical semantics.  `run_rk45` is
the single entry point used by `sqcav.integrate`.
"""

from __future__ import annotations

import os

import numpy as np

from . import _rk45_py
from .liouvillian import FoldedGenerator

try:
    from . import _rk45 as _rk45_ext
except ImportError:  # pragma: no cover - build-environment dependent
    _rk45_ext = None

_FORCE_PY = bool(os.environ.get("SQCAV_PURE_PYTHON"))


def backend_name() -> str:
    return "python" if (_rk45_ext is None or _FORCE_PY) else "compiled"


def compiled_available() -> bool:
    return _rk45_ext is not None


def _coo_parts(op):
    coo = op.tocoo()
    order = np.lexsort((coo.col, coo.row))
    rows = np.ascontiguousarray(coo.row[order], dtype=np.int64)
    cols = np.ascontiguousarray(coo.col[order], dtype=np.int64)
    vals = np.ascontiguousarray(coo.data[order], dtype=complex)
    return rows, cols, vals


class KernelPlan:
    """Flattened coordinate-form operator arena consumed by the compiled stepper."""

    def __init__(self, fold: FoldedGenerator):
        d = fold.dim
        ops = [fold.kl, fold.kr]
        st_ids = []
        for a, b in zip(fold.st_a, fold.st_b):
            st_ids.append((len(ops), len(ops) + 1))
            ops.extend([a, b])
        ph_ids = []
        for k in range(len(fold.ph_w)):
            base = len(ops)
            # the completion operator BA is applied on both sides; one copy
            ph_ids.append((base, base + 1, base + 2, base + 2))
            ops.extend([fold.ph_a2[k], fold.ph_b[k], fold.ph_ba_l[k]])
        hm_ids = []
        for k in range(len(fold.hm_omega)):
            hm_ids.append((len(ops), len(ops) + 1))
            ops.extend([fold.hm_gp_l[k], fold.hm_gm_l[k]])

        all_rows, all_cols, all_vals, offs = [], [], [], [0]
        pos = 0
        for op in ops:
            r, c, v = _coo_parts(op)
            all_rows.append(r)
            all_cols.append(c)
            all_vals.append(v)
            pos += len(v)
            offs.append(pos)
        self.dim = d
        z64 = np.zeros(0, dtype=np.int64)
        self.op_rows = np.concatenate(all_rows) if pos else z64
        self.op_cols = np.concatenate(all_cols) if pos else z64
        self.op_vals = np.concatenate(all_vals) if pos else np.zeros(0, dtype=complex)
        self.op_off = np.asarray(offs, dtype=np.int64)
        self.st_ids = np.asarray(st_ids, dtype=np.int32).reshape(len(st_ids), 2)
        self.ph_ids = np.asarray(ph_ids, dtype=np.int32).reshape(len(ph_ids), 4)
        self.ph_w = np.ascontiguousarray(fold.ph_w, dtype=complex)
        self.ph_om = np.ascontiguousarray(fold.ph_omega, dtype=float)
        self.hm_ids = np.asarray(hm_ids, dtype=np.int32).reshape(len(hm_ids), 2)
        self.hm_om = np.ascontiguousarray(fold.hm_omega, dtype=float)


def run_rk45(
    fold: FoldedGenerator,
    rho0: np.ndarray,
    t0: float,
    t_eval: np.ndarray,
    rtol: float,
    atol: float,
    max_step: float,
    first_step: float | None,
    max_steps: int,
    obs: np.ndarray | None = None,
    store_states: bool = True,
    force_backend: str | None = None,
):
    """Dispatch one integration run to the selected backend."""
    backend = force_backend or backend_name()
    if backend == "python":
        return _rk45_py.rk45_evolve(
            fold, rho0, t0, t_eval, rtol, atol, max_step, first_step, max_steps,
            obs=obs, store_states=store_states,
        )
    d = fold.dim
    plan = getattr(fold, "_kernel_plan", None)
    if plan is None:
        plan = KernelPlan(fold)
        fold._kernel_plan = plan
    t_eval = np.ascontiguousarray(t_eval, dtype=float)
    n_eval = len(t_eval)
    if obs is None:
        obs_arr = np.zeros((0, d, d), dtype=complex)
    else:
        obs_arr = np.ascontiguousarray(obs, dtype=complex)
    if store_states:
        out_states = np.empty((n_eval, d, d), dtype=complex)
        out_obs = np.zeros((0, 0), dtype=complex)
    else:
        out_states = np.zeros((0, d, d), dtype=complex)
        out_obs = np.empty((n_eval, obs_arr.shape[0]), dtype=complex)
    stats = _rk45_ext.evolve(
        d,
        plan.op_rows,
        plan.op_cols,
        plan.op_vals,
        plan.op_off,
        plan.st_ids,
        plan.ph_ids,
        plan.ph_w,
        plan.ph_om,
        plan.hm_ids,
        plan.hm_om,
        np.ascontiguousarray(rho0, dtype=complex),
        float(t0),
        t_eval,
        float(rtol),
        float(atol),
        float(max_step),
        float(first_step) if first_step else 0.0,
        int(max_steps),
        obs_arr,
        bool(store_states),
        out_states,
        out_obs,
    )
    return (out_states if store_states else out_obs), stats
