"""Steady states and two-time correlation functions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvariantError, SteadyStateError
from .integrate import DEFAULT_CONTROLS, StepControls, evolve_expectations
from .liouvillian import Liouvillian, apply_liouvillian, superoperator
from .operators import as_operator

DIRECT_DIM_LIMIT = 64
UNIQUENESS_GAP = 1e-8


@dataclass(frozen=True)
class SteadyStateResult:
    rho: np.ndarray
    method: str  # "nullspace" or "integration" (fallback)
    gap: float | None  # second-smallest singular value (nullspace path)
    residual: float  # max |d(rho)/dt| at the solution

    def __iter__(self):  # allow rho, info = steady_state(...)
        yield self.rho
        yield self

    @property
    def used_fallback(self) -> bool:
        return self.method != "nullspace"


def steady_state(
    liou: Liouvillian,
    gap_tol: float = UNIQUENESS_GAP,
    residual_tol: float = 1e-10,
    controls: StepControls = DEFAULT_CONTROLS,
) -> SteadyStateResult:
    """Unique stationary state of a static generator.

    For dim <= 64 the dim^2 x dim^2 superoperator is materialized and its
    null space solved by SVD; uniqueness requires the second-smallest
    singular value to exceed gap_tol.  Larger systems fall back to long-time
    integration from the maximally mixed state, flagged in the result.
    """
    if not liou.is_static:
        raise InvariantError("steady_state requires a time-independent generator")
    d = liou.dim
    if d <= DIRECT_DIM_LIMIT:
        s_mat = superoperator(liou)
        u, sv, vh = np.linalg.svd(s_mat)
        gap = float(sv[-2]) if len(sv) >= 2 else np.inf
        if gap <= gap_tol:
            raise SteadyStateError(
                f"degenerate null space: singular-value gap {gap:.3e} <= {gap_tol:.1e}"
            )
        vec = vh[-1].conj()
        rho = vec.reshape(d, d)
        rho = 0.5 * (rho + rho.conj().T)
        tr = complex(np.trace(rho))
        if abs(tr) < 1e-12:
            raise SteadyStateError("null vector is traceless; no normalizable steady state")
        rho = np.ascontiguousarray(rho / tr)
        residual = float(np.max(np.abs(apply_liouvillian(liou, rho))))
        return SteadyStateResult(rho=rho, method="nullspace", gap=gap, residual=residual)

    # fallback: integrate from the maximally mixed state in doubling time
    # chunks until stationary.  The reachable residual is floored near
    # (fastest rate) x (accumulated state error), so the chunks run with
    # tolerances well below the requested residual; generators with very
    # fast rates cannot meet a tight absolute residual in double precision.
    rho = np.eye(d, dtype=complex) / d
    drift = float(np.max(np.abs(apply_liouvillian(liou, rho))))
    scale = max(drift, 1e-12)
    t_chunk = 1.0 / scale
    total = 0.0
    ctrl = controls.with_(
        validate=False,
        rtol=min(controls.rtol, max(1e-3 * residual_tol / scale, 1e-13)),
        atol=min(controls.atol, max(1e-4 * residual_tol / scale, 1e-14)),
        max_steps=min(controls.max_steps, 5_000_000),
    )
    from .integrate import evolve  # local import to avoid cycle at module load

    residual = drift
    for _ in range(40):
        traj = evolve(liou, rho, t_chunk, controls=ctrl, t_eval=np.array([0.0, t_chunk]))
        rho = traj.final
        total += t_chunk
        residual = float(np.max(np.abs(apply_liouvillian(liou, rho))))
        if residual < residual_tol:
            rho = 0.5 * (rho + rho.conj().T)
            rho = rho / np.trace(rho).real
            return SteadyStateResult(
                rho=np.ascontiguousarray(rho), method="integration", gap=None, residual=residual
            )
        t_chunk *= 2.0
    raise SteadyStateError(
        f"no convergence to a steady state: residual {residual:.3e} "
        f"(target {residual_tol:.1e}) after t={total:.3g}"
    )


def two_time_correlator(
    liou: Liouvillian,
    rho_ss: np.ndarray,
    a_op: np.ndarray,
    b_op: np.ndarray,
    tau_grid: np.ndarray,
    controls: StepControls = DEFAULT_CONTROLS,
    reverse: bool = False,
) -> np.ndarray:
    """<A(tau) B> by the quantum regression theorem (reverse: <B A(tau)>).

    Evolves the operator-valued initial condition B rho_ss (or rho_ss B)
    under the same generator and traces against A.  Commutator correlators
    follow from two calls, or from `commutator_correlator` which uses
    linearity to evolve the commutator initial condition once.
    """
    if not liou.is_static:
        raise InvariantError("regression correlators require a static generator")
    rho_ss = as_operator(rho_ss)
    b = as_operator(b_op)
    x0 = (rho_ss @ b) if reverse else (b @ rho_ss)
    vals = evolve_expectations(liou, x0, tau_grid, [a_op], controls=controls)
    return vals[:, 0]


def commutator_correlator(
    liou: Liouvillian,
    rho_ss: np.ndarray,
    a_op: np.ndarray,
    b_op: np.ndarray,
    tau_grid: np.ndarray,
    controls: StepControls = DEFAULT_CONTROLS,
) -> np.ndarray:
    """<[A(tau), B]> evolved as a single initial condition [B, rho_ss]."""
    if not liou.is_static:
        raise InvariantError("regression correlators require a static generator")
    rho_ss = as_operator(rho_ss)
    b = as_operator(b_op)
    x0 = b @ rho_ss - rho_ss @ b
    vals = evolve_expectations(liou, x0, tau_grid, [a_op], controls=controls)
    return vals[:, 0]
