"""Time propagation of density matrices under a Liouvillian."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import IntegrationError, InvariantError, PositivityError
from .kernel import run_rk45
from .liouvillian import Liouvillian
from .operators import as_operator, expect, hermiticity_defect, validate_density_matrix


@dataclass(frozen=True)
class StepControls:
    """Tolerances and limits for the adaptive integrator and state validation."""

    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: float = math.inf
    first_step: float | None = None
    max_steps: int = 50_000_000
    herm_tol: float = 1e-10
    trace_tol: float = 1e-9
    positivity_tol: float = 1e-6
    validate: bool = True

    def with_(self, **kw) -> "StepControls":
        return replace(self, **kw)


DEFAULT_CONTROLS = StepControls()


@dataclass
class Trajectory:
    """Sampled solution of the master equation."""

    ts: np.ndarray
    states: np.ndarray  # (n, d, d)
    stats: dict

    def expect(self, op: np.ndarray) -> np.ndarray:
        return np.einsum("ij,kji->k", np.asarray(op, dtype=complex), self.states)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def _check_stats(stats: dict):
    if stats["status"] == 1:
        raise IntegrationError(
            "step size underflow: the requested tolerance cannot be met "
            f"(accepted {stats['n_accepted']}, rejected {stats['n_rejected']})"
        )
    if stats["status"] == 2:
        raise IntegrationError(f"step budget exceeded after {stats['n_steps']} steps")


def evolve(
    liou: Liouvillian,
    rho0: np.ndarray,
    t_final: float,
    controls: StepControls = DEFAULT_CONTROLS,
    t_eval: np.ndarray | None = None,
    t0: float = 0.0,
) -> Trajectory:
    """Propagate rho0 from t0 to t_final with adaptive RK45.

    Every emitted state is re-validated: Hermiticity and trace against the
    control tolerances, positivity against controls.positivity_tol.  States
    are never renormalized; a violation raises instead, since it signals an
    inadequate truncation or tolerance.
    """
    rho0 = as_operator(rho0)
    if rho0.shape[0] != liou.dim:
        raise InvariantError(f"initial state dim {rho0.shape[0]} vs generator dim {liou.dim}")
    if t_final <= t0:
        raise InvariantError("t_final must exceed t0")
    if controls.validate:
        validate_density_matrix(
            rho0,
            herm_tol=controls.herm_tol,
            trace_tol=controls.trace_tol,
            eig_floor=-controls.positivity_tol,
            what="initial state",
        )
    if t_eval is None:
        t_eval = np.linspace(t0, t_final, 201)
    t_eval = np.asarray(t_eval, dtype=float)
    if np.any(np.diff(t_eval) <= 0) or t_eval[0] < t0 - 1e-15:
        raise InvariantError("t_eval must be strictly increasing and start at or after t0")

    states, stats = run_rk45(
        liou.folded(),
        rho0,
        t0,
        t_eval,
        controls.rtol,
        controls.atol,
        controls.max_step,
        controls.first_step,
        controls.max_steps,
        store_states=True,
    )
    _check_stats(stats)
    if controls.validate:
        for k in range(len(t_eval)):
            st = states[k]
            defect = hermiticity_defect(st)
            if defect > 100 * controls.herm_tol:
                raise InvariantError(
                    f"state at t={t_eval[k]:.6g} lost Hermiticity (defect {defect:.2e})"
                )
            tr_dev = abs(np.trace(st) - 1.0)
            if tr_dev > controls.trace_tol:
                raise InvariantError(
                    f"state at t={t_eval[k]:.6g} trace deviates by {tr_dev:.2e} "
                    f"(> {controls.trace_tol:.1e}); renormalization is not performed"
                )
            w_min = float(np.linalg.eigvalsh(0.5 * (st + st.conj().T))[0])
            if w_min < -controls.positivity_tol:
                raise PositivityError(
                    f"state at t={t_eval[k]:.6g} has eigenvalue {w_min:.2e} below "
                    f"-{controls.positivity_tol:.1e}; increase n_max or tighten steps"
                )
    return Trajectory(ts=t_eval, states=states, stats=stats)


def evolve_expectations(
    liou: Liouvillian,
    x0: np.ndarray,
    t_eval: np.ndarray,
    observables,
    controls: StepControls = DEFAULT_CONTROLS,
    t0: float = 0.0,
) -> np.ndarray:
    """Propagate an arbitrary (possibly non-Hermitian) initial operator and
    record tr(O_k rho(t)) at the sample times.  No state validation: this is
    the workhorse for regression correlators.
    """
    x0 = as_operator(x0)
    obs = np.asarray([as_operator(o) for o in observables], dtype=complex)
    t_eval = np.asarray(t_eval, dtype=float)
    vals, stats = run_rk45(
        liou.folded(),
        x0,
        t0,
        t_eval,
        controls.rtol,
        controls.atol,
        controls.max_step,
        controls.first_step,
        controls.max_steps,
        obs=obs,
        store_states=False,
    )
    _check_stats(stats)
    return vals


def expectation_trajectory(traj: Trajectory, op: np.ndarray) -> np.ndarray:
    return traj.expect(op)


__all__ = [
    "StepControls",
    "DEFAULT_CONTROLS",
    "Trajectory",
    "evolve",
    "evolve_expectations",
    "expect",
]
