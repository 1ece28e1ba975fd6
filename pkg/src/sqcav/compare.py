"""Cross-validation of model tiers: evolve two tiers from matched initial
conditions and track the trace distance on their shared subspace."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import steady_state
from .errors import InvariantError
from .integrate import DEFAULT_CONTROLS, StepControls, evolve
from .liouvillian import Liouvillian
from .models import (
    SystemConfig,
    TIER_SPACES,
    build_cavity,
    build_tier,
)
from .operators import (
    HilbertSpace,
    kron,
    partial_trace_cavity,
    project_atom_levels,
    trace_distance,
)
from .regime import balanced_config


def atom_bloch_state(rx: float = 0.0, ry: float = 1.0, rz: float = 0.0) -> np.ndarray:
    """Two-level state with the given Bloch vector (must have norm <= 1)."""
    r = np.array([rx, ry, rz], dtype=float)
    if np.linalg.norm(r) > 1 + 1e-12:
        raise InvariantError("Bloch vector norm must not exceed 1")
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[-1, 0], [0, 1]], dtype=complex)
    return 0.5 * (np.eye(2, dtype=complex) + rx * sx + ry * sy + rz * sz)


def _embed_atom(rho_atom2: np.ndarray, atom_dim: int) -> np.ndarray:
    if atom_dim == 2:
        return rho_atom2
    out = np.zeros((atom_dim, atom_dim), dtype=complex)
    out[:2, :2] = rho_atom2
    return out


def initial_state_for(liou: Liouvillian, cfg: SystemConfig, rho_atom2: np.ndarray) -> np.ndarray:
    """Matched initial condition: the atomic state on the ground pair, with
    the cavity (when present) already in its squeezed-bath steady state so
    the comparison is not polluted by the fast kappa transient."""
    space = liou.space
    if space.fock_dim == 1:
        return _embed_atom(rho_atom2, space.atom_dim)
    rho_cav = steady_state(build_cavity(cfg)).rho
    return kron(_embed_atom(rho_atom2, space.atom_dim), rho_cav)


def reduce_to_common(rho: np.ndarray, space: HilbertSpace, keep_cavity: bool) -> np.ndarray:
    """Project to the two ground atomic levels; optionally trace out the mode.

    Projection is a raw block extraction (no renormalization): excited-state
    population honestly shows up as trace deficit in the distance.
    """
    out = rho
    sp = space
    if sp.atom_dim > 2:
        out = project_atom_levels(out, sp, keep=(0, 1))
        sp = HilbertSpace(2, sp.fock_dim)
    if sp.fock_dim > 1 and not keep_cavity:
        out = partial_trace_cavity(out, sp)
    return out


@dataclass
class TierComparison:
    ts: np.ndarray
    distances: np.ndarray
    tier_a: str
    tier_b: str
    max_distance: float


def compare_tiers(
    cfg: SystemConfig,
    tier_a: str,
    tier_b: str,
    t_final: float,
    samples: int = 41,
    controls: StepControls = DEFAULT_CONTROLS,
    atom_bloch: tuple[float, float, float] = (0.0, 1.0, 0.0),
    rebalance_reduced: bool = False,
    gamma_t0: float | None = None,
) -> TierComparison:
    """Trace-distance time series between two tiers of the same model.

    Both tiers start from the same atomic state (tensored with the cavity
    steady state where a mode is retained) and are sampled at matched times.
    With rebalance_reduced the fully reduced tier is built from a copy of the
    configuration whose auxiliary drive is re-solved, which lets deliberately
    unbalanced configurations be compared against the balanced reduction.
    """
    for tier in (tier_a, tier_b):
        if tier not in TIER_SPACES:
            raise InvariantError(f"unknown tier {tier!r}")
    keep_cavity = TIER_SPACES[tier_a][1] and TIER_SPACES[tier_b][1]
    rho_a2 = atom_bloch_state(*atom_bloch)
    ts = np.linspace(0.0, t_final, samples)

    reduced = {"T3R", "T4R"}
    results = []
    for tier in (tier_a, tier_b):
        c = cfg
        if rebalance_reduced and tier in reduced:
            c = balanced_config(cfg)
        liou = build_tier(tier, c, gamma_t0=gamma_t0)
        rho0 = initial_state_for(liou, c, rho_a2)
        traj = evolve(liou, rho0, t_final, controls=controls, t_eval=ts)
        results.append((liou.space, traj))

    dists = np.empty(samples)
    for k in range(samples):
        red_a = reduce_to_common(results[0][1].states[k], results[0][0], keep_cavity)
        red_b = reduce_to_common(results[1][1].states[k], results[1][0], keep_cavity)
        dists[k] = trace_distance(red_a, red_b)
    return TierComparison(
        ts=ts,
        distances=dists,
        tier_a=tier_a,
        tier_b=tier_b,
        max_distance=float(dists.max()),
    )
