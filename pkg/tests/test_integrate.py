import math

import numpy as np
import pytest

from sqcav import (
    IntegrationError,
    InvariantError,
    Liouvillian,
    PositivityError,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    SqueezingParams,
    StepControls,
    apply_liouvillian,
    build_T0,
    build_T3R,
    build_T4R,
    build_cavity,
    evolve,
    evolve_expectations,
    expect,
    fit_decay,
    pure_state_density,
    reference_config,
    steady_state,
    trace_distance,
)
from sqcav.compare import atom_bloch_state
from sqcav.kernel import run_rk45
from sqcav.models import SystemConfig

from conftest import alpha_zero_t3_config


def test_rabi_flop_exact_rotation():
    liou = Liouvillian(0.5 * SIGMA_X.astype(complex))
    rho0 = pure_state_density([1, 0])
    traj = evolve(liou, rho0, math.pi, t_eval=np.array([0.0, math.pi]))
    assert trace_distance(traj.final, pure_state_density([0, 1])) < 1e-8


def test_t0_relaxation_fixed_point():
    sq = SqueezingParams.ideal(0.5)
    liou = build_T0(1.0, sq)
    rho0 = np.diag([0.0, 1.0]).astype(complex)
    traj = evolve(liou, rho0, 30.0)
    sz = traj.expect(SIGMA_Z).real
    assert sz[-1] == pytest.approx(-1.0 / (2 * 0.5 + 1), abs=1e-7)


def test_t3r_sigma_y_single_exponential():
    cfg = alpha_zero_t3_config()
    liou = build_T3R(cfg)
    rate_expected = (cfg.beta_r**2 / cfg.cavity.kappa) * (
        2 * cfg.squeezing.n + 1 - 2 * abs(cfg.squeezing.m)
        + (cfg.squeezing.n * (cfg.squeezing.n + 1) + abs(cfg.squeezing.m) ** 2)
        / (2 * cfg.squeezing.n)
    )
    t_final = 5.0 / rate_expected
    t_eval = np.linspace(0, t_final, 200)
    traj = evolve(liou, atom_bloch_state(0, 1, 0), t_final, t_eval=t_eval)
    fit = fit_decay(t_eval, traj.expect(SIGMA_Y).real, "pure_exp")
    assert abs(fit.rate / rate_expected - 1) < 0.01
    assert fit.residual < 1e-6  # exactly exponential up to integrator error


def test_evolve_rejects_bad_inputs():
    liou = build_T0(1.0, SqueezingParams(n=0.0, m=0.0))
    with pytest.raises(InvariantError):
        evolve(liou, np.eye(2, dtype=complex), 1.0)  # trace 2
    with pytest.raises(InvariantError):
        evolve(liou, pure_state_density([1, 0]), -1.0)
    with pytest.raises(InvariantError):
        evolve(liou, pure_state_density([1, 0]), 1.0, t_eval=np.array([0.5, 0.2]))


def test_validation_catches_positivity_violation():
    # anomalous channels without their normal partners form a legitimate
    # (Hermiticity- and trace-preserving) generator that is not completely
    # positive; evolve must refuse the states it produces
    from sqcav import DissipatorChannel, annihilation

    a = annihilation(4)
    ad = a.conj().T
    liou = Liouvillian(
        np.zeros((5, 5), dtype=complex),
        (DissipatorChannel(0.5, ad, ad), DissipatorChannel(0.5, a, a)),
    )
    rho0 = pure_state_density([1, 0, 0, 0, 0])
    with pytest.raises(PositivityError):
        evolve(liou, rho0, 2.0, controls=StepControls(positivity_tol=1e-6))


def test_max_steps_budget_raises():
    liou = build_T0(1.0, SqueezingParams.ideal(0.5))
    with pytest.raises(IntegrationError):
        evolve(
            liou,
            pure_state_density([1, 0]),
            50.0,
            controls=StepControls(max_steps=10),
        )


def test_t_eval_prefix_times_recorded():
    liou = build_T0(1.0, SqueezingParams(n=0.0, m=0.0))
    t_eval = np.array([0.0, 0.1, 0.5, 2.0])
    traj = evolve(liou, np.diag([0.0, 1.0]).astype(complex), 2.0, t_eval=t_eval)
    assert np.array_equal(traj.ts, t_eval)
    pops = traj.states[:, 1, 1].real
    assert np.allclose(pops, np.exp(-t_eval), rtol=1e-7)


@pytest.mark.parametrize("tier", ["T0", "T3R", "T4R", "cavity"])
def test_evolve_matches_steady_state(tier):
    # long-time propagation endpoint vs the null-space solution
    if tier == "T0":
        liou = build_T0(1.0, SqueezingParams.ideal(0.5))
        rho0 = pure_state_density([1, 0])
        t_final = 40.0
    elif tier == "T3R":
        cfg = alpha_zero_t3_config()
        liou = build_T3R(cfg)
        rho0 = atom_bloch_state(0.4, 0.4, 0.4)
        t_final = 40.0 / (cfg.beta_r**2 / cfg.cavity.kappa)
    elif tier == "T4R":
        cfg = reference_config()
        liou = build_T4R(cfg)
        rho0 = atom_bloch_state(0.4, 0.4, 0.4)
        from sqcav import bloch_rates

        rates = bloch_rates("T4R", cfg)
        t_final = 18.0 / min(rates.gamma_x, rates.gamma_y, rates.gamma_z)
    else:
        cfg = SystemConfig.from_mhz(
            n=0.3, m=math.sqrt(0.3 * 1.3), omega_r_mhz=1.0, delta_r_mhz=1.0, n_max=12
        )
        liou = build_cavity(cfg)
        rho0 = pure_state_density([1] + [0] * 12)
        t_final = 10.0 / cfg.cavity.kappa * 8
    ss = steady_state(liou).rho
    traj = evolve(liou, rho0, t_final, t_eval=np.array([0.0, t_final]))
    assert trace_distance(traj.final, ss) < 1e-7


def test_backend_equivalence_static_and_phased(rng):
    configs = [
        build_T0(1.0, SqueezingParams.ideal(0.5)),
        build_T3R(reference_config(n_max=4, balanced=False)),  # phased channels
        Liouvillian(
            0.5 * SIGMA_Z.astype(complex),
            ham_phases=((0.3 * np.array([[0, 1], [0, 0]], dtype=complex), 2.5),),
        ),
    ]
    t_eval = np.linspace(0.0, 3.0, 7)
    for liou in configs:
        rho0 = atom_bloch_state(0.3, 0.5, -0.2)
        out_c, st_c = run_rk45(
            liou.folded(), rho0, 0.0, t_eval, 1e-9, 1e-11, np.inf, None, 10**7,
            force_backend="compiled",
        )
        out_p, st_p = run_rk45(
            liou.folded(), rho0, 0.0, t_eval, 1e-9, 1e-11, np.inf, None, 10**7,
            force_backend="python",
        )
        assert st_c["n_steps"] == st_p["n_steps"]
        assert np.max(np.abs(out_c - out_p)) < 1e-12


def test_expectation_mode_matches_state_mode():
    cfg = alpha_zero_t3_config(n_max=6)
    from sqcav import build_T3E

    liou = build_T3E(cfg)
    from sqcav.compare import initial_state_for

    rho0 = initial_state_for(liou, cfg, atom_bloch_state(0, 1, 0))
    t_eval = np.linspace(0, 2.0, 9)
    sz_full = np.kron(SIGMA_Z, np.eye(cfg.trunc.dim))
    traj = evolve(liou, rho0, 2.0, t_eval=t_eval)
    vals = evolve_expectations(liou, rho0, t_eval, [sz_full])
    assert np.allclose(traj.expect(sz_full), vals[:, 0], atol=1e-9)
