import math

import numpy as np
import pytest

from sqcav import (
    InvariantError,
    RegimeError,
    SIGMA_M,
    SIGMA_P,
    SIGMA_Y,
    SIGMA_Z,
    SqueezingParams,
    StepControls,
    annihilation,
    apply_liouvillian,
    balanced_config,
    build_T0,
    build_T3E,
    build_T3F,
    build_T3R,
    build_T4F,
    build_T4I,
    build_T4R,
    build_cavity,
    build_tier,
    evolve,
    expect,
    fit_decay,
    identity,
    kron,
    partial_trace_cavity,
    reference_config,
    steady_state,
)
from sqcav.compare import atom_bloch_state, initial_state_for
from sqcav.models import SystemConfig, AtomDecay, AuxDrive, CavityParams, RamanDrive

from conftest import alpha_zero_t3_config, rand_hermitian

TWO_PI = 2 * math.pi


def test_config_invariants():
    with pytest.raises(InvariantError):
        CavityParams(kappa=-1.0, g=1.0)
    with pytest.raises(InvariantError):
        RamanDrive(omega=1.0, delta=0.0)
    with pytest.raises(InvariantError):
        AuxDrive(omega=1.0, delta=0.0)
    with pytest.raises(InvariantError):
        AtomDecay(b0=1.0, b1=1.0)


def test_unit_conversion_once():
    cfg = SystemConfig.from_mhz(kappa_mhz=4.2, g_mhz=24.0, omega_r_mhz=240.0, delta_r_mhz=4800.0)
    assert cfg.cavity.kappa == pytest.approx(TWO_PI * 4.2)
    assert cfg.beta_r == pytest.approx(TWO_PI * 0.6)
    assert cfg.eta_r == pytest.approx(TWO_PI * 0.12)


def test_t0_unsqueezed_is_plain_decay(rng):
    liou = build_T0(1.3, SqueezingParams(n=0.0, m=0.0))
    assert len(liou.channels) == 1
    rho = rand_hermitian(2, rng)
    drho = apply_liouvillian(liou, rho)
    # pure spontaneous decay at rate gamma
    gamma = 1.3
    sm, sp = SIGMA_M, SIGMA_P
    ref = gamma / 2 * (2 * sm @ rho @ sp - sp @ sm @ rho - rho @ sp @ sm)
    assert np.allclose(drho, ref, atol=1e-14)


def test_t0_fitted_quadrature_rates():
    sq = SqueezingParams.ideal(0.5)
    liou = build_T0(1.0, sq)
    t_eval = np.linspace(0.0, 30.0, 400)
    traj_y = evolve(liou, atom_bloch_state(0, 1, 0), 30.0, t_eval=t_eval)
    fit_y = fit_decay(t_eval, traj_y.expect(SIGMA_Y).real, "pure_exp")
    assert fit_y.rate == pytest.approx(0.1339746, rel=1e-4)
    t_eval_x = np.linspace(0.0, 3.0, 400)
    traj_x = evolve(liou, atom_bloch_state(1, 0, 0), 3.0, t_eval=t_eval_x)
    from sqcav import SIGMA_X

    fit_x = fit_decay(t_eval_x, traj_x.expect(SIGMA_X).real, "pure_exp")
    assert fit_x.rate == pytest.approx(1.8660254, rel=1e-4)


def test_t3f_decoupled_cavity_reaches_bath_state():
    # g = 0 and Omega_r = 0: atom and cavity decouple (the joint steady
    # state is degenerate in the atom, so evolve instead of null-solving);
    # the cavity thermalizes to <n> = N while atomic populations persist
    cfg = SystemConfig.from_mhz(
        n=0.4, m=0.0, g_mhz=0.0, omega_r_mhz=0.0, delta_r_mhz=4800.0, n_max=12
    )
    liou = build_T3F(cfg)
    nf = cfg.trunc.dim
    atom = np.diag([0.25, 0.75, 0.0]).astype(complex)
    vac = np.zeros((nf, nf), dtype=complex)
    vac[0, 0] = 1.0
    rho0 = kron(atom, vac)
    t_final = 12.0 / cfg.cavity.kappa
    traj = evolve(liou, rho0, t_final, t_eval=np.array([0.0, t_final]))
    nop = kron(identity(3), annihilation(12).conj().T @ annihilation(12))
    assert expect(nop, traj.final).real == pytest.approx(0.4, abs=1e-5)
    pop1 = kron(np.diag([0, 1.0, 0]).astype(complex), identity(nf))
    assert expect(pop1, traj.final).real == pytest.approx(0.75, abs=1e-8)


def test_t3f_excited_population_perturbative_bound():
    # vacuum bath: steady state is dark, excited population far below the
    # (Omega_r/2Delta_r)^2 + (g/Delta_r)^2 perturbative bound
    cfg = SystemConfig.from_mhz(
        n=0.0, m=0.0, omega_r_mhz=240.0, delta_r_mhz=4800.0, g_mhz=24.0, n_max=4
    )
    liou = build_T3F(cfg)
    res = steady_state(liou)
    nf = cfg.trunc.dim
    proj_r = kron(np.diag([0, 0, 1.0]).astype(complex), identity(nf))
    bound = (240.0 / 9600.0) ** 2 + (24.0 / 4800.0) ** 2
    assert expect(proj_r, res.rho).real < bound


def test_t3e_figure_constants():
    cfg = reference_config()
    assert cfg.beta_r / TWO_PI == pytest.approx(0.6, abs=1e-12)
    assert cfg.eta_r / TWO_PI == pytest.approx(0.12, abs=1e-12)


def test_t3e_population_relaxation_matches_reduced_prediction():
    # vacuum bath, small level-shift imbalance: fitted <sz> rate within 5%
    # of the reduced-tier population decay 2 beta^2/kappa
    cfg = SystemConfig.from_mhz(
        n=0.0, m=0.0, g_mhz=24.0, omega_r_mhz=100.0, delta_r_mhz=6000.0, n_max=4
    )
    liou = build_T3E(cfg)
    rho0 = initial_state_for(liou, cfg, atom_bloch_state(0, 0, 1))
    rate_ref = 2 * cfg.beta_r**2 / cfg.cavity.kappa
    t_final = 5.0 / rate_ref
    t_eval = np.linspace(0, t_final, 300)
    traj = evolve(liou, rho0, t_final, t_eval=t_eval)
    sz = kron(SIGMA_Z, identity(cfg.trunc.dim))
    fit = fit_decay(t_eval, traj.expect(sz).real, "offset_exp")
    assert abs(fit.rate / rate_ref - 1) < 0.05


def test_t3r_simplified_constant():
    from sqcav import derived_params

    cfg = alpha_zero_t3_config()
    dp = derived_params(cfg, "T3")
    assert dp.p_const == pytest.approx(1.5, abs=1e-12)


def test_t3r_quadrature_rate_fit():
    cfg = alpha_zero_t3_config()
    liou = build_T3R(cfg)
    rate_unit = cfg.beta_r**2 / cfg.cavity.kappa
    expected = rate_unit * (2 * 0.5 + 1 - 2 * math.sqrt(0.75) + 1.5)
    assert expected / rate_unit == pytest.approx(1.7679492, abs=1e-6)
    t_final = 5.0 / expected
    t_eval = np.linspace(0, t_final, 200)
    traj = evolve(liou, atom_bloch_state(0, 1, 0), t_final, t_eval=t_eval)
    fit = fit_decay(t_eval, traj.expect(SIGMA_Y).real, "pure_exp")
    assert abs(fit.rate / expected - 1) < 0.01


def test_t3r_unsqueezed_symmetry():
    # M = 0 removes the anomalous channels; both quadratures decay equally
    cfg = SystemConfig.from_mhz(
        n=0.5, m=0.0, g_mhz=24.0, omega_r_mhz=2 * 24.0 * math.sqrt(0.5), delta_r_mhz=1357.6
    )
    liou = build_T3R(cfg)
    assert len(liou.channels) == 3  # two normal + dephasing, no anomalous
    t_eval = np.linspace(0, 30, 220)
    from sqcav import SIGMA_X

    fx = fit_decay(
        t_eval, evolve(liou, atom_bloch_state(1, 0, 0), 30, t_eval=t_eval).expect(SIGMA_X).real,
        "pure_exp",
    )
    fy = fit_decay(
        t_eval, evolve(liou, atom_bloch_state(0, 1, 0), 30, t_eval=t_eval).expect(SIGMA_Y).real,
        "pure_exp",
    )
    assert fx.rate == pytest.approx(fy.rate, rel=1e-6)


def test_t4f_inert_level_reduces_to_t3f(rng):
    # Omega_s = 0: the generator acts exactly like the three-level one on
    # states supported off |s>
    cfg = reference_config(n_max=3, balanced=False)
    l4 = build_T4F(cfg)
    l3 = build_T3F(cfg, include_spontaneous=True)
    nf = cfg.trunc.dim
    rho3 = rand_hermitian(3 * nf, rng)
    rho4 = np.zeros((4 * nf, 4 * nf), dtype=complex)
    r3 = rho3.reshape(3, nf, 3, nf)
    r4 = rho4.reshape(4, nf, 4, nf)
    r4[:3, :, :3, :] = r3
    d4 = apply_liouvillian(l4, rho4).reshape(4, nf, 4, nf)
    d3 = apply_liouvillian(l3, rho3).reshape(3, nf, 3, nf)
    assert np.allclose(d4[:3, :, :3, :], d3, atol=1e-12)
    assert np.max(np.abs(d4[3, :, :, :])) < 1e-14


def test_t4f_requires_raman_resonance():
    cfg = reference_config()
    cfg = SystemConfig(
        squeezing=cfg.squeezing,
        cavity=CavityParams(kappa=cfg.cavity.kappa, g=cfg.cavity.g, delta=1.0),
        raman=cfg.raman,
        aux=cfg.aux,
        decay=cfg.decay,
        trunc=cfg.trunc,
    )
    with pytest.raises(RegimeError):
        build_T4F(cfg)


def test_t4f_steady_excited_populations():
    cfg = reference_config(n_max=6)
    liou = build_T4F(cfg)
    res = steady_state(liou, controls=StepControls(rtol=1e-8, atol=1e-10))
    nf = cfg.trunc.dim
    r4 = res.rho.reshape(4, nf, 4, nf)
    pops = np.einsum("injn->ij", r4).real
    assert pops[2, 2] < 1e-3 and pops[3, 3] < 1e-3


def test_t4i_without_decay_matches_t3e_plus_aux_shift(rng):
    cfg = reference_config(n_max=4)
    cfg_nodecay = SystemConfig(
        squeezing=cfg.squeezing,
        cavity=cfg.cavity,
        raman=cfg.raman,
        aux=cfg.aux,
        decay=AtomDecay(gamma_r=0.0),
        trunc=cfg.trunc,
    )
    l4 = build_T4I(cfg_nodecay)
    l3 = build_T3E(cfg_nodecay)
    nf = cfg.trunc.dim
    aux_shift = cfg.aux.omega**2 / (4 * cfg.aux.delta)
    proj0 = SIGMA_M @ SIGMA_P
    # the photon-number shift g^2 N/Delta_r cancels against the -N offset of
    # the fluctuation operator, leaving exactly the auxiliary Stark term
    h_expected = l3.hamiltonian + aux_shift * kron(proj0, identity(nf))
    assert np.allclose(l4.hamiltonian, h_expected, atol=1e-10)
    assert len(l4.channels) == len(l3.channels)


def test_t4i_spontaneous_rate_value():
    cfg = reference_config(n_max=3)
    liou = build_T4I(cfg)
    # the sigma- channel weight is b0^2 gamma_r Omega_r^2 / (8 Delta_r^2)
    w = [ch.weight for ch in liou.channels if np.array_equal(ch.left[: 2, : 2], SIGMA_M[:2, :2])]
    expected = 0.5 * (TWO_PI * 5.2) * 240.0**2 / (8 * 4800.0**2)
    sm_full = kron(SIGMA_M, identity(cfg.trunc.dim))
    weights = [ch.weight for ch in liou.channels if np.array_equal(ch.left, sm_full)]
    assert len(weights) == 1
    assert weights[0].real / TWO_PI == pytest.approx(8.125e-4, rel=1e-9)


def test_t4i_warns_when_cavity_excitation_competes():
    cfg = SystemConfig.from_mhz(
        n=0.5, m=0.0, g_mhz=24.0, omega_r_mhz=40.0, delta_r_mhz=4800.0, n_max=2
    )
    with pytest.warns(UserWarning):
        build_T4I(cfg)


def test_t4r_requires_balance():
    cfg = reference_config(balanced=False)
    with pytest.raises(RegimeError):
        build_T4R(cfg)


def test_t4r_closed_form_constants():
    from sqcav import derived_params

    cfg = reference_config()
    dp = derived_params(cfg, "T4")
    assert dp.big_c == pytest.approx(26.3736264, abs=1e-6)
    assert dp.p_const == pytest.approx(0.0394791667, abs=1e-9)
    assert dp.d_const == pytest.approx(0.0489583333, abs=1e-9)


def test_t4r_steady_inversion():
    cfg = reference_config()
    liou = build_T4R(cfg)
    res = steady_state(liou)
    assert expect(SIGMA_Z, res.rho).real == pytest.approx(-0.5023586, abs=1e-6)


def test_gamma_difference_identity():
    from sqcav import bloch_rates

    cfg = reference_config()
    rates = bloch_rates("T4R", cfg)
    lhs = rates.gamma_y - rates.gamma_x
    rhs = -4 * cfg.beta_r**2 * abs(cfg.squeezing.m) / cfg.cavity.kappa
    assert abs(lhs / rhs - 1) < 1e-12


def test_phase_covariance_of_populations():
    # shifting the drive phase while rotating the bath correlation leaves
    # every population trajectory unchanged
    base = alpha_zero_t3_config(n_max=5)
    theta = 0.7
    shifted = SystemConfig(
        squeezing=SqueezingParams(n=base.squeezing.n, m=base.squeezing.m * np.exp(2j * theta)),
        cavity=base.cavity,
        raman=RamanDrive(omega=base.raman.omega, delta=base.raman.delta, phi=base.raman.phi + theta),
        aux=base.aux,
        decay=base.decay,
        trunc=base.trunc,
    )
    t_eval = np.linspace(0, 8.0, 40)
    nf = base.trunc.dim
    sz = kron(SIGMA_Z, identity(nf))
    vals = []
    for cfg in (base, shifted):
        liou = build_T3E(cfg)
        rho0 = initial_state_for(liou, cfg, atom_bloch_state(0, 0, 1))
        traj = evolve(liou, rho0, 8.0, t_eval=t_eval)
        vals.append(traj.expect(sz).real)
    assert np.max(np.abs(vals[0] - vals[1])) < 1e-8


def test_build_tier_dispatch():
    cfg = reference_config(n_max=2)
    for tier in ("T0", "T3F", "T3E", "T3R", "T4F", "T4I", "T4R"):
        liou = build_tier(tier, cfg, gamma_t0=1.0)
        assert liou.dim >= 2
    with pytest.raises(InvariantError):
        build_tier("T9", cfg)
