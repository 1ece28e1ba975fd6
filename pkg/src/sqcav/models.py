"""Builders for every model tier, from one parameter set.

Tiers
-----
T0   free two-level atom in a broadband squeezed vacuum (2-dim)
T3F  three-level Lambda atom + cavity, laser rotating frame (3 x Fock)
T3E  excited state eliminated: two ground levels + cavity (2 x Fock)
T3R  cavity also eliminated: reduced two-level generator (2-dim),
     with exact complex weights and e^{+-2 i alpha t} phases off balance
T4F  four-level scheme with auxiliary dressing laser (4 x Fock)
T4I  both excited states eliminated (2 x Fock), spontaneous terms kept
T4R  fully reduced four-level generator (2-dim), requires alpha = 0

All frequencies are angular (rad/us); `SystemConfig.from_mhz` converts
from the frequency/(2 pi) MHz convention used in run configurations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvariantError, RegimeError
from .liouvillian import DissipatorChannel, Liouvillian
from .operators import (
    FockTruncation,
    HilbertSpace,
    SIGMA_M,
    SIGMA_P,
    annihilation,
    identity,
    kron,
    level_proj,
    number_op,
)

TWO_PI = 2.0 * math.pi
_INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class SqueezingParams:
    """Broadband squeezed-bath photon number N and correlation M."""

    n: float
    m: complex = 0.0

    def __post_init__(self):
        if self.n < 0:
            raise InvariantError(f"squeezing photon number must be >= 0, got {self.n}")
        bound = math.sqrt(self.n * (self.n + 1.0))
        if abs(self.m) > bound + 1e-12:
            raise InvariantError(
                f"|M| = {abs(self.m):.12g} exceeds sqrt(N(N+1)) = {bound:.12g}"
            )
        object.__setattr__(self, "m", complex(self.m))

    @property
    def is_ideal(self) -> bool:
        return abs(abs(self.m) - math.sqrt(self.n * (self.n + 1.0))) <= 1e-9

    @classmethod
    def ideal(cls, n: float) -> "SqueezingParams":
        return cls(n=n, m=math.sqrt(n * (n + 1.0)))


@dataclass(frozen=True)
class CavityParams:
    kappa: float
    g: float
    delta: float = 0.0

    def __post_init__(self):
        if self.kappa <= 0:
            raise InvariantError("cavity decay rate kappa must be positive")


@dataclass(frozen=True)
class RamanDrive:
    omega: float
    delta: float
    phi: float = 0.0

    def __post_init__(self):
        if self.delta == 0:
            raise InvariantError("Raman laser detuning must be nonzero")


@dataclass(frozen=True)
class AuxDrive:
    omega: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        if self.omega != 0.0 and self.delta == 0.0:
            raise InvariantError("auxiliary drive needs a nonzero detuning")


@dataclass(frozen=True)
class AtomDecay:
    gamma_r: float = 0.0
    gamma_s: float = 0.0
    b0: float = _INV_SQRT2
    b1: float = _INV_SQRT2

    def __post_init__(self):
        if self.gamma_r < 0 or self.gamma_s < 0:
            raise InvariantError("spontaneous rates must be >= 0")
        if abs(self.b0**2 + self.b1**2 - 1.0) > 1e-12:
            raise InvariantError("branching amplitudes must satisfy b0^2 + b1^2 = 1")


@dataclass(frozen=True)
class SystemConfig:
    """All physical parameters of one model instance (angular units)."""

    squeezing: SqueezingParams
    cavity: CavityParams
    raman: RamanDrive
    aux: AuxDrive = AuxDrive()
    decay: AtomDecay = AtomDecay()
    trunc: FockTruncation = FockTruncation()

    @classmethod
    def from_mhz(
        cls,
        n: float = 0.0,
        m: complex = 0.0,
        kappa_mhz: float = 4.2,
        g_mhz: float = 24.0,
        delta_mhz: float = 0.0,
        omega_r_mhz: float = 0.0,
        delta_r_mhz: float = 1.0,
        phi: float = 0.0,
        omega_s_mhz: float = 0.0,
        delta_s_mhz: float = 0.0,
        gamma_r_mhz: float = 0.0,
        gamma_s_mhz: float = 0.0,
        b0: float = _INV_SQRT2,
        b1: float = _INV_SQRT2,
        n_max: int = 15,
    ) -> "SystemConfig":
        """Build from frequency/(2 pi) values in MHz; times are then in us.

        Conversion to angular units happens exactly once, here.
        """
        return cls(
            squeezing=SqueezingParams(n=n, m=m),
            cavity=CavityParams(
                kappa=TWO_PI * kappa_mhz, g=TWO_PI * g_mhz, delta=TWO_PI * delta_mhz
            ),
            raman=RamanDrive(omega=TWO_PI * omega_r_mhz, delta=TWO_PI * delta_r_mhz, phi=phi),
            aux=AuxDrive(omega=TWO_PI * omega_s_mhz, delta=TWO_PI * delta_s_mhz),
            decay=AtomDecay(
                gamma_r=TWO_PI * gamma_r_mhz, gamma_s=TWO_PI * gamma_s_mhz, b0=b0, b1=b1
            ),
            trunc=FockTruncation(n_max=n_max),
        )

    def with_aux(self, omega: float, delta: float) -> "SystemConfig":
        return replace(self, aux=AuxDrive(omega=omega, delta=delta))

    @property
    def beta_r(self) -> float:
        return self.cavity.g * self.raman.omega / (2.0 * self.raman.delta)

    @property
    def eta_r(self) -> float:
        return self.cavity.g**2 / self.raman.delta


def reference_config(
    n: float = 0.5,
    ideal: bool = True,
    m: complex | None = None,
    balanced: bool = True,
    n_max: int = 15,
    gamma_r_mhz: float = 5.2,
) -> SystemConfig:
    """Single-atom trapping-experiment parameter set used throughout:
    g/(2pi)=24 MHz, kappa/(2pi)=4.2 MHz, gamma_r/(2pi)=5.2 MHz, with
    g/Omega_r=0.1 and Omega_r/Delta_r=0.05 (so beta_r/(2pi)=0.6 MHz and
    eta_r/(2pi)=0.12 MHz), branching b0=b1=1/sqrt(2).  With balanced=True
    the auxiliary drive is solved so the ground-state level shifts cancel.
    """
    if m is None:
        m = math.sqrt(n * (n + 1.0)) if ideal else 0.0
    cfg = SystemConfig.from_mhz(
        n=n,
        m=m,
        kappa_mhz=4.2,
        g_mhz=24.0,
        omega_r_mhz=240.0,
        delta_r_mhz=4800.0,
        gamma_r_mhz=gamma_r_mhz,
        n_max=n_max,
    )
    if balanced:
        from .regime import solve_aux_drive  # late import; regime has no models dep

        delta_s = math.copysign(cfg.raman.delta, _shift_imbalance(cfg))
        omega_s = solve_aux_drive(cfg, delta_s)
        cfg = cfg.with_aux(omega=omega_s, delta=delta_s)
    return cfg


def _shift_imbalance(cfg: SystemConfig) -> float:
    # three-level level-shift difference, before any auxiliary compensation
    return cfg.raman.omega**2 / (4.0 * cfg.raman.delta) - cfg.cavity.g**2 * cfg.squeezing.n / cfg.raman.delta


def _cavity_channels(cfg: SystemConfig, atom_dim: int, static_phase: bool = True):
    """Squeezed-reservoir damping of the cavity mode, embedded with the atom.

    In the frames used here the squeezing carrier coincides with the frame
    rotation, so all four channels are static except in the reduced-tier
    derivation where explicit phases reappear (handled in build_T3R).
    """
    kappa = cfg.cavity.kappa
    nn = cfg.squeezing.n
    mm = cfg.squeezing.m
    eye_a = identity(atom_dim)
    a = kron(eye_a, annihilation(cfg.trunc))
    ad = kron(eye_a, annihilation(cfg.trunc).conj().T)
    chans = [DissipatorChannel(kappa * (1.0 + nn), a, ad)]
    if nn != 0:
        chans.append(DissipatorChannel(kappa * nn, ad, a))
    if mm != 0:
        chans.append(DissipatorChannel(kappa * mm, ad, ad))
        chans.append(DissipatorChannel(kappa * np.conj(mm), a, a))
    return chans


def build_T0(gamma: float, sq: SqueezingParams) -> Liouvillian:
    """Two-level atom damped exclusively by a broadband squeezed vacuum.

    Channels: (gamma/2)(N+1) on sigma-, (gamma/2)N on sigma+, and the
    anomalous pair with weights -gamma M / 2 on (sigma+, sigma+) plus the
    conjugate; their Lindblad completions vanish identically because
    (sigma+)^2 = 0, leaving exactly -gamma M sigma+ rho sigma+ + c.c.
    """
    if gamma <= 0:
        raise InvariantError("gamma must be positive")
    chans = [DissipatorChannel(0.5 * gamma * (sq.n + 1.0), SIGMA_M, SIGMA_P)]
    if sq.n != 0:
        chans.append(DissipatorChannel(0.5 * gamma * sq.n, SIGMA_P, SIGMA_M))
    if sq.m != 0:
        chans.append(DissipatorChannel(-0.5 * gamma * sq.m, SIGMA_P, SIGMA_P))
        chans.append(DissipatorChannel(-0.5 * gamma * np.conj(sq.m), SIGMA_M, SIGMA_M))
    h = np.zeros((2, 2), dtype=complex)
    return Liouvillian(h, tuple(chans), space=HilbertSpace(2, 1))


def build_cavity(cfg: SystemConfig) -> Liouvillian:
    """Empty squeezed-driven cavity in the laser rotating frame."""
    nf = cfg.trunc.dim
    h = -cfg.cavity.delta * number_op(cfg.trunc)
    chans = _cavity_channels(cfg, atom_dim=1)
    return Liouvillian(h, tuple(chans), space=HilbertSpace(1, nf))


def build_T3F(cfg: SystemConfig, include_spontaneous: bool = False) -> Liouvillian:
    """Full three-level Lambda atom in the cavity, laser rotating frame.

    Atomic basis order (|0>, |1>, |r>); the frame rotates at the Raman
    laser frequency for both atom and cavity, which renders the squeezed
    reservoir channels static and leaves the Hamiltonian
    -Delta_r |r><r| - delta a^dag a + (Omega_r/2)(e^{-i phi}|r><1| + h.c.)
    + g(|r><0| a + h.c.).  Spontaneous emission is off by default here and
    treated in the four-level tiers.
    """
    na, nf = 3, cfg.trunc.dim
    eye_f = identity(nf)
    a = annihilation(cfg.trunc)
    h = -cfg.raman.delta * kron(level_proj(2, 2, na), eye_f)
    h += -cfg.cavity.delta * kron(identity(na), number_op(cfg.trunc))
    drive = 0.5 * cfg.raman.omega * np.exp(-1j * cfg.raman.phi) * level_proj(2, 1, na)
    h += kron(drive + drive.conj().T, eye_f)
    coupling = cfg.cavity.g * (kron(level_proj(2, 0, na), a))
    h += coupling + coupling.conj().T
    chans = _cavity_channels(cfg, atom_dim=na)
    if include_spontaneous and cfg.decay.gamma_r > 0:
        gr = cfg.decay.gamma_r
        c0 = kron(level_proj(0, 2, na), eye_f)
        c1 = kron(level_proj(1, 2, na), eye_f)
        chans.append(DissipatorChannel(0.5 * gr * cfg.decay.b0**2, c0, c0.conj().T))
        chans.append(DissipatorChannel(0.5 * gr * cfg.decay.b1**2, c1, c1.conj().T))
    return Liouvillian(h, tuple(chans), space=HilbertSpace(na, nf))


def build_T3E(cfg: SystemConfig) -> Liouvillian:
    """Effective two-level atom + cavity after eliminating |r>.

    H = (Omega_r^2/4 Delta_r) sigma+ sigma- - delta a^dag a
        + beta_r (e^{i phi} sigma+ a + h.c.) + eta_r sigma- sigma+ a^dag a
    with the squeezed cavity channels unchanged.
    """
    na, nf = 2, cfg.trunc.dim
    eye_f = identity(nf)
    a = annihilation(cfg.trunc)
    beta = cfg.beta_r
    eta = cfg.eta_r
    stark_1 = cfg.raman.omega**2 / (4.0 * cfg.raman.delta)
    h = stark_1 * kron(SIGMA_P @ SIGMA_M, eye_f)
    h += -cfg.cavity.delta * kron(identity(na), number_op(cfg.trunc))
    jc = beta * np.exp(1j * cfg.raman.phi) * kron(SIGMA_P, a)
    h += jc + jc.conj().T
    h += eta * kron(SIGMA_M @ SIGMA_P, number_op(cfg.trunc))
    chans = _cavity_channels(cfg, atom_dim=na)
    return Liouvillian(h, tuple(chans), space=HilbertSpace(na, nf))


def build_T3R(cfg: SystemConfig, alpha_override: float | None = None) -> Liouvillian:
    """Reduced master equation for the two atomic ground states alone.

    Carries the exact complex channel weights (N+1)/(kappa - i(alpha+delta))
    etc.; the imaginary parts of the normal weights are cavity-induced level
    shifts and enter the Hamiltonian, the real parts damp.  Off balance the
    anomalous channels oscillate at +-2 alpha.  When alpha = delta = 0 and M
    is real this reduces to the static form with dephasing weight
    (eta_r^2/2 kappa)(N(N+1) + |M|^2) on the |0><0| projector.
    """
    from .regime import alpha as alpha_of  # regime has no import back into models

    kappa = cfg.cavity.kappa
    delta = cfg.cavity.delta
    nn = cfg.squeezing.n
    mm = cfg.squeezing.m
    beta2 = cfg.beta_r**2
    eta = cfg.eta_r
    al = alpha_of(cfg, "T3") if alpha_override is None else float(alpha_override)
    if abs(al) < 1e-9 * kappa:
        al = 0.0  # rounding noise from an exactly balanced configuration

    w1 = beta2 * (nn + 1.0) / (kappa - 1j * (al + delta))
    w2 = beta2 * nn / (kappa + 1j * (al + delta))
    h = w1.imag * (SIGMA_P @ SIGMA_M) + w2.imag * (SIGMA_M @ SIGMA_P)
    chans = [
        DissipatorChannel(w1.real, SIGMA_M, SIGMA_P),
        DissipatorChannel(w2.real, SIGMA_P, SIGMA_M),
    ]
    if mm != 0:
        phase2 = np.exp(2j * cfg.raman.phi)
        w_up = -beta2 * kappa * mm * phase2 / ((kappa - 1j * delta) * (kappa + 1j * al - 1j * delta))
        w_dn = np.conj(w_up)
        freq = 2.0 * al
        chans.append(DissipatorChannel(w_up, SIGMA_P, SIGMA_P, phase_freq=freq))
        chans.append(DissipatorChannel(w_dn, SIGMA_M, SIGMA_M, phase_freq=-freq))
    w7 = (eta**2 / (2.0 * kappa)) * (
        nn * (nn + 1.0) + kappa**2 * abs(mm) ** 2 / (kappa**2 + delta**2)
    )
    if w7 != 0:
        proj0 = SIGMA_M @ SIGMA_P
        chans.append(DissipatorChannel(w7, proj0, proj0))
    return Liouvillian(h.astype(complex), tuple(chans), space=HilbertSpace(2, 1))


def build_T4F(cfg: SystemConfig) -> Liouvillian:
    """Full four-level scheme: adds level |s> dressed by the auxiliary laser.

    Requires Raman resonance (delta = 0).  Atomic basis (|0>, |1>, |r>, |s>).
    Spontaneous emission from |r> branches to |0> and |1> with amplitudes
    b0, b1; the |s> channel is retained for completeness even though it can
    be made negligible by increasing Delta_s at fixed Omega_s/Delta_s.
    """
    if cfg.cavity.delta != 0.0:
        raise RegimeError("the four-level tiers are defined on Raman resonance (delta = 0)")
    na, nf = 4, cfg.trunc.dim
    eye_f = identity(nf)
    a = annihilation(cfg.trunc)
    h = -cfg.raman.delta * kron(level_proj(2, 2, na), eye_f)
    drive = 0.5 * cfg.raman.omega * np.exp(-1j * cfg.raman.phi) * level_proj(2, 1, na)
    h += kron(drive + drive.conj().T, eye_f)
    coupling = cfg.cavity.g * kron(level_proj(2, 0, na), a)
    h += coupling + coupling.conj().T
    if cfg.aux.omega != 0.0:
        h += -cfg.aux.delta * kron(level_proj(3, 3, na), eye_f)
        aux = 0.5 * cfg.aux.omega * level_proj(3, 0, na)
        h += kron(aux + aux.conj().T, eye_f)
    chans = _cavity_channels(cfg, atom_dim=na)
    if cfg.decay.gamma_r > 0:
        gr = cfg.decay.gamma_r
        c0 = kron(level_proj(0, 2, na), eye_f)
        c1 = kron(level_proj(1, 2, na), eye_f)
        chans.append(DissipatorChannel(0.5 * gr * cfg.decay.b0**2, c0, c0.conj().T))
        chans.append(DissipatorChannel(0.5 * gr * cfg.decay.b1**2, c1, c1.conj().T))
    if cfg.decay.gamma_s > 0:
        cs = kron(level_proj(0, 3, na), eye_f)
        chans.append(DissipatorChannel(0.5 * cfg.decay.gamma_s, cs, cs.conj().T))
    return Liouvillian(h, tuple(chans), space=HilbertSpace(na, nf))


def build_T4I(cfg: SystemConfig) -> Liouvillian:
    """Two ground levels + cavity after eliminating both excited states.

    Keeps the laser-induced part of spontaneous emission (rates prop. to
    Omega_r^2/Delta_r^2), valid when g sqrt(N) << Omega_r; a warning is
    emitted when that separation is weaker than a factor 3.
    """
    if cfg.cavity.delta != 0.0:
        raise RegimeError("the four-level tiers are defined on Raman resonance (delta = 0)")
    g = cfg.cavity.g
    if g * math.sqrt(cfg.squeezing.n) > cfg.raman.omega / 3.0:
        warnings.warn(
            "g sqrt(N) exceeds Omega_r/3; the laser-dominated spontaneous "
            "emission approximation is marginal",
            stacklevel=2,
        )
    na, nf = 2, cfg.trunc.dim
    eye_f = identity(nf)
    a = annihilation(cfg.trunc)
    nop = number_op(cfg.trunc)
    proj0 = SIGMA_M @ SIGMA_P
    proj1 = SIGMA_P @ SIGMA_M
    stark_cav = g**2 * cfg.squeezing.n / cfg.raman.delta
    stark_las = cfg.raman.omega**2 / (4.0 * cfg.raman.delta)
    stark_aux = (
        cfg.aux.omega**2 / (4.0 * cfg.aux.delta) if cfg.aux.omega != 0.0 else 0.0
    )
    h = stark_cav * kron(proj0, eye_f)
    h += stark_las * kron(proj1, eye_f)
    if stark_aux:
        h += stark_aux * kron(proj0, eye_f)
    h += cfg.eta_r * kron(proj0, nop - cfg.squeezing.n * identity(nf))
    jc = cfg.beta_r * np.exp(1j * cfg.raman.phi) * kron(SIGMA_P, a)
    h += jc + jc.conj().T
    chans = _cavity_channels(cfg, atom_dim=na)
    if cfg.decay.gamma_r > 0:
        rate = 0.5 * cfg.decay.gamma_r * cfg.raman.omega**2 / (4.0 * cfg.raman.delta**2)
        sm = kron(SIGMA_M, eye_f)
        p1f = kron(proj1, eye_f)
        chans.append(DissipatorChannel(cfg.decay.b0**2 * rate, sm, sm.conj().T))
        chans.append(DissipatorChannel(cfg.decay.b1**2 * rate, p1f, p1f))
    return Liouvillian(h, tuple(chans), space=HilbertSpace(na, nf))


def build_T4R(cfg: SystemConfig) -> Liouvillian:
    """Fully reduced four-level generator; the level shifts must balance.

    d rho/dt = (beta^2/kappa) [ (N+1+b0^2/2C) D[sigma-] + N D[sigma+]
               - (M 2 sigma+ rho sigma+ + c.c.) + P dephasing on |1><1| ]
    with C = g^2/(kappa gamma_r) and
    P = (2 g^2/Omega_r^2)(N(N+1)+|M|^2) + b1^2/(2C).
    """
    from .regime import alpha as alpha_of, derived_params

    al = alpha_of(cfg, "T4")
    shift_scale = abs(cfg.raman.omega**2 / (4.0 * cfg.raman.delta))
    if abs(al) > 1e-6 * max(shift_scale, 1e-300):
        raise RegimeError(
            f"level shifts are unbalanced: alpha = {al:.6g} (shift scale {shift_scale:.6g}); "
            "solve the auxiliary drive first"
        )
    dp = derived_params(cfg, "T4")
    rate = cfg.beta_r**2 / cfg.cavity.kappa
    nn = cfg.squeezing.n
    m_eff = cfg.squeezing.m * np.exp(2j * cfg.raman.phi)
    corr0 = cfg.decay.b0**2 / (2.0 * dp.big_c) if math.isfinite(dp.big_c) else 0.0
    chans = [
        DissipatorChannel(rate * (nn + 1.0 + corr0), SIGMA_M, SIGMA_P),
        DissipatorChannel(rate * nn, SIGMA_P, SIGMA_M),
    ]
    if m_eff != 0:
        chans.append(DissipatorChannel(-rate * m_eff, SIGMA_P, SIGMA_P))
        chans.append(DissipatorChannel(-rate * np.conj(m_eff), SIGMA_M, SIGMA_M))
    if dp.p_const != 0:
        proj1 = SIGMA_P @ SIGMA_M
        chans.append(DissipatorChannel(rate * dp.p_const, proj1, proj1))
    h = np.zeros((2, 2), dtype=complex)
    return Liouvillian(h, tuple(chans), space=HilbertSpace(2, 1))


TIER_BUILDERS = {
    "T3F": build_T3F,
    "T3E": build_T3E,
    "T3R": build_T3R,
    "T4F": build_T4F,
    "T4I": build_T4I,
    "T4R": build_T4R,
}

TIER_SPACES = {
    "T0": (2, False),
    "T3F": (3, True),
    "T3E": (2, True),
    "T3R": (2, False),
    "T4F": (4, True),
    "T4I": (2, True),
    "T4R": (2, False),
}


def build_tier(tier: str, cfg: SystemConfig, gamma_t0: float | None = None) -> Liouvillian:
    """Construct any tier by name; T0 uses gamma_t0 (falling back to gamma_r)."""
    if tier == "T0":
        gamma = gamma_t0 if gamma_t0 is not None else cfg.decay.gamma_r
        return build_T0(gamma, cfg.squeezing)
    try:
        return TIER_BUILDERS[tier](cfg)
    except KeyError:
        raise InvariantError(f"unknown tier {tier!r}") from None
