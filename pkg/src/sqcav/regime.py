"""Derived parameters, validity checks, rate formulas, fits, and the
three-level impossibility scan."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .errors import FitError, InvariantError, RegimeError

# "much greater than" quantified as a ratio bound; the bad-cavity and
# phase-damping separations are intrinsically softer at the reference
# parameters (beta_r/kappa = 1/7, ratio 0.112 on the dephasing bound), so
# they carry wider per-condition thresholds.
DEFAULT_THRESHOLD = 0.1
CONDITION_THRESHOLDS = {
    "bad_cavity": 0.15,
    "phase_damping_negligible": 0.2,
}


def alpha(cfg, tier: str = "T4") -> float:
    """Residual difference of the two ground-state level shifts.

    Three-level: Omega_r^2/(4 Delta_r) - g^2 N / Delta_r.
    Four-level subtracts the auxiliary shift Omega_s^2/(4 Delta_s).
    """
    base = cfg.raman.omega**2 / (4.0 * cfg.raman.delta)
    base -= cfg.cavity.g**2 * cfg.squeezing.n / cfg.raman.delta
    if tier.upper().startswith("T4"):
        if cfg.aux.omega != 0.0:
            base -= cfg.aux.omega**2 / (4.0 * cfg.aux.delta)
    elif not tier.upper().startswith("T3"):
        raise InvariantError(f"alpha is defined for the T3/T4 families, not {tier!r}")
    return base


def solve_aux_drive(cfg, delta_s: float) -> float:
    """Auxiliary Rabi frequency making the level shifts balance exactly.

    Omega_s = sqrt(4 Delta_s (Omega_r^2/4Delta_r - g^2 N/Delta_r)); the sign
    of Delta_s must match the sign of the residual shift, else the radicand
    is negative.
    """
    resid = alpha(cfg, "T3")
    radicand = 4.0 * delta_s * resid
    if radicand < 0:
        raise RegimeError(
            f"sign(Delta_s) must match the residual shift {resid:.6g}; "
            f"got Delta_s = {delta_s:.6g}"
        )
    return math.sqrt(radicand)


def balanced_config(cfg, delta_s: float | None = None):
    """Copy of cfg with the auxiliary drive solved so that alpha(T4) = 0."""
    resid = alpha(cfg, "T3")
    if delta_s is None:
        delta_s = math.copysign(abs(cfg.raman.delta), resid if resid != 0 else 1.0)
    return cfg.with_aux(omega=solve_aux_drive(cfg, delta_s), delta=delta_s)


@dataclass(frozen=True)
class DerivedParams:
    beta_r: float
    eta_r: float
    alpha: float
    big_c: float
    p_const: float
    d_const: float


def derived_params(cfg, tier: str = "T4") -> DerivedParams:
    """Effective coupling beta_r, Stark shift per photon eta_r, cooperativity
    C, dephasing constants P and D, and the residual shift alpha.

    The three-level P presumes the balanced-shift constraint and is singular
    at N = 0; request the T4 form there instead.
    """
    g = cfg.cavity.g
    beta = cfg.beta_r
    eta = cfg.eta_r
    nn = cfg.squeezing.n
    m2 = abs(cfg.squeezing.m) ** 2
    gr = cfg.decay.gamma_r
    big_c = g**2 / (cfg.cavity.kappa * gr) if gr > 0 else math.inf
    if cfg.raman.omega == 0:
        raise InvariantError("derived parameters need a nonzero Raman drive")
    scatter = (2.0 * g**2 / cfg.raman.omega**2) * (nn * (nn + 1.0) + m2)
    if tier.upper().startswith("T3"):
        if nn == 0:
            raise InvariantError(
                "the balanced-shift dephasing constant is singular at N = 0; "
                "use the general reduced generator instead"
            )
        p_const = (nn * (nn + 1.0) + m2) / (2.0 * nn)
    elif tier.upper().startswith("T4"):
        p_const = scatter + (cfg.decay.b1**2 / (2.0 * big_c) if math.isfinite(big_c) else 0.0)
    else:
        raise InvariantError(f"unknown tier family {tier!r}")
    d_const = scatter + (1.0 / (2.0 * big_c) if math.isfinite(big_c) else 0.0)
    return DerivedParams(
        beta_r=beta,
        eta_r=eta,
        alpha=alpha(cfg, tier),
        big_c=big_c,
        p_const=p_const,
        d_const=d_const,
    )


@dataclass(frozen=True)
class BlochRates:
    """Decay constants of the effective two-level Bloch equations:
    d<sx>/dt = -Gx <sx>, d<sy>/dt = -Gy <sy>, d<sz>/dt = -G - Gz <sz>.
    theta is the quadrature rotation absorbing arg(M); rates are for the
    rotated quadratures when theta != 0.
    """

    gamma_x: float
    gamma_y: float
    gamma_z: float
    gamma_drive: float
    theta: float = 0.0

    def __post_init__(self):
        if min(self.gamma_x, self.gamma_y, self.gamma_z) <= 0:
            raise InvariantError("Bloch decay rates must be positive")

    @property
    def sz_steady(self) -> float:
        return -self.gamma_drive / self.gamma_z


def bloch_rates(tier: str, cfg=None, gamma: float | None = None, squeezing=None) -> BlochRates:
    """Closed-form quadrature decay rates for the exactly reduced tiers.

    T0 takes (gamma, squeezing); T3R/T4R take a SystemConfig with balanced
    shifts.  Complex M is handled by rotating the quadrature basis by
    arg(M_eff)/2 rather than generalizing the formulas.
    """
    tier = tier.upper()
    if tier == "T0":
        if gamma is None or squeezing is None:
            raise InvariantError("T0 rates need gamma and squeezing parameters")
        nn, mm = squeezing.n, squeezing.m
        mabs, theta = abs(mm), 0.5 * np.angle(mm) if mm != 0 else 0.0
        return BlochRates(
            gamma_x=0.5 * gamma * (2 * nn + 1 + 2 * mabs),
            gamma_y=0.5 * gamma * (2 * nn + 1 - 2 * mabs),
            gamma_z=gamma * (2 * nn + 1),
            gamma_drive=gamma,
            theta=theta,
        )
    if cfg is None:
        raise InvariantError(f"{tier} rates need a SystemConfig")
    al = alpha(cfg, tier)
    shift_scale = max(abs(cfg.raman.omega**2 / (4.0 * cfg.raman.delta)), 1e-300)
    if abs(al) > 1e-6 * shift_scale:
        raise RegimeError(f"closed-form rates require balanced shifts; alpha = {al:.6g}")
    rate = cfg.beta_r**2 / cfg.cavity.kappa
    nn = cfg.squeezing.n
    m_eff = cfg.squeezing.m * np.exp(2j * cfg.raman.phi)
    mabs = abs(m_eff)
    theta = 0.5 * float(np.angle(m_eff)) if m_eff != 0 else 0.0
    dp = derived_params(cfg, tier)
    if tier.startswith("T3"):
        return BlochRates(
            gamma_x=rate * (2 * nn + 1 + 2 * mabs + dp.p_const),
            gamma_y=rate * (2 * nn + 1 - 2 * mabs + dp.p_const),
            gamma_z=2 * rate * (2 * nn + 1),
            gamma_drive=2 * rate,
            theta=theta,
        )
    corr0 = cfg.decay.b0**2 / (2.0 * dp.big_c) if math.isfinite(dp.big_c) else 0.0
    return BlochRates(
        gamma_x=rate * (2 * nn + 1 + 2 * mabs + dp.d_const),
        gamma_y=rate * (2 * nn + 1 - 2 * mabs + dp.d_const),
        gamma_z=2 * rate * (2 * nn + 1 + corr0),
        gamma_drive=2 * rate * (1 + corr0),
        theta=theta,
    )


@dataclass(frozen=True)
class RegimeRow:
    name: str
    description: str
    small: float
    large: float
    ratio: float
    threshold: float
    passed: bool


@dataclass(frozen=True)
class RegimeReport:
    rows: tuple[RegimeRow, ...]
    passed: bool

    def row(self, name: str) -> RegimeRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "rows": [
                {
                    "name": r.name,
                    "description": r.description,
                    "small_side": r.small,
                    "large_side": r.large,
                    "margin_ratio": r.ratio,
                    "threshold": r.threshold,
                    "passed": r.passed,
                }
                for r in self.rows
            ],
        }


def _ratio(small: float, large: float) -> float:
    if large == 0:
        return math.inf if small != 0 else 0.0
    return small / large


def check_regime(cfg, thresholds: dict | None = None) -> RegimeReport:
    """Evaluate every separation-of-scales inequality with numeric margins.

    Reports and never raises; overall pass requires every row to pass.
    """
    thr = dict(CONDITION_THRESHOLDS)
    if thresholds:
        thr.update(thresholds)

    def t(name):
        return thr.get(name, DEFAULT_THRESHOLD)

    nn = cfg.squeezing.n
    mabs = abs(cfg.squeezing.m)
    g = cfg.cavity.g
    kap = cfg.cavity.kappa
    om_r, de_r = cfg.raman.omega, cfg.raman.delta
    om_s, de_s = cfg.aux.omega, cfg.aux.delta
    gr, gs = cfg.decay.gamma_r, cfg.decay.gamma_s

    rows = []

    def add(name, desc, small, large):
        ratio = _ratio(abs(small), abs(large))
        rows.append(
            RegimeRow(
                name=name,
                description=desc,
                small=float(small),
                large=float(large),
                ratio=float(ratio),
                threshold=t(name),
                passed=ratio <= t(name),
            )
        )

    fast = max(kap, abs(om_r), abs(om_s), abs(g), gr, gs)
    add("raman_detuning_dominates", "|Delta_r| >> kappa, Omega, g, gamma", fast, abs(de_r))
    if om_s != 0.0:
        add("aux_detuning_dominates", "|Delta_s| >> kappa, Omega, g, gamma", fast, abs(de_s))
    add(
        "laser_dominates_cavity_excitation",
        "g sqrt(N) << Omega_r",
        g * math.sqrt(nn),
        abs(om_r),
    )
    add("bad_cavity", "kappa >> |beta_r|, |eta_r|", max(abs(cfg.beta_r), abs(cfg.eta_r)), kap)
    denom = nn * (nn + 1.0) + mabs**2
    bound = math.inf if denom == 0 else (nn + 0.5 - mabs) / denom
    if om_r != 0:
        add(
            "phase_damping_negligible",
            "g^2/Omega_r^2 << (N + 1/2 - M)/(N(N+1) + M^2)",
            (g / om_r) ** 2,
            bound,
        )
    big_c = g**2 / (kap * gr) if gr > 0 else math.inf
    add(
        "strong_coupling_vs_squeezing",
        "C >> 1/(2(2N+1-2M))",
        1.0 / (2.0 * (2 * nn + 1 - 2 * mabs)),
        big_c,
    )
    add("strong_coupling_vs_branching", "C >> b0^2/2", cfg.decay.b0**2 / 2.0, big_c)
    return RegimeReport(rows=tuple(rows), passed=all(r.passed for r in rows))


@dataclass(frozen=True)
class DecayFit:
    rate: float
    amplitude: float
    offset: float
    residual: float
    span_ok: bool

    @property
    def converged(self) -> bool:
        return self.residual <= 0.05


SKIP_FRACTION = 0.05  # initial transient discarded before fitting


def fit_decay(t, values, model: str = "pure_exp") -> DecayFit:
    """Least-squares exponential fit v(t) = A exp(-rate t) (+ offset).

    The first 5% of samples are discarded (reduced generators are exact
    single exponentials only after initial transients).  residual is the
    RMS misfit relative to the fitted amplitude.
    """
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape or t.ndim != 1:
        raise FitError("t and values must be matching 1-d arrays")
    if len(t) < 20:
        raise FitError(f"need at least 20 samples, got {len(t)}")
    lo = int(math.ceil(SKIP_FRACTION * len(t)))
    t, v = t[lo:], v[lo:]

    if model == "pure_exp":
        off0 = 0.0
    elif model == "offset_exp":
        off0 = float(np.mean(v[-max(3, len(v) // 20):]))
    else:
        raise FitError(f"unknown fit model {model!r}")
    resid0 = v - off0
    sign = 1.0 if resid0[0] >= 0 else -1.0
    mag = np.abs(resid0)
    good = mag > 1e-14 * max(1.0, float(mag.max()))
    if good.sum() < 5:
        raise FitError("signal is indistinguishable from the offset")
    slope, intercept = np.polyfit(t[good], np.log(mag[good]), 1)
    rate0 = max(-slope, 1e-12)
    amp0 = sign * math.exp(intercept)

    try:
        if model == "pure_exp":
            popt, _ = curve_fit(
                lambda tt, a, r: a * np.exp(-r * tt), t, v, p0=[amp0, rate0], maxfev=20000
            )
            amp, rate, off = popt[0], popt[1], 0.0
        else:
            popt, _ = curve_fit(
                lambda tt, a, r, c: c + a * np.exp(-r * tt),
                t,
                v,
                p0=[amp0, rate0, off0],
                maxfev=20000,
            )
            amp, rate, off = popt[0], popt[1], popt[2]
    except RuntimeError as exc:
        raise FitError(f"exponential fit did not converge: {exc}") from exc
    if rate <= 0:
        raise FitError(f"fit produced a non-positive rate {rate:.3g}")
    fit_v = off + amp * np.exp(-rate * t)
    residual = float(np.sqrt(np.mean((fit_v - v) ** 2)) / max(abs(amp), 1e-300))
    span_ok = (t[-1] - t[0]) * rate >= 3.0
    return DecayFit(rate=float(rate), amplitude=float(amp), offset=float(off), residual=residual, span_ok=span_ok)


@dataclass(frozen=True)
class NogoScan:
    n_values: np.ndarray
    m_fractions: np.ndarray
    p_values: np.ndarray  # (n, m)
    quad_sum: np.ndarray  # 2N+1-2M+P
    ratio: np.ndarray  # P/(2N+1-2M)
    min_quad_sum: float
    min_ratio: float
    argmin_quad: tuple[float, float]  # (N, M fraction)
    argmin_ratio: tuple[float, float]


def three_level_nogo_scan(
    n_grid: np.ndarray | None = None, m_fraction_grid: np.ndarray | None = None
) -> NogoScan:
    """Grid scan of the three-level dephasing constant P = (N(N+1)+M^2)/(2N).

    Establishes numerically that 2N+1-2M+P never drops below 1 (no squeezing
    advantage survives the scattering dephasing) and locates the minimum of
    P/(2N+1-2M), which bottoms out near 1/4 at large N and vanishing M.
    """
    if n_grid is None:
        n_grid = np.logspace(-3, 1, 200)
    else:
        n_grid = np.asarray(n_grid, dtype=float)
    if m_fraction_grid is None:
        m_fraction_grid = np.linspace(0.0, 1.0, 200)
    else:
        m_fraction_grid = np.asarray(m_fraction_grid, dtype=float)
    if np.any(n_grid <= 0) or np.any(n_grid > 10 + 1e-12):
        raise InvariantError("N grid must lie in (0, 10]")
    if np.any((m_fraction_grid < 0) | (m_fraction_grid > 1)):
        raise InvariantError("M fractions must lie in [0, 1]")

    nn = n_grid[:, None]
    f = m_fraction_grid[None, :]
    m = f * np.sqrt(nn * (nn + 1.0))
    p = (nn * (nn + 1.0) + m**2) / (2.0 * nn)
    base = 2.0 * nn + 1.0 - 2.0 * m
    quad = base + p
    ratio = p / base

    iq = np.unravel_index(int(np.argmin(quad)), quad.shape)
    ir = np.unravel_index(int(np.argmin(ratio)), ratio.shape)
    min_quad = float(quad[iq])
    if min_quad < 1.0 - 1e-9:
        raise InvariantError(
            f"scan found 2N+1-2M+P = {min_quad} < 1, violating the established bound"
        )
    return NogoScan(
        n_values=n_grid,
        m_fractions=m_fraction_grid,
        p_values=p,
        quad_sum=quad,
        ratio=ratio,
        min_quad_sum=min_quad,
        min_ratio=float(ratio[ir]),
        argmin_quad=(float(n_grid[iq[0]]), float(m_fraction_grid[iq[1]])),
        argmin_ratio=(float(n_grid[ir[0]]), float(m_fraction_grid[ir[1]])),
    )
