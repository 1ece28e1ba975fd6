"""Command-line interface: validate | bloch | spectrum | compare | nogo.

One JSON configuration file drives every command; all frequencies are
entered as value/(2 pi) in MHz and times in us.  Outputs are CSV files with
fixed 17-significant-digit formatting (byte-identical across runs for the
same configuration and version) plus a JSON result record carrying the
fully resolved configuration snapshot.

Exit codes: 0 success, 1 physics-condition failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
import uuid
from pathlib import Path

import numpy as np

from . import __version__
from .compare import compare_tiers
from .errors import ConfigError, SqcavError
from .integrate import StepControls, evolve
from .models import SystemConfig, build_tier
from .operators import SIGMA_X, SIGMA_Y, SIGMA_Z
from .regime import alpha, bloch_rates, check_regime, fit_decay, solve_aux_drive, three_level_nogo_scan
from .spectra import ProbeConfig, spectrum_scan

TWO_PI = 2.0 * math.pi
_INV_SQRT2 = 1.0 / math.sqrt(2.0)


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


# ---------------------------------------------------------------- config ---

_SCHEMA = {
    "schema_version": int,
    "tier": str,
    "system": {
        "squeezing": {"n": float, "m": "complex"},
        "cavity": {"kappa_mhz": float, "g_mhz": float, "delta_mhz": float},
        "raman": {"omega_mhz": float, "delta_mhz": float, "phi": float},
        "aux": {"omega_mhz": float, "delta_mhz": float},
        "decay": {"gamma_r_mhz": float, "gamma_s_mhz": float, "b0": float, "b1": float},
        "n_max": int,
    },
    "evolve": {
        "t_final_us": float,
        "samples": int,
        "rtol": float,
        "atol": float,
        "initial_state": str,
    },
    "probe": {
        "mode": str,
        "amplitude_mhz": float,
        "e_minus_mhz": "complex",
        "nu_min_mhz": float,
        "nu_max_mhz": float,
        "nu_points": int,
    },
    "compare": {
        "tier_a": str,
        "tier_b": str,
        "t_final_us": float,
        "samples": int,
        "initial_state": str,
        "rebalance_reduced": bool,
    },
    "nogo": {"n_points": int, "m_points": int},
}

_DEFAULTS = {
    "schema_version": 1,
    "tier": "T4R",
    "system": {
        "squeezing": {"n": 0.0, "m": 0.0},
        "cavity": {"kappa_mhz": 4.2, "g_mhz": 24.0, "delta_mhz": 0.0},
        "raman": {"omega_mhz": 240.0, "delta_mhz": 4800.0, "phi": 0.0},
        "aux": None,  # absent means: auto-balance for the T4 family
        "decay": {"gamma_r_mhz": 0.0, "gamma_s_mhz": 0.0, "b0": _INV_SQRT2, "b1": _INV_SQRT2},
        "n_max": 15,
    },
    "evolve": {
        "t_final_us": None,
        "samples": 400,
        "rtol": 1e-8,
        "atol": 1e-10,
        "initial_state": "bloch_xyz",
    },
    "probe": {
        "mode": "antisym",
        "amplitude_mhz": 0.01,
        "e_minus_mhz": None,
        "nu_min_mhz": -3.0,
        "nu_max_mhz": 3.0,
        "nu_points": 801,
    },
    "compare": {
        "tier_a": "T4I",
        "tier_b": "T4R",
        "t_final_us": None,
        "samples": 41,
        "initial_state": "plus_y",
        "rebalance_reduced": False,
    },
    "nogo": {"n_points": 200, "m_points": 200},
}


def _check_value(path: str, spec, value):
    if spec == "complex":
        if isinstance(value, (int, float)):
            return [float(value), 0.0]
        if (
            isinstance(value, list)
            and len(value) == 2
            and all(isinstance(v, (int, float)) for v in value)
        ):
            return [float(value[0]), float(value[1])]
        raise ConfigError(f"{path}: expected a number or [re, im] pair, got {value!r}")
    if spec is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if spec is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if spec is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false, got {value!r}")
        return value
    if spec is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        return value
    raise AssertionError(f"bad schema entry at {path}")


def _merge(path: str, schema: dict, defaults, raw):
    """Strict merge of raw into defaults: unknown keys rejected with their path."""
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path or 'config'}: expected an object")
    out = {}
    for key in raw:
        if key not in schema:
            raise ConfigError(f"{path or 'config'}: unknown key {key!r}")
    for key, spec in schema.items():
        dval = defaults.get(key) if isinstance(defaults, dict) else None
        here = f"{path}.{key}" if path else key
        if isinstance(spec, dict):
            if key in raw:
                out[key] = _merge(here, spec, dval or {}, raw[key])
            else:
                out[key] = None if dval is None else _merge(here, spec, dval, {})
        elif key in raw:
            if raw[key] is None:
                out[key] = None
            else:
                out[key] = _check_value(here, spec, raw[key])
        else:
            out[key] = dval
    return out


def load_config(path: str | None, overrides: argparse.Namespace) -> dict:
    """Read, validate and default a run configuration; apply CLI overrides."""
    raw = {}
    if path:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    resolved = _merge("", _SCHEMA, _DEFAULTS, raw)
    if resolved["schema_version"] != 1:
        raise ConfigError(f"unsupported schema_version {resolved['schema_version']}")
    if getattr(overrides, "tier", None):
        resolved["tier"] = overrides.tier
    if getattr(overrides, "nmax", None):
        resolved["system"]["n_max"] = overrides.nmax
    if getattr(overrides, "probe_mode", None):
        resolved["probe"]["mode"] = overrides.probe_mode
    return resolved


def system_from_resolved(resolved: dict, auto_balance_tier: str | None = None) -> SystemConfig:
    """Instantiate the physical configuration; optionally solve the auxiliary
    drive so the four-level level shifts balance (recorded back into the
    resolved snapshot so the run is reproducible from it)."""
    sysd = resolved["system"]
    m = sysd["squeezing"]["m"]
    m_c = complex(m[0], m[1]) if isinstance(m, list) else complex(m or 0.0)
    aux = sysd["aux"]
    cfg = SystemConfig.from_mhz(
        n=sysd["squeezing"]["n"],
        m=m_c,
        kappa_mhz=sysd["cavity"]["kappa_mhz"],
        g_mhz=sysd["cavity"]["g_mhz"],
        delta_mhz=sysd["cavity"]["delta_mhz"],
        omega_r_mhz=sysd["raman"]["omega_mhz"],
        delta_r_mhz=sysd["raman"]["delta_mhz"],
        phi=sysd["raman"]["phi"],
        omega_s_mhz=(aux or {"omega_mhz": 0.0})["omega_mhz"] if aux else 0.0,
        delta_s_mhz=(aux or {"delta_mhz": 0.0})["delta_mhz"] if aux else 0.0,
        gamma_r_mhz=sysd["decay"]["gamma_r_mhz"],
        gamma_s_mhz=sysd["decay"]["gamma_s_mhz"],
        b0=sysd["decay"]["b0"],
        b1=sysd["decay"]["b1"],
        n_max=sysd["n_max"],
    )
    if aux is None and auto_balance_tier and auto_balance_tier.upper().startswith("T4"):
        resid = alpha(cfg, "T3")
        delta_s = math.copysign(cfg.raman.delta, resid if resid != 0 else 1.0)
        omega_s = solve_aux_drive(cfg, delta_s)
        cfg = cfg.with_aux(omega=omega_s, delta=delta_s)
        resolved["system"]["aux"] = {
            "omega_mhz": omega_s / TWO_PI,
            "delta_mhz": delta_s / TWO_PI,
        }
    return cfg


def _controls(resolved: dict) -> StepControls:
    ev = resolved["evolve"]
    return StepControls(rtol=ev["rtol"], atol=ev["atol"])


def _initial_bloch(name: str) -> tuple[float, float, float]:
    states = {
        "bloch_xyz": (1 / math.sqrt(3), 1 / math.sqrt(3), 1 / math.sqrt(3)),
        "plus_y": (0.0, 1.0, 0.0),
        "plus_x": (1.0, 0.0, 0.0),
        "excited": (0.0, 0.0, 1.0),
        "ground": (0.0, 0.0, -1.0),
    }
    if name not in states:
        raise ConfigError(f"unknown initial_state {name!r}; choose from {sorted(states)}")
    return states[name]


def _record(out_dir: Path, name: str, command: str, resolved: dict, payload: dict, t_start: float):
    rec = {
        "run_id": str(uuid.uuid4()),
        "command": command,
        "library_version": __version__,
        "duration_s": time.time() - t_start,
        "resolved_config": resolved,
        "payload": payload,
    }
    (out_dir / name).write_text(json.dumps(rec, indent=2, sort_keys=True) + "\n")
    return rec


# -------------------------------------------------------------- commands ---


def cmd_validate(args) -> int:
    t0 = time.time()
    resolved = load_config(args.config, args)
    cfg = system_from_resolved(resolved, auto_balance_tier=resolved["tier"])
    report = check_regime(cfg)
    print(f"{'condition':38s} {'small side':>12s} {'large side':>12s} {'ratio':>9s} {'thr':>5s}  pass")
    for r in report.rows:
        print(
            f"{r.name:38s} {r.small:12.5g} {r.large:12.5g} {r.ratio:9.4f} "
            f"{r.threshold:5.2f}  {'yes' if r.passed else 'NO'}"
        )
    print(f"overall: {'PASS' if report.passed else 'FAIL'}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _record(out_dir, "validate.json", "validate", resolved, report.as_dict(), t0)
    return 0 if report.passed else 1


def cmd_bloch(args) -> int:
    t0 = time.time()
    resolved = load_config(args.config, args)
    tier = resolved["tier"].upper()
    if tier not in ("T0", "T3R", "T4R"):
        raise ConfigError(f"bloch requires a reduced tier (T0, T3R, T4R), got {tier}")
    cfg = system_from_resolved(resolved, auto_balance_tier=tier)
    gamma_t0 = cfg.decay.gamma_r if cfg.decay.gamma_r > 0 else TWO_PI * 1.0
    if tier == "T0":
        rates = bloch_rates("T0", gamma=gamma_t0, squeezing=cfg.squeezing)
    else:
        rates = bloch_rates(tier, cfg)
    ev = resolved["evolve"]
    t_final = ev["t_final_us"] or 6.0 / min(rates.gamma_x, rates.gamma_y, rates.gamma_z)
    samples = ev["samples"]
    liou = build_tier(tier, cfg, gamma_t0=gamma_t0)
    from .compare import atom_bloch_state

    rho0 = atom_bloch_state(*_initial_bloch(ev["initial_state"]))
    t_eval = np.linspace(0.0, t_final, samples)
    traj = evolve(liou, rho0, t_final, controls=_controls(resolved), t_eval=t_eval)
    sx = traj.expect(SIGMA_X).real
    sy = traj.expect(SIGMA_Y).real
    sz = traj.expect(SIGMA_Z).real

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / "bloch.csv", ["t_us", "sx", "sy", "sz"], zip(t_eval, sx, sy, sz))

    warnings_list = []
    fitted, analytic, rel = {}, {}, {}
    for key, series, model, expected in (
        ("gamma_x", sx, "pure_exp", rates.gamma_x),
        ("gamma_y", sy, "pure_exp", rates.gamma_y),
        ("gamma_z", sz, "offset_exp", rates.gamma_z),
    ):
        fit = fit_decay(t_eval, series, model)
        fitted[key] = fit.rate
        fitted[key + "_over_2pi_mhz"] = fit.rate / TWO_PI
        analytic[key] = expected
        analytic[key + "_over_2pi_mhz"] = expected / TWO_PI
        rel[key] = abs(fit.rate - expected) / expected
        if fit.residual > 0.05:
            warnings_list.append(f"{key}: fit residual {fit.residual:.3f} exceeds 5%")
        if key == "gamma_z":
            fitted["gamma_drive"] = -fit.offset * fit.rate
            analytic["gamma_drive"] = rates.gamma_drive
            rel["gamma_drive"] = abs(fitted["gamma_drive"] - rates.gamma_drive) / rates.gamma_drive
    payload = {
        "tier": tier,
        "fitted": fitted,
        "analytic": analytic,
        "relative_error": rel,
        "warnings": warnings_list,
        "outputs": {"csv": "bloch.csv"},
    }
    _record(out_dir, "bloch.json", "bloch", resolved, payload, t0)
    for w in warnings_list:
        print(f"warning: {w}", file=sys.stderr)
    print(f"wrote {out_dir / 'bloch.csv'}")
    return 0


def _spectrum_rows(nu, res):
    return zip(
        nu / TWO_PI,
        res.a_plus.real,
        res.a_plus.imag,
        res.abs2_plus,
        res.a_minus.real,
        res.a_minus.imag,
        res.abs2_minus,
    )


_SPECTRUM_HEADER = [
    "nu_over_2pi_MHz",
    "re_Ap_plus",
    "im_Ap_plus",
    "abs2_Ap_plus",
    "re_Ap_minus",
    "im_Ap_minus",
    "abs2_Ap_minus",
]


def cmd_spectrum(args) -> int:
    t0 = time.time()
    resolved = load_config(args.config, args)
    tier = resolved["tier"].upper()
    family = "T3" if tier.startswith("T3") else "T4"
    cfg = system_from_resolved(resolved, auto_balance_tier=family)
    pr = resolved["probe"]
    nu = TWO_PI * np.linspace(pr["nu_min_mhz"], pr["nu_max_mhz"], pr["nu_points"])
    em = pr["e_minus_mhz"]
    probe = ProbeConfig.from_mode(
        pr["mode"],
        TWO_PI * pr["amplitude_mhz"],
        nu,
        e_minus=complex(em[0], em[1]) * TWO_PI if isinstance(em, list) else None,
    )
    method = args.method
    results = spectrum_scan(cfg, probe, method=method, tier=family, controls=_controls(resolved))
    if method != "both":
        results = {method: results}

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {"tier": family, "probe_mode": pr["mode"], "outputs": {}, "metadata": {}}
    for name, res in results.items():
        fname = f"spectrum_{name}.csv"
        _write_csv(out_dir / fname, _SPECTRUM_HEADER, _spectrum_rows(nu, res))
        payload["outputs"][name] = fname
        payload["metadata"][name] = _jsonable(res.metadata)
        if "warning" in res.metadata:
            print(f"warning: {res.metadata['warning']}", file=sys.stderr)
        if "warning_sz" in res.metadata:
            print(f"warning: {res.metadata['warning_sz']}", file=sys.stderr)
    if method == "both":
        ana, num = results["analytic"], results["numeric"]
        rows, disc_p, disc_m = [], [], []
        for a2a, a2n, a2am, a2nm, x in zip(
            ana.abs2_plus, num.abs2_plus, ana.abs2_minus, num.abs2_minus, nu
        ):
            gate_p = max(a2a, 1e-4 * float(np.max(ana.abs2_plus)))
            gate_m = max(a2am, 1e-4 * float(np.max(ana.abs2_minus))) if np.max(ana.abs2_minus) > 0 else 1.0
            dp = abs(a2n - a2a) / gate_p
            dm = abs(a2nm - a2am) / gate_m
            rows.append((x / TWO_PI, dp, dm))
            disc_p.append(dp)
            disc_m.append(dm)
        _write_csv(
            out_dir / "spectrum_discrepancy.csv",
            ["nu_over_2pi_MHz", "rel_disc_plus", "rel_disc_minus"],
            rows,
        )
        payload["outputs"]["discrepancy"] = "spectrum_discrepancy.csv"
        payload["max_rel_discrepancy_plus"] = max(disc_p)
        payload["max_rel_discrepancy_minus"] = max(disc_m)
    _record(out_dir, "spectrum.json", "spectrum", resolved, payload, t0)
    for name in payload["outputs"].values():
        print(f"wrote {out_dir / name}")
    return 0


def cmd_compare(args) -> int:
    t0 = time.time()
    resolved = load_config(args.config, args)
    cm = resolved["compare"]
    tier_a = args.tier_a or cm["tier_a"]
    tier_b = args.tier_b or cm["tier_b"]
    family = "T4" if ("T4" in tier_a or "T4" in tier_b) else "T3"
    cfg = system_from_resolved(resolved, auto_balance_tier=family)
    if cm["t_final_us"]:
        t_final = cm["t_final_us"]
    else:
        t_final = 3.0 * cfg.cavity.kappa / cfg.beta_r**2
    result = compare_tiers(
        cfg,
        tier_a,
        tier_b,
        t_final,
        samples=cm["samples"],
        controls=_controls(resolved),
        atom_bloch=_initial_bloch(cm["initial_state"]),
        rebalance_reduced=cm["rebalance_reduced"],
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out_dir / "compare.csv", ["t_us", "trace_distance"], zip(result.ts, result.distances)
    )
    payload = {
        "tier_a": tier_a,
        "tier_b": tier_b,
        "t_final_us": t_final,
        "max_trace_distance": result.max_distance,
        "outputs": {"csv": "compare.csv"},
    }
    _record(out_dir, "compare.json", "compare", resolved, payload, t0)
    print(f"max trace distance {result.max_distance:.6g}; wrote {out_dir / 'compare.csv'}")
    return 0


def cmd_nogo(args) -> int:
    t0 = time.time()
    resolved = load_config(args.config, args)
    ng = resolved["nogo"]
    scan = three_level_nogo_scan(
        n_grid=np.logspace(-3, 1, ng["n_points"]),
        m_fraction_grid=np.linspace(0.0, 1.0, ng["m_points"]),
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    def rows():
        for i, nv in enumerate(scan.n_values):
            for j, f in enumerate(scan.m_fractions):
                yield (nv, f, scan.p_values[i, j], scan.quad_sum[i, j], scan.ratio[i, j])

    _write_csv(out_dir / "nogo.csv", ["N", "M_fraction", "P", "quad_sum", "ratio"], rows())
    payload = {
        "min_quad_sum": scan.min_quad_sum,
        "min_ratio": scan.min_ratio,
        "argmin_quad": {"n": scan.argmin_quad[0], "m_fraction": scan.argmin_quad[1]},
        "argmin_ratio": {"n": scan.argmin_ratio[0], "m_fraction": scan.argmin_ratio[1]},
        "outputs": {"csv": "nogo.csv"},
    }
    _record(out_dir, "nogo.json", "nogo", resolved, payload, t0)
    print(
        f"min(2N+1-2M+P) = {scan.min_quad_sum:.6f}; min P/(2N+1-2M) = {scan.min_ratio:.6f} "
        f"at N={scan.argmin_ratio[0]:.4g}, M fraction={scan.argmin_ratio[1]:.4g}"
    )
    return 0


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sqcav",
        description="Squeezed-reservoir cavity QED simulator",
    )
    ap.add_argument("--version", action="version", version=f"sqcav {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="JSON run configuration")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--tier", default=None, help="model tier override")
        p.add_argument("--nmax", type=int, default=None, help="Fock truncation override")
        p.add_argument("--seed", type=int, default=None, help="reserved")
        p.add_argument("--threads", type=int, default=1, help="worker threads for grid scans")

    p = sub.add_parser("validate", help="check every parameter-regime inequality")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bloch", help="quadrature decay trajectories and fitted rates")
    common(p)
    p.set_defaults(func=cmd_bloch)

    p = sub.add_parser("spectrum", help="two-probe transmission spectra")
    common(p)
    p.add_argument("--method", choices=["analytic", "numeric", "both"], default="analytic")
    p.add_argument(
        "--probe-mode", choices=["single", "sym", "antisym", "custom"], default=None
    )
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("compare", help="trace distance between two model tiers")
    common(p)
    p.add_argument("--tier-a", default=None)
    p.add_argument("--tier-b", default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("nogo", help="three-level dephasing scan")
    common(p, config_required=False)
    p.set_defaults(func=cmd_nogo)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SqcavError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
