"""End-to-end figure generation from the simulator's CLI output.

Exercises the full CSV contract: the simulator is driven as a subprocess
through its command-line interface (the only coupling between the two
packages), and the four spectrum figure kinds are rendered from its output.
Feature checks assert the qualitative structure the figures must show:
a broad cavity background, a narrow central dip, and a squeezed dip
narrower than the vacuum one.
"""

import csv
import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from plotgen.cli import main

SQCAV = shutil.which("sqcav")

pytestmark = pytest.mark.skipif(SQCAV is None, reason="simulator CLI not installed")


def run_spectrum(config: dict, out_dir: Path, mode: str | None = None):
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg_path = out_dir / "config.json"
    cfg_path.write_text(json.dumps(config))
    cmd = [SQCAV, "spectrum", "--config", str(cfg_path), "--out", str(out_dir)]
    if mode:
        cmd += ["--probe-mode", mode]
    res = subprocess.run(cmd, capture_output=True, text=True, timeout=300)
    assert res.returncode == 0, res.stderr
    return out_dir / "spectrum_analytic.csv"


def base_config(n: float, m: float, g: float = 24.0) -> dict:
    return {
        "schema_version": 1,
        "tier": "T4R",
        "system": {
            "squeezing": {"n": n, "m": m},
            "cavity": {"kappa_mhz": 4.2, "g_mhz": g},
            "raman": {"omega_mhz": 240.0, "delta_mhz": 4800.0},
            "decay": {"gamma_r_mhz": 5.2},
            "n_max": 15,
        },
        "probe": {"mode": "antisym", "amplitude_mhz": 0.01, "nu_points": 801},
    }


def read_col(path: Path, col: str) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([float(r[col]) for r in rows])


@pytest.fixture(scope="module")
def spectra(tmp_path_factory):
    root = tmp_path_factory.mktemp("csv")
    sq = run_spectrum(base_config(0.5, np.sqrt(0.75)), root / "squeezed")
    vac = run_spectrum(base_config(0.0, 0.0), root / "vacuum")
    bare = run_spectrum(base_config(0.5, np.sqrt(0.75), g=0.0), root / "bare")
    single = run_spectrum(base_config(0.5, np.sqrt(0.75)), root / "single", mode="single")
    return {"squeezed": sq, "vacuum": vac, "bare": bare, "single": single}


def dip_width(nu: np.ndarray, a2: np.ndarray) -> float:
    mid = len(nu) // 2
    window = np.abs(nu) < 0.45
    floor = a2[window].min()
    bg = a2[np.abs(np.abs(nu) - 1.0).argmin()]
    half = 0.5 * (floor + bg)
    below = window & (a2 < half)
    return float(nu[below].max() - nu[below].min())


def test_criterion_13_figures_and_features(spectra, tmp_path):
    # qualitative features carried by the CSVs themselves
    nu = read_col(spectra["bare"], "nu_over_2pi_MHz")
    bare = read_col(spectra["bare"], "abs2_Ap_plus")
    # broad cavity background: half-width of order kappa, far wider than the dips
    assert bare[len(nu) // 2] > 0.8 * bare.max()
    assert bare.min() > 0.3 * bare.max()  # varies smoothly over +-3 MHz
    sq = read_col(spectra["squeezed"], "abs2_Ap_plus")
    vac = read_col(spectra["vacuum"], "abs2_Ap_plus")
    w_sq = dip_width(nu, sq)
    w_vac = dip_width(nu, vac)
    assert w_vac < 0.8  # narrow central feature vs the 4.2 MHz cavity width
    assert w_sq < 0.5 * w_vac  # subnatural squeezed linewidth
    lsb = read_col(spectra["single"], "abs2_Ap_minus")
    assert lsb.max() > 0  # squeezing generates the lower sideband

    # render all four figure kinds, twice, byte-identically
    jobs = [
        ("usb", [spectra["bare"], spectra["squeezed"], spectra["vacuum"]]),
        ("usb_zoom", [spectra["squeezed"], spectra["vacuum"]]),
        ("single_probe", [spectra["single"]]),
        ("lsb", [spectra["single"]]),
    ]
    for kind, paths in jobs:
        images = []
        for run in ("r1", "r2"):
            spec_path = tmp_path / f"{kind}_{run}.json"
            spec_path.write_text(
                json.dumps(
                    {
                        "kind": kind,
                        "inputs": [{"path": str(p), "label": p.parent.name} for p in paths],
                        "output": str(tmp_path / run / kind),
                    }
                )
            )
            assert main(["--spec", str(spec_path)]) == 0
            images.append((tmp_path / run / f"{kind}.png").read_bytes())
        assert images[0] == images[1], f"{kind} render is not deterministic"
