"""Deterministic matplotlib rendering of the supported figure kinds."""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .spec import REQUIRED_COLUMNS, FigureSpec, PlotgenError, load_columns

# fixed styles so identical inputs give identical bytes
matplotlib.rcParams.update(
    {
        "svg.hashsalt": "plotgen",
        "figure.dpi": 120,
        "savefig.dpi": 120,
        "font.size": 10,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "lines.linewidth": 1.4,
    }
)

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")

_SPECTRUM_YLABEL = {
    "usb": r"$|A_p^+(\nu)|^2$",
    "usb_zoom": r"$|A_p^+(\nu)|^2$",
    "single_probe": r"$|A_p^+(\nu)|^2$",
    "lsb": r"$|A_p^-(\nu)|^2$",
}


def _save(fig, output: str) -> list[str]:
    base = Path(output)
    base.parent.mkdir(parents=True, exist_ok=True)
    if base.suffix in (".png", ".svg"):
        base = base.with_suffix("")
    written = []
    for ext, meta in ((".png", {"Software": None}), (".svg", {"Date": None})):
        target = base.with_suffix(ext)
        fig.savefig(target, metadata=meta)
        written.append(str(target))
    plt.close(fig)
    return written


def _render_spectrum(spec: FigureSpec):
    ycol = REQUIRED_COLUMNS[spec.kind][1]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for k, inp in enumerate(spec.inputs):
        data = load_columns(inp.path, REQUIRED_COLUMNS[spec.kind])
        ax.plot(
            data["nu_over_2pi_MHz"],
            data[ycol],
            color=_COLORS[k % len(_COLORS)],
            label=inp.label or Path(inp.path).stem,
        )
    ax.set_xlabel(r"$\nu/2\pi$ (MHz)")
    ax.set_ylabel(_SPECTRUM_YLABEL[spec.kind] + r" (MHz$^2$)")
    if spec.kind == "usb_zoom" and spec.xlim is None:
        ax.set_xlim(-0.4, 0.4)
    return fig, ax


def _render_bloch(spec: FigureSpec):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    inp = spec.inputs[0]
    data = load_columns(inp.path, REQUIRED_COLUMNS["bloch"])
    for k, comp in enumerate(("sx", "sy", "sz")):
        ax.plot(data["t_us"], data[comp], color=_COLORS[k], label=rf"$\langle\sigma_{comp[1]}\rangle$")
    if spec.rates_json:
        payload = json.loads(Path(spec.rates_json).read_text())["payload"]
        fitted = payload.get("fitted", {})
        lines = [
            f"{name}: {fitted[key]:.5g} /us"
            for name, key in (
                (r"fit $\Gamma_x$", "gamma_x"),
                (r"fit $\Gamma_y$", "gamma_y"),
                (r"fit $\Gamma_z$", "gamma_z"),
            )
            if key in fitted
        ]
        if lines:
            ax.text(
                0.98,
                0.98,
                "\n".join(lines),
                transform=ax.transAxes,
                ha="right",
                va="top",
                fontsize=8,
                bbox={"boxstyle": "round", "facecolor": "white", "alpha": 0.8},
            )
    ax.set_xlabel(r"$t$ ($\mu$s)")
    ax.set_ylabel("Bloch components")
    return fig, ax


def _render_nogo(spec: FigureSpec):
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    data = load_columns(spec.inputs[0].path, REQUIRED_COLUMNS["nogo_heatmap"])
    n = np.asarray(data["N"])
    f = np.asarray(data["M_fraction"])
    r = np.asarray(data["ratio"])
    n_vals = np.unique(n)
    f_vals = np.unique(f)
    if len(n_vals) * len(f_vals) != len(r):
        raise PlotgenError("scan table is not a complete N x M_fraction grid")
    order = np.lexsort((f, n))
    grid = r[order].reshape(len(n_vals), len(f_vals))
    mesh = ax.pcolormesh(f_vals, n_vals, np.log10(grid), shading="auto", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label=r"$\log_{10}\, P/(2N{+}1{-}2M)$")
    ax.set_yscale("log")
    ax.set_xlabel(r"$M/\sqrt{N(N+1)}$")
    ax.set_ylabel(r"$N$")
    ax.grid(False)
    return fig, ax


def render(spec: FigureSpec) -> list[str]:
    """Produce the figure; returns the written file paths (PNG and SVG)."""
    if spec.kind in _SPECTRUM_YLABEL:
        fig, ax = _render_spectrum(spec)
    elif spec.kind == "bloch":
        fig, ax = _render_bloch(spec)
    else:
        fig, ax = _render_nogo(spec)
    if spec.xlim:
        ax.set_xlim(*spec.xlim)
    if spec.ylim:
        ax.set_ylim(*spec.ylim)
    if spec.title:
        ax.set_title(spec.title)
    if spec.kind != "nogo_heatmap" and (len(spec.inputs) > 1 or spec.kind == "bloch"):
        ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return _save(fig, spec.output)
