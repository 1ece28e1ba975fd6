"""Figure specifications and CSV loading against the documented contracts."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path


class PlotgenError(Exception):
    """Bad figure specification or input data."""


KINDS = ("usb", "usb_zoom", "lsb", "single_probe", "bloch", "nogo_heatmap")

REQUIRED_COLUMNS = {
    "usb": ("nu_over_2pi_MHz", "abs2_Ap_plus"),
    "usb_zoom": ("nu_over_2pi_MHz", "abs2_Ap_plus"),
    "single_probe": ("nu_over_2pi_MHz", "abs2_Ap_plus"),
    "lsb": ("nu_over_2pi_MHz", "abs2_Ap_minus"),
    "bloch": ("t_us", "sx", "sy", "sz"),
    "nogo_heatmap": ("N", "M_fraction", "ratio"),
}


@dataclass(frozen=True)
class FigureInput:
    path: str
    label: str = ""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple[FigureInput, ...]
    output: str
    xlim: tuple[float, float] | None = None
    ylim: tuple[float, float] | None = None
    title: str = ""
    rates_json: str | None = None  # bloch kind: fitted-rate annotations

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PlotgenError(f"unknown figure kind {self.kind!r}; choose from {KINDS}")
        if not self.inputs:
            raise PlotgenError("figure spec lists no input CSV files")
        for inp in self.inputs:
            if not Path(inp.path).exists():
                raise PlotgenError(f"input CSV not found: {inp.path}")
        if self.rates_json and not Path(self.rates_json).exists():
            raise PlotgenError(f"rates JSON not found: {self.rates_json}")

    @classmethod
    def from_json(cls, path: str) -> "FigureSpec":
        try:
            raw = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise PlotgenError(f"spec file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise PlotgenError(f"{path}:{exc.lineno}: {exc.msg}") from exc
        known = {"kind", "inputs", "output", "xlim", "ylim", "title", "rates_json"}
        unknown = set(raw) - known
        if unknown:
            raise PlotgenError(f"unknown spec keys: {sorted(unknown)}")
        try:
            inputs = tuple(
                FigureInput(path=i["path"], label=i.get("label", "")) for i in raw["inputs"]
            )
            return cls(
                kind=raw["kind"],
                inputs=inputs,
                output=raw["output"],
                xlim=tuple(raw["xlim"]) if raw.get("xlim") else None,
                ylim=tuple(raw["ylim"]) if raw.get("ylim") else None,
                title=raw.get("title", ""),
                rates_json=raw.get("rates_json"),
            )
        except (KeyError, TypeError) as exc:
            raise PlotgenError(f"malformed figure spec: {exc}") from exc


def load_columns(path: str, columns: tuple[str, ...]) -> dict[str, list[float]]:
    """Read the named columns, verbatim, no transformation."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in columns if c not in header]
        if missing:
            raise PlotgenError(
                f"{path}: missing required column(s) {missing}; found {header}"
            )
        out: dict[str, list[float]] = {c: [] for c in columns}
        for row in reader:
            for c in columns:
                out[c].append(float(row[c]))
    if not out[columns[0]]:
        raise PlotgenError(f"{path}: no data rows")
    return out
