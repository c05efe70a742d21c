"""Render the experiment CSV artifacts into comparison figures.

Figures are a pure view of the CSV content: nothing is recomputed, every
number shown comes straight from the consumed files.  Output images are
deterministic (fixed figure size, dpi and fonts; PNG via the Agg backend).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.figure import Figure

FIGURE_KINDS = (
    "decoupling",
    "conditioning",
    "singular-pass",
    "global-singular",
    "timing",
)

EXPECTED_COLUMNS = {
    "decoupling": ["experiment", "method", "row", "col", "mean", "std"],
    "conditioning": ["experiment", "method", "parameter", "median_kappa", "sample_count"],
    "singular-pass": ["experiment", "method", "parameter", "s", "sigma_min", "sigma_max"],
    "global-singular": [
        "experiment",
        "method",
        "parameter",
        "mean_sigma_min",
        "mean_sigma_max",
    ],
    "timing": [
        "experiment",
        "method",
        "samples",
        "min_ns",
        "q1_ns",
        "median_ns",
        "q3_ns",
        "max_ns",
    ],
}

INPUT_PATTERNS = {
    "decoupling": "decoupling_*.csv",
    "conditioning": "conditioning_*.csv",
    "singular-pass": "singular_pass_*.csv",
    "global-singular": "global_singular_*.csv",
    "timing": "timing_*.csv",
}

_DPI = 120


class SchemaError(ValueError):
    """Input CSV does not match the figure kind's schema."""


@dataclass(frozen=True)
class PlotJob:
    """One rendering task: input CSVs of one figure kind and the output path."""

    kind: str
    inputs: tuple[Path, ...]
    output: Path
    log_axes: bool = True
    markers: tuple[float, ...] = field(default_factory=tuple)  # singular-pass s values

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}, expected one of {FIGURE_KINDS}")
        object.__setattr__(self, "inputs", tuple(Path(p) for p in self.inputs))
        object.__setattr__(self, "output", Path(self.output))
        if not self.inputs:
            raise SchemaError(f"{self.kind}: no input CSV files")
        for path in self.inputs:
            if not path.exists():
                raise SchemaError(f"{self.kind}: input does not exist: {path}")


def _read_table(path: Path, kind: str) -> dict[str, list[str]]:
    with path.open() as handle:
        rows = list(csv.reader(handle))
    expected = EXPECTED_COLUMNS[kind]
    if not rows:
        raise SchemaError(f"{path.name}: empty file, expected header {expected}")
    header = rows[0]
    if header != expected:
        raise SchemaError(
            f"{path.name}: column mismatch, expected {expected}, found {header}"
        )
    body = rows[1:]
    if not body:
        raise SchemaError(f"{path.name}: no data rows")
    table = {name: [row[i] for row in body] for i, name in enumerate(expected)}
    return table


def _floats(values: Sequence[str]) -> np.ndarray:
    return np.array([float(v) for v in values])


def jobs_for_directory(kind: str, in_dir: Path, out_dir: Path) -> PlotJob:
    """Build the rendering job for one figure kind from a results directory."""
    if kind not in FIGURE_KINDS:
        raise SchemaError(f"unknown figure kind {kind!r}, expected one of {FIGURE_KINDS}")
    in_dir = Path(in_dir)
    inputs = tuple(sorted(in_dir.glob(INPUT_PATTERNS[kind])))
    markers: tuple[float, ...] = ()
    if kind == "singular-pass":
        config = in_dir / "config.json"
        if config.exists():
            meta = json.loads(config.read_text()).get("metadata", {})
            markers = tuple(meta.get("singular_crossings", ()))
    name = kind.replace("-", "_")
    return PlotJob(kind=kind, inputs=inputs, output=Path(out_dir) / f"{name}.png", markers=markers)


# --- figure builders ---------------------------------------------------------


def _build_decoupling(job: PlotJob) -> Figure:
    tables = [(_read_table(p, job.kind), p) for p in job.inputs]
    matrices = []
    for table, path in tables:
        mean = np.zeros((6, 6))
        std = np.zeros((6, 6))
        for r, c, m, s in zip(table["row"], table["col"], table["mean"], table["std"]):
            mean[int(r), int(c)] = float(m)
            std[int(r), int(c)] = float(s)
        matrices.append((table["method"][0], mean, std))

    mean_limit = max(np.abs(m).max() for _, m, _ in matrices)
    std_limit = max(s.max() for _, _, s in matrices)
    fig, axes = plt.subplots(
        len(matrices), 2, figsize=(7.0, 3.2 * len(matrices)), squeeze=False
    )
    for i, (method, mean, std) in enumerate(matrices):
        # one color scale per column so methods stay comparable
        im0 = axes[i, 0].imshow(mean, cmap="RdBu_r", vmin=-mean_limit, vmax=mean_limit)
        axes[i, 0].set_title(f"{method} mean", fontsize=9)
        fig.colorbar(im0, ax=axes[i, 0], fraction=0.046)
        im1 = axes[i, 1].imshow(std, cmap="viridis", vmin=0.0, vmax=std_limit)
        axes[i, 1].set_title(f"{method} std", fontsize=9)
        fig.colorbar(im1, ax=axes[i, 1], fraction=0.046)
        for ax in axes[i]:
            ax.set_xticks(range(6))
            ax.set_yticks(range(6))
            ax.tick_params(labelsize=7)
    fig.suptitle("Entrywise moments of the Cartesian-to-Cartesian mappings", fontsize=10)
    fig.tight_layout()
    return fig


def _build_conditioning(job: PlotJob) -> Figure:
    fig, axes = plt.subplots(1, len(job.inputs), figsize=(4.0 * len(job.inputs), 3.4), squeeze=False)
    for ax, path in zip(axes[0], job.inputs):
        table = _read_table(path, job.kind)
        parameter = _floats(table["parameter"])
        kappa = _floats(table["median_kappa"])
        method = table["method"][0]
        ax.plot(parameter, kappa, marker="o", markersize=3, label=method)
        if job.log_axes:
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_xlabel("gamma" if method == "FD" else "alpha")
        ax.set_ylabel("median conditioning")
        ax.set_title(method, fontsize=10)
        ax.grid(True, which="both", alpha=0.3)
    fig.suptitle("Ill-conditioning of the Cartesian-to-Cartesian mappings", fontsize=10)
    fig.tight_layout()
    return fig


def _line_label(method: str) -> str:
    return method


def _build_singular_pass(job: PlotJob) -> Figure:
    fig, (ax_min, ax_max) = plt.subplots(2, 1, figsize=(7.5, 6.0), sharex=True)
    for path in job.inputs:
        table = _read_table(path, job.kind)
        s = _floats(table["s"])
        sigma_min = _floats(table["sigma_min"])
        sigma_max = _floats(table["sigma_max"])
        label = _line_label(table["method"][0])
        ax_min.plot(s, np.where(np.isfinite(sigma_min), sigma_min, np.nan), label=label, linewidth=1.0)
        ax_max.plot(s, np.where(np.isfinite(sigma_max), sigma_max, np.nan), label=label, linewidth=1.0)
    for marker in job.markers:
        ax_min.axvline(marker, color="gray", linestyle="--", linewidth=0.8)
        ax_max.axvline(marker, color="gray", linestyle="--", linewidth=0.8)
    ax_min.set_yscale("log")
    ax_max.set_yscale("log")
    ax_min.set_ylabel("sigma_min")
    ax_max.set_ylabel("sigma_max")
    ax_max.set_xlabel("path parameter s")
    ax_min.legend(fontsize=7, ncol=3)
    ax_min.grid(True, which="both", alpha=0.3)
    ax_max.grid(True, which="both", alpha=0.3)
    fig.suptitle("Mapping spectra through the singular pass", fontsize=10)
    fig.tight_layout()
    return fig


def _build_global_singular(job: PlotJob) -> Figure:
    swept = {}
    baselines = {}
    for path in job.inputs:
        table = _read_table(path, job.kind)
        method = table["method"][0]
        if any(p == "" for p in table["parameter"]):
            baselines[method] = (
                float(table["mean_sigma_min"][0]),
                float(table["mean_sigma_max"][0]),
            )
        else:
            swept[method] = (
                _floats(table["parameter"]),
                _floats(table["mean_sigma_min"]),
                _floats(table["mean_sigma_max"]),
            )

    fig, axes = plt.subplots(2, len(swept), figsize=(4.2 * max(len(swept), 1), 6.0), squeeze=False)
    for col, (method, (parameter, s_min, s_max)) in enumerate(sorted(swept.items())):
        x_label = "gamma" if method == "FD" else "alpha"
        for row, (values, name) in enumerate(((s_min, "mean sigma_min"), (s_max, "mean sigma_max"))):
            ax = axes[row, col]
            ax.plot(parameter, values, marker="o", markersize=3, label=method)
            baseline_key = "JI" if row == 0 else "JT"
            if baseline_key in baselines:
                ref = baselines[baseline_key][row]
                if math.isfinite(ref):
                    ax.axhline(ref, color="gray", linestyle="--", linewidth=0.9, label=baseline_key)
            ax.set_xscale("log")
            ax.set_yscale("log")
            ax.set_xlabel(x_label)
            ax.set_ylabel(name)
            ax.legend(fontsize=7)
            ax.grid(True, which="both", alpha=0.3)
    fig.suptitle("Mapping spectra over the singular set (baselines dashed)", fontsize=10)
    fig.tight_layout()
    return fig


def _build_timing(job: PlotJob) -> Figure:
    stats = []
    for path in job.inputs:
        table = _read_table(path, job.kind)
        stats.append(
            {
                "label": table["method"][0],
                "med": float(table["median_ns"][0]),
                "q1": float(table["q1_ns"][0]),
                "q3": float(table["q3_ns"][0]),
                "whislo": float(table["min_ns"][0]),
                "whishi": float(table["max_ns"][0]),
                "fliers": [],
            }
        )
    stats.sort(key=lambda s: s["med"])
    fig, ax = plt.subplots(figsize=(7.0, 0.7 * len(stats) + 1.8))
    ax.bxp(
        stats,
        orientation="horizontal",
        showfliers=False,
        medianprops={"color": "tab:orange"},
    )
    ax.set_xscale("log")
    ax.set_xlabel("time per call [ns]")
    ax.grid(True, which="both", axis="x", alpha=0.3)
    fig.suptitle("Execution time per mapping computation", fontsize=10)
    fig.tight_layout()
    return fig


_BUILDERS = {
    "decoupling": _build_decoupling,
    "conditioning": _build_conditioning,
    "singular-pass": _build_singular_pass,
    "global-singular": _build_global_singular,
    "timing": _build_timing,
}


def build_figure(job: PlotJob) -> Figure:
    """Validate the job's inputs and build the matplotlib figure."""
    return _BUILDERS[job.kind](job)


def render(job: PlotJob) -> Path:
    """Render the job to its output path; the image is written only after the
    inputs validated against the figure kind's schema."""
    figure = build_figure(job)
    job.output.parent.mkdir(parents=True, exist_ok=True)
    figure.savefig(job.output, dpi=_DPI)
    plt.close(figure)
    return job.output
