"""Figure rendering from baroflow CSV outputs.

Four figure kinds are supported, keyed to the solver's documented files:
density heatmaps from node snapshots, density-extrema and energy histories
from the diagnostics table, and section overlays with the dotted/dashed/solid
convention for up to three series. Rendering never mutates its inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIGURE_KINDS = ("density_heatmap", "extrema_history", "section_overlay",
                "energy_history")
OVERLAY_STYLES = ("dotted", "dashed", "solid")

DIAGNOSTICS_HEADER = ("t,mass,momentum_x,momentum_y,energy,rho_center,"
                      "rho_max,rho_min,rho_min_quad,symmetry_err")
SECTION_HEADER = "x1,rho"
SNAPSHOT_HEADER = "x1,x2,rho,u1,u2"


class FigureInputError(ValueError):
    pass


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple[Path, ...]
    output: Path
    labels: tuple[str, ...] = ()
    title: str = ""

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise FigureInputError(
                f"figure kind must be one of {FIGURE_KINDS}, got {self.kind!r}")
        if not self.inputs:
            raise FigureInputError("at least one input file is required")
        missing = [str(p) for p in self.inputs if not Path(p).exists()]
        if missing:
            raise FigureInputError(f"missing inputs: {', '.join(missing)}")


def read_table(path: Path, expected_header: str) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != expected_header:
            raise FigureInputError(
                f"{path}: header {header!r} does not match {expected_header!r}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape[1] != len(expected_header.split(",")):
        raise FigureInputError(f"{path}: wrong column count {data.shape[1]}")
    return data


def snapshot_grid(data: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Recover the structured (M+1) x (M+1) grid from snapshot node order."""
    n = data.shape[0]
    side = math.isqrt(n)
    if side * side != n:
        raise FigureInputError(
            f"snapshot has {n} rows, not a square number; cannot infer the grid")
    x = data[:side, 0]
    y = data[::side, 1]
    rho = data[:, 2].reshape(side, side)
    return x, y, rho


def _labels(spec: FigureSpec, default: list[str]) -> list[str]:
    labels = list(spec.labels) + default[len(spec.labels):]
    return labels[:len(default)]


def render(spec: FigureSpec) -> Path:
    """Render one figure and return the written image path."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    try:
        if spec.kind == "density_heatmap":
            data = read_table(spec.inputs[0], SNAPSHOT_HEADER)
            x, y, rho = snapshot_grid(data)
            im = ax.pcolormesh(x, y, rho, shading="gouraud", cmap="viridis")
            fig.colorbar(im, ax=ax, label="density")
            ax.set_xlabel("x1")
            ax.set_ylabel("x2")
            ax.set_aspect("equal")

        elif spec.kind == "extrema_history":
            data = read_table(spec.inputs[0], DIAGNOSTICS_HEADER)
            t = data[:, 0]
            for col, style, label in ((5, "solid", "center"),
                                      (6, "dashed", "max"),
                                      (7, "dotted", "min")):
                ax.plot(t, data[:, col], linestyle=style, color="k", label=label)
            ax.set_xlabel("t")
            ax.set_ylabel("density")
            ax.legend()

        elif spec.kind == "section_overlay":
            if len(spec.inputs) > 3:
                raise FigureInputError("section overlays take at most 3 series")
            labels = _labels(spec, [Path(p).stem for p in spec.inputs])
            for path, style, label in zip(spec.inputs, OVERLAY_STYLES, labels):
                data = read_table(path, SECTION_HEADER)
                ax.plot(data[:, 0], data[:, 1], linestyle=style, color="k",
                        label=label)
            ax.set_xlabel("x1")
            ax.set_ylabel("density")
            ax.legend()

        else:  # energy_history
            if len(spec.inputs) > 3:
                raise FigureInputError("energy histories take at most 3 series")
            labels = _labels(spec, [Path(p).stem for p in spec.inputs])
            # two-series convention: dashed for the first run, solid for the second
            styles = ("solid",) if len(spec.inputs) == 1 else ("dashed", "solid", "dotted")
            for path, style, label in zip(spec.inputs, styles, labels):
                data = read_table(path, DIAGNOSTICS_HEADER)
                ax.plot(data[:, 0], data[:, 4], linestyle=style, color="k",
                        label=label)
            ax.set_xlabel("t")
            ax.set_ylabel("total mechanical energy")
            ax.legend()

        if spec.title:
            ax.set_title(spec.title)
        out = Path(spec.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out, dpi=130)
        return out
    finally:
        plt.close(fig)
