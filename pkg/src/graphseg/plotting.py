"""Overlay tables and static figures for fits and simulation results.

The overlay table is gnuplot-ready text: the data points form the
first dataset (index 0), the fitted signal the second (index 1), with
each segment emitted as its own block so constant segments draw as
horizontal strokes.  Figures are rendered headlessly to SVG.
"""

from __future__ import annotations

import math
from typing import List, Sequence

import numpy as np

from .simulate import SimulationRow
from .solver import Segmentation

__all__ = ["overlay_table", "render_fit_svg", "render_simulation_svg",
           "segment_rows"]


def _spans(segmentation: Segmentation) -> List[tuple]:
    starts = [1] + [cp + 1 for cp in segmentation.changepoints[:-1]]
    return list(zip(starts, segmentation.changepoints))


def segment_rows(segmentation: Segmentation) -> List[List[tuple]]:
    """Per-segment ``(index, value)`` rows of the fitted overlay.

    Constant segments contribute their two endpoints; segments whose
    parameter evolves (decay) contribute one row per point.
    """
    means = segmentation.means
    if means is None:
        raise ValueError("segmentation carries no per-point means")
    blocks = []
    for start, end in _spans(segmentation):
        seg = np.asarray(means[start - 1:end], dtype=float)
        if np.all(np.abs(seg - seg[0]) <= 1e-9 * (1.0 + np.abs(seg[0]))):
            blocks.append([(start, float(seg[0])), (end, float(seg[-1]))])
        else:
            blocks.append([(start + k, float(v))
                           for k, v in enumerate(seg)])
    return blocks


def overlay_table(data, segmentation: Segmentation) -> str:
    """Two-column text: data points, then the fitted overlay.

    Parameters
    ----------
    data : array-like
    segmentation : Segmentation
        Must carry per-point means (as produced by a solve).

    Returns
    -------
    str
    """
    y = np.asarray(data, dtype=float)
    lines = ["# data"]
    lines.extend(f"{i + 1} {v:.12g}" for i, v in enumerate(y))
    lines.extend(["", "", "# fit"])
    blocks = segment_rows(segmentation)
    for b, block in enumerate(blocks):
        if b:
            lines.append("")
        lines.extend(f"{i} {v:.12g}" for i, v in block)
    return "\n".join(lines) + "\n"


def render_fit_svg(data, segmentation: Segmentation, path) -> None:
    """Render data points and fitted segment strokes to an SVG file."""
    from matplotlib.figure import Figure

    y = np.asarray(data, dtype=float)
    fig = Figure(figsize=(9.0, 4.0))
    ax = fig.add_subplot(111)
    ax.plot(np.arange(1, y.size + 1), y, ".", markersize=3, color="0.65")
    for block in segment_rows(segmentation):
        xs = [i for i, _ in block]
        vs = [v for _, v in block]
        (line,) = ax.plot(xs, vs, color="#c0392b", linewidth=2.0)
        line.set_gid("segment-stroke")
    ax.set_xlabel("index")
    ax.set_ylabel("value")
    fig.savefig(path, format="svg")


def render_simulation_svg(rows: Sequence[SimulationRow], path) -> None:
    """Render mean squared errors of a simulation run as a bar chart."""
    from matplotlib.figure import Figure

    noises = list(dict.fromkeys(r.noise for r in rows))
    methods = list(dict.fromkeys(r.method for r in rows))
    table = {(r.noise, r.method): r for r in rows}
    fig = Figure(figsize=(1.2 + 1.4 * len(methods), 4.0))
    ax = fig.add_subplot(111)
    width = 0.8 / len(noises)
    x = np.arange(len(methods), dtype=float)
    for k, noise in enumerate(noises):
        present = [(j, table[(noise, m)]) for j, m in enumerate(methods)
                   if (noise, m) in table]
        pos = [x[j] + (k - (len(noises) - 1) / 2.0) * width
               for j, _ in present]
        vals = [r.mse_mean for _, r in present]
        errs = [r.mse_sd for _, r in present]
        ax.bar(pos, vals, width=width, yerr=errs, capsize=2, label=noise)
    ax.set_xticks(x)
    ax.set_xticklabels(methods)
    ax.set_ylabel("mean squared error")
    finite = [r.mse_mean for r in rows if r.mse_mean > 0.0]
    if finite and max(finite) / min(finite) > 100.0:
        ax.set_yscale("log")
    ax.legend()
    fig.savefig(path, format="svg")
