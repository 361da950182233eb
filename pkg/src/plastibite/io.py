"""File formats: trajectory and snapshot CSVs, JSON results, SVG heat maps.

Every float is written with ``%.17g`` so a value read back is bit-identical,
and nothing time- or host-dependent ends up in an output file.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.17g"


def _fmt(v):
    return FLOAT_FMT % v


def write_trajectory_csv(path, trajectory):
    lines = ["t,l2_norm,total_pop"]
    for t, n, m in zip(trajectory.times, trajectory.l2_norm, trajectory.total_pop):
        lines.append(f"{_fmt(t)},{_fmt(n)},{_fmt(m)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_trajectory_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1], data[:, 2]


def write_snapshot_csv(path, x, ages, values):
    """Header ``age,x_0,...``; one line per age cell, age in the first column."""
    values = np.asarray(values, dtype=float)
    lines = ["age," + ",".join(_fmt(v) for v in x)]
    for a, row in zip(ages, values):
        lines.append(_fmt(a) + "," + ",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_snapshot_csv(path):
    """Return ``(x, ages, values)`` from a snapshot CSV."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "age":
        raise ValueError(f"{path}: not a snapshot file (header must start with 'age')")
    x = np.array([float(v) for v in rows[0][1:]])
    body = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float).reshape(-1, x.size + 1)
    return x, body[:, 0], body[:, 1:]


def snapshot_name(step):
    return f"snapshot_{step:06d}.csv"


def write_snapshots(directory, trajectory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    grid = trajectory.grid
    names = []
    for step, _, values in trajectory.snapshots:
        name = snapshot_name(step)
        write_snapshot_csv(directory / name, grid.circle.x, grid.ages.centers, values)
        names.append(name)
    return names


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def dumps_json(obj):
    """Deterministic JSON: sorted keys, shortest round-trip floats, non-finite as null."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps_json(obj))


def heatmap_svg(x, ages, values, a_max=None, title=None):
    """Render ``values[a, x]`` as an SVG string; ``a_max`` crops older cells.

    The colour range is recorded in the SVG description as ``vmin=... vmax=...``.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    values = np.asarray(values, dtype=float)
    ages = np.asarray(ages, dtype=float)
    if a_max is not None:
        keep = ages <= a_max
        ages, values = ages[keep], values[keep]
    vmin, vmax = float(values.min()), float(values.max())
    if vmin == vmax:
        lo, hi = vmin - 0.5, vmax + 0.5  # flat field: single colour
    else:
        lo, hi = vmin, vmax
    da = ages[1] - ages[0] if ages.size > 1 else 1.0
    extent = (0.0, 24.0, float(ages[0] - 0.5 * da), float(ages[-1] + 0.5 * da))

    with matplotlib.rc_context({"svg.hashsalt": "plastibite", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        im = ax.imshow(values, origin="lower", aspect="auto", extent=extent,
                       vmin=lo, vmax=hi, cmap="viridis", interpolation="nearest")
        ax.set_xlabel("biting time x [h]")
        ax.set_ylabel("age a")
        ax.set_xlim(0.0, 24.0)
        if title:
            ax.set_title(title)
        fig.colorbar(im, ax=ax)
        buf = _io.StringIO()
        fig.savefig(buf, format="svg", metadata={
            "Date": None, "Creator": None,
            "Description": f"vmin={vmin!r} vmax={vmax!r}",
        })
        plt.close(fig)
    return buf.getvalue()
