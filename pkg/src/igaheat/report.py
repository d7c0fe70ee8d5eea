"""Delimited outputs and figure rendering for experiment results.

CSV writers use full round-trip decimal for reals and an empty field for
inapplicable values. Figures are SVG with a pinned hash salt and no
creation date, so rerunning with the same seed reproduces the bytes;
wall-clock columns are the only sanctioned nondeterminism.
"""

from __future__ import annotations

import csv

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "igaheat"

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np

COMPARISON_HEADER = ["method", "n", "coeff_mse", "pointwise_mse", "train_seconds"]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return repr(float(value))


def write_comparison_csv(rows: list[dict], path) -> None:
    """Write evaluation rows with the pinned comparison schema."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(COMPARISON_HEADER)
        for row in rows:
            writer.writerow([_cell(row[key]) for key in COMPARISON_HEADER])


def read_comparison_csv(path) -> list[dict]:
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if header != COMPARISON_HEADER:
            raise ValueError(f"unexpected comparison header: {header}")
        rows = []
        for raw in reader:
            row = dict(zip(header, raw))
            for key in ("coeff_mse", "pointwise_mse", "train_seconds"):
                row[key] = float(row[key]) if row[key] else None
            if row["n"] != "all":
                row["n"] = float(row["n"])
            rows.append(row)
    return rows


def write_loss_csv(losses, path) -> None:
    """Per-epoch mean loss as ``epoch,loss`` rows."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["epoch", "loss"])
        for epoch, loss in enumerate(losses):
            writer.writerow([epoch, repr(float(loss))])


def _strip_date(path) -> None:
    # the SVG backend stamps <dc:date>; drop it so bytes are reproducible
    with open(path) as handle:
        lines = handle.readlines()
    with open(path, "w") as handle:
        handle.writelines(line for line in lines if "<dc:date>" not in line)


def heatmap_svg(xs: np.ndarray, ys: np.ndarray, values: np.ndarray, path,
                title: str) -> None:
    """Linear-scale heatmap; masked cells stay blank; value range is
    annotated in an SVG comment."""
    masked = np.ma.masked_invalid(values)
    vmin, vmax = float(masked.min()), float(masked.max())
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    mesh = ax.pcolormesh(xs, ys, masked.T, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax)
    ax.set_title(title)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_aspect("equal")
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    _strip_date(path)
    with open(path) as handle:
        text = handle.read()
    marker = "<svg"
    pos = text.index(marker)
    end = text.index(">", pos) + 1
    comment = f"\n<!-- data-min={vmin!r} data-max={vmax!r} -->"
    with open(path, "w") as handle:
        handle.write(text[:end] + comment + text[end:])


def loss_curve_svg(losses, path, title: str) -> None:
    """Per-epoch loss on a log scale."""
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    ax.semilogy(np.arange(len(losses)), losses)
    ax.set_title(title)
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean loss")
    ax.grid(True, which="both", alpha=0.3)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    _strip_date(path)
