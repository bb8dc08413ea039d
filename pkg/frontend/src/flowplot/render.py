"""Figure rendering for snapshot fields and diagnostics time series."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .files import find_snapshots, read_diagnostics, read_snapshot

# fields shown on a symmetric diverging scale about zero
SIGNED_FIELDS = ("vorticity", "u1", "u2")


def _field_style(name: str, values: np.ndarray):
    if name in SIGNED_FIELDS:
        vmax = float(np.max(np.abs(values)))
        vmax = vmax if vmax > 0.0 else 1.0
        return dict(cmap="RdBu_r", vmin=-vmax, vmax=vmax)
    return dict(cmap="viridis")


def _imshow(ax, values: np.ndarray, style: dict):
    # array axis 0 is x, axis 1 is y; imshow wants rows vertical
    return ax.imshow(values.T, origin="lower", extent=(0.0, 1.0, 0.0, 1.0),
                     interpolation="nearest", **style)


def render_field(meta_path: str | Path, out_path: str | Path,
                 cmap: str | None = None) -> Path:
    """Heatmap of one snapshot with axis labels and time annotation;
    signed fields get a symmetric color scale."""
    values, meta = read_snapshot(meta_path)
    style = _field_style(meta["field"], values)
    if cmap is not None:
        style["cmap"] = cmap
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    im = _imshow(ax, values, style)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"{meta['field']} at t = {float(meta['time']):g}")
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return out_path


def render_sequence(directory: str | Path, field: str,
                    out_dir: str | Path) -> Path:
    """Panel row of one field's snapshots over time, on a shared symmetric
    color scale."""
    metas = find_snapshots(directory, field)
    if not metas:
        raise FileNotFoundError(f"no {field!r} snapshots in {directory}")
    frames = [read_snapshot(p) for p in metas]
    vmax = max(float(np.max(np.abs(v))) for v, _ in frames)
    vmax = vmax if vmax > 0.0 else 1.0
    if field in SIGNED_FIELDS:
        style = dict(cmap="RdBu_r", vmin=-vmax, vmax=vmax)
    else:
        style = dict(cmap="viridis")
    n = len(frames)
    fig, axes = plt.subplots(1, n, figsize=(3.2 * n, 3.6), squeeze=False)
    for ax, (values, meta) in zip(axes[0], frames):
        im = _imshow(ax, values, style)
        ax.set_title(f"t = {float(meta['time']):g}")
        ax.set_xlabel("x")
    axes[0][0].set_ylabel("y")
    fig.colorbar(im, ax=list(axes[0]), shrink=0.85)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / f"sequence_{field}.png"
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return out_path


def render_diagnostics(csv_path: str | Path, out_path: str | Path) -> Path:
    """Mass drift (log scale), max |u|, and error columns against time."""
    names, data = read_diagnostics(csv_path)
    col = {name: i for i, name in enumerate(names)}
    for needed in ("time", "mass_drift", "max_u"):
        if needed not in col:
            raise KeyError(f"diagnostics file lacks column {needed!r}")
    t = data[:, col["time"]]
    marker = "o" if len(t) < 2 else None

    fig, axes = plt.subplots(2, 1, figsize=(6.0, 6.0), sharex=True)
    drift = np.abs(data[:, col["mass_drift"]])
    floor = 1e-18
    axes[0].semilogy(t, np.maximum(drift, floor), marker=marker)
    axes[0].set_ylabel("|mass drift|")
    axes[0].grid(True, alpha=0.3)

    axes[1].plot(t, data[:, col["max_u"]], marker=marker, label="max |u|")
    for err_name in ("err_rho", "err_u"):
        if err_name in col:
            vals = data[:, col[err_name]]
            if np.any(np.isfinite(vals)):
                axes[1].plot(t, vals, marker=marker, label=err_name)
    axes[1].set_xlabel("t")
    axes[1].legend(loc="best")
    axes[1].grid(True, alpha=0.3)

    fig.tight_layout()
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return out_path
