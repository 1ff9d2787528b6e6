"""Renderers: pure file-to-file transformations from simulator CSV exports.

Re-rendering identical inputs yields identical image bytes: figures carry no
timestamps (date metadata is suppressed for formats that would embed one).
"""

from __future__ import annotations

import warnings
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .figspec import FigureSpec, FigureSpecError, read_table

QUIVER_COMPONENTS = ("f0", "fc", "fs", "f0+fc", "f0-fc")


def render(spec: FigureSpec) -> Path:
    """Draw the figure described by the spec and write the image file."""
    renderer = _RENDERERS[spec.kind]
    fig = renderer(spec)
    if spec.title:
        fig.suptitle(spec.title)
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.output, dpi=150, **_no_timestamp_kwargs(spec.output))
    plt.close(fig)
    return spec.output


def _no_timestamp_kwargs(path: Path) -> dict:
    suffix = path.suffix.lower()
    if suffix == ".svg":
        return {"metadata": {"Date": None}}
    if suffix == ".pdf":
        return {"metadata": {"CreationDate": None}}
    return {}


def _apply_limits(ax, spec: FigureSpec):
    if spec.xlim is not None:
        ax.set_xlim(*spec.xlim)
    if spec.ylim is not None:
        ax.set_ylim(*spec.ylim)


def _grid_shape(a: np.ndarray, b: np.ndarray) -> tuple[int, int]:
    # rows iterate the first column of a cartesian-product export
    nb = len(np.unique(b))
    na = len(a) // nb
    if na * nb != len(a):
        raise FigureSpecError("grid file is not a full cartesian product")
    return na, nb


def _render_potential_surface(spec: FigureSpec):
    tab = read_table(spec.inputs["potential_grid"], "potential_grid")
    x, chi = tab["x"], tab["chi"]
    u = tab["u1"] + tab["u2"] + tab["u12"]
    na, nb = _grid_shape(x, chi)
    X = x.reshape(na, nb)
    C = chi.reshape(na, nb)
    U = u.reshape(na, nb)
    ceiling = spec.options.get("clip", None)
    if ceiling is not None:
        U = np.minimum(U, float(ceiling))
    fig, ax = plt.subplots(figsize=(6, 4.5))
    levels = spec.options.get("levels", 40)
    m = ax.contourf(X, C, U, levels=levels, cmap="viridis")
    ax.contour(X, C, U, levels=levels, colors="k", linewidths=0.2)
    fig.colorbar(m, ax=ax, label="U(x, chi)")
    ax.set_xlabel("x")
    ax.set_ylabel("chi")
    _apply_limits(ax, spec)
    return fig


def _render_force_quiver(spec: FigureSpec):
    tab = read_table(spec.inputs["force_grid"], "force_grid")
    chi, pi = tab["chi"], tab["pi"]
    na, nb = _grid_shape(chi, pi)
    components = spec.options.get("components", ["f0", "fc", "fs"])
    for c in components:
        if c not in QUIVER_COMPONENTS:
            raise FigureSpecError(
                f"unknown force component {c!r}; expected one of "
                f"{QUIVER_COMPONENTS}")
    fig, axes = plt.subplots(1, len(components),
                             figsize=(4.0 * len(components), 3.6),
                             squeeze=False)
    stride = max(1, int(spec.options.get("stride", max(na // 20, 1))))
    for ax, comp in zip(axes[0], components):
        fc, fp = _component_field(tab, comp)
        C = chi.reshape(na, nb)[::stride, ::stride]
        P = pi.reshape(na, nb)[::stride, ::stride]
        FC = fc.reshape(na, nb)[::stride, ::stride]
        FP = fp.reshape(na, nb)[::stride, ::stride]
        mag = np.hypot(FC, FP)
        ax.quiver(C, P, FC, FP, mag, cmap="plasma", angles="xy")
        ax.set_xlabel("chi")
        ax.set_ylabel("pi")
        ax.set_title(comp)
        _apply_limits(ax, spec)
    return fig


def _component_field(tab, comp: str):
    if comp in ("f0", "fc", "fs"):
        return tab[f"{comp}_chi"], tab[f"{comp}_pi"]
    sign = 1.0 if comp.endswith("+fc") else -1.0
    return (tab["f0_chi"] + sign * tab["fc_chi"],
            tab["f0_pi"] + sign * tab["fc_pi"])


PROJECTIONS = {"xp": ("x", "p"), "xchi": ("x", "chi")}


def _render_poincare_overlay(spec: FigureSpec):
    proj = spec.options.get("projection", "xp")
    if proj not in PROJECTIONS:
        raise FigureSpecError(
            f"unknown projection {proj!r}; expected one of {list(PROJECTIONS)}")
    cx, cy = PROJECTIONS[proj]
    sec = read_table(spec.inputs["section"], "section")
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    if "trajectory" in spec.inputs:
        traj = read_table(spec.inputs["trajectory"], "trajectory")
        ax.plot(traj[cx], traj[cy], color="tab:blue", lw=0.3, alpha=0.6,
                zorder=1)
    if len(sec[cx]) == 0:
        warnings.warn(f"section file {spec.inputs['section']} has no points")
        ax.annotate("no points", (0.5, 0.5), xycoords="axes fraction",
                    ha="center", va="center")
    else:
        ax.scatter(sec[cx], sec[cy], s=4, color="tab:red", zorder=2)
    ax.set_xlabel(cx)
    ax.set_ylabel("chi" if cy == "chi" else cy)
    _apply_limits(ax, spec)
    return fig


def _render_sweep_summary(spec: FigureSpec):
    tab = read_table(spec.inputs["summary"], "summary")
    ok = tab["status"] == "ok" if tab["status"].dtype == object \
        else np.ones(len(tab["lam"]), dtype=bool)
    idx = np.arange(len(tab["lam"]))
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 5.5), sharex=True)
    for phi in np.unique(tab["phi"]):
        sel = ok & (tab["phi"] == phi)
        label = f"phi={phi:.3g}"
        ax1.plot(idx[sel], tab["lam"][sel], "o", ms=4, label=label)
        ax2.plot(idx[sel], tab["chi_range"][sel], "s", ms=4, label=label)
    ax1.axhline(0.0, color="k", lw=0.5)
    ax1.set_ylabel("lambda")
    ax1.legend(fontsize=8)
    ax2.set_ylabel("chi range (q95 - q05)")
    ax2.set_xlabel("task index")
    n_bad = int(np.sum(~ok))
    if n_bad:
        ax1.set_title(f"{n_bad} aborted tasks omitted", fontsize=8)
    return fig


_RENDERERS = {
    "potential-surface": _render_potential_surface,
    "force-quiver": _render_force_quiver,
    "poincare-overlay": _render_poincare_overlay,
    "sweep-summary": _render_sweep_summary,
}
