"""Render figure specs to image files with fixed, timestamp-free styling."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .figspec import FigureSpec, load_inputs

STYLE = {
    "figure.dpi": 110,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.bbox": "tight",
}

_PNG_META = {"Software": "maplabfigs"}  # fixed metadata, no dates


def render(spec: FigureSpec) -> str:
    """Render the spec; returns the output path.

    Deterministic for fixed inputs: fixed style, fixed metadata, no
    timestamps.
    """
    data = load_inputs(spec)
    os.makedirs(os.path.dirname(spec.output) or ".", exist_ok=True)
    with plt.rc_context(STYLE):
        fig = _KINDS[spec.kind](spec, data)
        fig.savefig(spec.output, metadata=_PNG_META)
        plt.close(fig)
    return spec.output


def _fig(w=4.2, h=3.4):
    return plt.subplots(figsize=(w, h))


def _orbit_portrait(spec, data):
    d = data[0]
    fig, ax = _fig(4.2, 4.2)
    # figure-style axes in units of the full circle
    two_pi = 2 * np.pi
    for sid in np.unique(d["seed_id"]):
        m = d["seed_id"] == sid
        ax.plot(d["x"][m] / two_pi, d["y"][m] / two_pi, ".", ms=0.6)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_xlabel(spec.labels[0] or "x / 2pi")
    ax.set_ylabel(spec.labels[1] or "y / 2pi")
    ax.set_title(spec.title or "orbit portrait")
    ax.set_aspect("equal")
    return fig


def _bound_curve(spec, data):
    d = data[0]
    fig, ax = _fig()
    ax.plot(d["lambda"], d["entropy_lower"], "-", lw=1.4,
            label="log(lam/2) - C(lam)")
    ax.axhline(0.0, color="k", lw=0.7)
    cross = _zero_crossing(d["lambda"], d["entropy_lower"])
    if cross is not None:
        ax.axvline(cross, color="r", lw=0.7, ls="--",
                   label=f"crossing {cross:.3f}")
    ax.set_xlabel(spec.labels[0] or "lambda")
    ax.set_ylabel(spec.labels[1] or "entropy lower bound")
    ax.set_title(spec.title or "lower-bound crossing")
    ax.legend(loc="best", fontsize=8)
    return fig


def _zero_crossing(x, y):
    s = np.where(np.diff(np.sign(y)) > 0)[0]
    if len(s) == 0:
        return None
    i = s[0]
    return x[i] + (x[i + 1] - x[i]) * (-y[i]) / (y[i + 1] - y[i])


def _wiener_transition(spec, data):
    fig, axes = plt.subplots(1, 2, figsize=(7.2, 3.2), sharey=False)
    names = ("rotation base", "standard-map base")
    for ax, d, name in zip(axes, data, names):
        ax.plot(d["lambda"], d["s_nmax"], "o-", ms=3, lw=1)
        ax.axvline(2.0, color="r", lw=0.7, ls="--")
        ax.set_xlabel("lambda")
        ax.set_title(name)
    axes[0].set_ylabel(spec.labels[1] or "Cesaro point-mass estimate")
    fig.suptitle(spec.title or "Wiener localization detector")
    return fig


def _wspectrum_bands(spec, data):
    d = data[0]
    fig, ax = _fig(4.2, 4.2)
    ax.plot(d["re"], d["im"], ".", ms=1.2)
    th = np.linspace(0, 2 * np.pi, 256)
    ax.plot(np.cos(th), np.sin(th), "r-", lw=0.5)
    ax.set_xlabel("Re w")
    ax.set_ylabel("Im w")
    ax.set_title(spec.title or "w-spectrum bands")
    ax.set_aspect("equal")
    return fig


def _permutation_distribution(spec, data):
    d = data[0]
    fig, ax = _fig()
    ax.plot(d["rank"], d["exceedance"], "-", lw=1.2)
    ax.axhline(0.0, color="k", lw=0.7)
    ax.set_xlabel("permutation rank (sorted)")
    ax.set_ylabel(spec.labels[1] or "exceedance over log(lam/2)")
    ax.set_title(spec.title or "cyclic permutation experiment")
    return fig


def _exponent_cdfs(spec, data):
    fig, ax = _fig()
    for d, name in zip(data, ("lam = 2", "lam = 10")):
        ax.plot(d["value"], d["cdf"], lw=1.2, label=name)
    ax.set_xlabel(spec.labels[0] or "pointwise exponent")
    ax.set_ylabel("CDF")
    ax.set_title(spec.title or "exponent distribution")
    ax.legend(loc="best", fontsize=8)
    return fig


_KINDS = {
    "orbit_portrait": _orbit_portrait,
    "bound_curve": _bound_curve,
    "wiener_transition": _wiener_transition,
    "wspectrum_bands": _wspectrum_bands,
    "permutation_distribution": _permutation_distribution,
    "exponent_cdfs": _exponent_cdfs,
}
