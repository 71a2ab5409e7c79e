"""Report rendering: matplotlib figures and the machine-readable summary.

Figures land next to the delimited output in the run directory; the
summary is a small INI file so downstream tooling can parse results
without scraping logs.
"""

from __future__ import annotations

import configparser
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

plt.rcParams.update({
    "figure.dpi": 110,
    "savefig.bbox": "tight",
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
})


def write_summary(path, sections: dict[str, dict]) -> None:
    parser = configparser.ConfigParser()
    for name, payload in sections.items():
        parser[name] = {key: str(val) for key, val in payload.items()}
    with open(path, "w") as fh:
        parser.write(fh)


def save_diagnostics_figure(records, path) -> None:
    times = np.asarray([r.time for r in records])
    fig, axes = plt.subplots(2, 2, figsize=(9, 6), sharex=True)
    ax = axes[0, 0]
    ax.plot(times, [r.mass_n for r in records], label="||n||_L1")
    ax.plot(times, [r.linf_c for r in records], label="||c||_inf")
    ax.set_ylabel("mass / sup")
    ax.legend()
    ax = axes[0, 1]
    ax.plot(times, [r.l2_u for r in records], label="||u||_L2")
    ax.plot(times, [r.h1_u for r in records], label="||u||_H1")
    ax.set_ylabel("velocity norms")
    ax.legend()
    ax = axes[1, 0]
    ax.plot(times, [r.entropy_F1 for r in records], label="F1")
    ax.plot(times, [r.entropy_F2 for r in records], label="F2")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("entropy")
    ax.legend()
    ax = axes[1, 1]
    ax.plot(times, [r.dissipation_G1 for r in records], label="G1")
    ax.plot(times, [r.dissipation_G2 for r in records], label="G2")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("dissipation")
    ax.legend()
    fig.savefig(path)
    plt.close(fig)


def save_fields_figure(state, path) -> None:
    from .spectral import vorticity

    fig, axes = plt.subplots(1, 3, figsize=(12, 3.6))
    panels = [
        ("cell density n", state.n.real_values()),
        ("chemical c", state.c.real_values()),
        ("vorticity", vorticity(state.u).real_values()),
    ]
    for ax, (title, vals) in zip(axes, panels):
        im = ax.imshow(vals.T, origin="lower", cmap="viridis")
        ax.set_title(title)
        ax.set_xticks([])
        ax.set_yticks([])
        fig.colorbar(im, ax=ax, fraction=0.046)
    fig.savefig(path)
    plt.close(fig)


def save_convergence_figure(report, path) -> None:
    fig, ax = plt.subplots(figsize=(5, 4))
    levels = np.asarray(report.levels, dtype=float)
    xs = 1.0 / levels if report.axis in ("k", "grid") else levels
    total = np.asarray(report.distances["total"])
    ax.loglog(xs, total, "o-", label="total distance")
    for comp in ("n", "c", "u"):
        ax.loglog(xs, report.distances[comp], ":", alpha=0.7, label=comp)
    if np.all(total > 0):
        anchor = total[0] * (xs / xs[0]) ** report.fitted_rate
        ax.loglog(xs, anchor, "k--", alpha=0.5,
                  label=f"slope {report.fitted_rate:.2f}")
    xlabel = {"dt": "dt", "epsilon": "epsilon", "k": "1/k", "grid": "1/N"}[report.axis]
    ax.set_xlabel(xlabel)
    ax.set_ylabel("L2-in-time L2-in-space distance")
    ax.legend()
    ax.set_title(f"{report.axis}-refinement vs level {report.reference:g}")
    fig.savefig(path)
    plt.close(fig)


def save_ensemble_figure(summary, path) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    ax = axes[0]
    ax.plot(summary.times, summary.f1_mean, label="mean F1")
    ax.plot(summary.times, summary.f1_median, label="median F1")
    ax.fill_between(summary.times, summary.f1_median, summary.f1_q90,
                    alpha=0.25, label="median..q90")
    ax.set_xlabel("t")
    ax.set_ylabel("entropy F1")
    ax.legend()
    ax = axes[1]
    ax.plot(summary.times, summary.u2_mean, label="mean ||u||^2")
    ax.plot(summary.times, summary.g1_integral_mean, label="mean int G1")
    ax.set_xlabel("t")
    ax.legend()
    fig.savefig(path)
    plt.close(fig)


def save_uniqueness_figure(report, path) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 4))
    positive = report.d_delta > 0
    ax.semilogy(report.times[positive], report.d_delta[positive], label="D (delta)")
    positive_h = report.d_half > 0
    ax.semilogy(report.times[positive_h], report.d_half[positive_h], label="D (delta/2)")
    env = report.d0_delta * np.exp(report.c_hat * report.gronwall_integral)
    ax.semilogy(report.times, np.maximum(env, 1e-300), "k--", alpha=0.6,
                label="Gronwall envelope")
    ax.set_xlabel("t")
    ax.set_ylabel("squared-difference functional D")
    ax.legend()
    fig.savefig(path)
    plt.close(fig)
