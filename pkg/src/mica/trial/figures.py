"""Matplotlib figures rendered next to the delimited report output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .assign import GROUP_CONTROL, GROUP_TOOL
from .personas import SimulationReport
from .report import TrialReport

_DPI = 150


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def render_trial_figures(report: TrialReport, out_dir: str | Path) -> list[Path]:
    """satisfaction_by_group.png, satisfaction_by_age_band.png, durations_by_group.png."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    cells = report.satisfaction.by_group
    if cells:
        roles = sorted({role for _, role, _, _ in cells})
        fig, axes = plt.subplots(1, len(roles), figsize=(6 * len(roles), 4), squeeze=False)
        for ax, role in zip(axes[0], roles):
            dims = sorted({d for _, r, d, _ in cells if r == role})
            x = range(len(dims))
            width = 0.38
            for offset, group in ((-width / 2, GROUP_TOOL), (width / 2, GROUP_CONTROL)):
                means = [
                    next((c.mean for g, r, d, c in cells if (g, r, d) == (group, role, dim)), 0.0)
                    for dim in dims
                ]
                ax.bar([i + offset for i in x], means, width=width, label=group)
            ax.set_xticks(list(x))
            ax.set_xticklabels(dims, rotation=30, ha="right", fontsize=8)
            ax.set_ylim(0, 9.5)
            ax.set_ylabel("mean score (1-9)")
            ax.set_title(f"{role} satisfaction")
            ax.legend()
        fig.tight_layout()
        written.append(_save(fig, out / "satisfaction_by_group.png"))

    banded = report.satisfaction.by_age_band
    if banded:
        bands = sorted({b for b, _, _ in banded})
        dims = sorted({d for _, d, _ in banded})
        fig, ax = plt.subplots(figsize=(7, 4))
        width = 0.8 / max(len(bands), 1)
        for j, band in enumerate(bands):
            means = [
                next((c.mean for b, d, c in banded if (b, d) == (band, dim)), 0.0) for dim in dims
            ]
            ax.bar([i + j * width for i in range(len(dims))], means, width=width, label=band)
        ax.set_xticks([i + 0.4 - width / 2 for i in range(len(dims))])
        ax.set_xticklabels(dims, rotation=30, ha="right", fontsize=8)
        ax.set_ylim(0, 9.5)
        ax.set_ylabel("mean score (1-9)")
        ax.set_title("patient satisfaction by age band")
        ax.legend(title="age band")
        fig.tight_layout()
        written.append(_save(fig, out / "satisfaction_by_age_band.png"))

    if report.durations_by_group:
        fig, ax = plt.subplots(figsize=(5, 4))
        groups = [g for g, _ in report.durations_by_group]
        means = [
            (s.mean_ms or 0) / 60000.0 for _, s in report.durations_by_group
        ]
        bars = ax.bar(groups, means)
        for bar, (_, s) in zip(bars, report.durations_by_group):
            ax.annotate(
                f"n={s.n_used}" + (f" (-{s.n_trimmed})" if s.n_trimmed else ""),
                (bar.get_x() + bar.get_width() / 2, bar.get_height()),
                ha="center",
                va="bottom",
                fontsize=8,
            )
        ax.set_ylabel("mean consultation duration (min)")
        ax.set_title("consultation duration by group (trimmed)")
        fig.tight_layout()
        written.append(_save(fig, out / "durations_by_group.png"))

    return written


def render_simulation_figures(report: SimulationReport, out_dir: str | Path) -> list[Path]:
    """duration_histogram.png and flag_incidence.png for a simulation run."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    fig, ax = plt.subplots(figsize=(6, 4))
    minutes = [d / 60000.0 for d in report.durations_ms]
    ax.hist(minutes, bins=min(30, max(5, report.n // 20)), edgecolor="black")
    ax.set_xlabel("interview duration (min)")
    ax.set_ylabel("sessions")
    ax.set_title(f"simulated interview durations (n={report.n}, seed={report.seed})")
    fig.tight_layout()
    written.append(_save(fig, out / "duration_histogram.png"))

    if report.flag_counts:
        fig, ax = plt.subplots(figsize=(6, 4))
        names = [f for f, _ in report.flag_counts]
        counts = [c for _, c in report.flag_counts]
        ax.barh(names, counts)
        ax.set_xlabel("sessions flagged")
        ax.set_title("red flag incidence")
        fig.tight_layout()
        written.append(_save(fig, out / "flag_incidence.png"))

    return written
