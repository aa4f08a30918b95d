"""Trial report: satisfaction aggregates plus per-group duration statistics.

The report path emits three artifact families side by side: human-readable
text, the structured JSON wire object, and delimited CSV tables (with
matplotlib figures rendered next to them, see figures.py).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from ..errors import MicaError
from .assign import Assignment, GROUP_CONTROL, GROUP_TOOL
from .stats import DEFAULT_TRIM, DurationStats, TrimRule, duration_stats
from .surveys import AgeBand, DEFAULT_BANDS, SatisfactionReport, SurveyRecord, aggregate_surveys


class UnassignedDuration(MicaError):
    pass


@dataclass(frozen=True)
class TrialReport:
    satisfaction: SatisfactionReport
    durations_by_group: tuple[tuple[str, DurationStats], ...]
    duration_reduction_ms: float | None  # P_Direct mean minus P_Mica mean

    def duration_stats_for(self, group: str) -> DurationStats | None:
        for g, stats in self.durations_by_group:
            if g == group:
                return stats
        return None

    def to_wire(self) -> dict:
        return {
            "satisfaction": self.satisfaction.to_wire(),
            "durations_by_group": {g: s.to_wire() for g, s in self.durations_by_group},
            "duration_reduction_ms": self.duration_reduction_ms,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_wire(), indent=2, sort_keys=True)


def build_trial_report(
    assignment: Assignment,
    responses: Sequence[SurveyRecord],
    durations: Mapping[str, int],
    *,
    age_bands: Sequence[AgeBand] = DEFAULT_BANDS,
    trim_rule: TrimRule = DEFAULT_TRIM,
) -> TrialReport:
    """Aggregate surveys and durations for an assigned roster.

    `durations` maps patient id to consultation milliseconds. Trimming runs
    per group; the reduction is the control group's trimmed mean minus the
    tool group's, so a positive number means time saved.
    """
    satisfaction = aggregate_surveys(responses, assignment, age_bands)

    per_group: dict[str, list[int]] = {}
    for patient_id, ms in durations.items():
        group = assignment.groups.get(patient_id)
        if group is None:
            raise UnassignedDuration(f"duration for unassigned patient '{patient_id}'")
        per_group.setdefault(group, []).append(ms)

    stats_pairs: list[tuple[str, DurationStats]] = []
    for group in (GROUP_TOOL, GROUP_CONTROL):
        if group in per_group:
            stats_pairs.append((group, duration_stats(per_group[group], trim_rule)))

    tool = next((s for g, s in stats_pairs if g == GROUP_TOOL), None)
    control = next((s for g, s in stats_pairs if g == GROUP_CONTROL), None)
    reduction = None
    if tool and control and tool.mean_ms is not None and control.mean_ms is not None:
        reduction = control.mean_ms - tool.mean_ms

    return TrialReport(
        satisfaction=satisfaction,
        durations_by_group=tuple(stats_pairs),
        duration_reduction_ms=reduction,
    )


def render_text(report: TrialReport) -> str:
    lines = ["== SATISFACTION BY GROUP =="]
    if report.satisfaction.by_group:
        for group, role, dim, cell in report.satisfaction.by_group:
            lines.append(
                f"{group} {role} {dim}: n={cell.count} mean={cell.mean:.3f} "
                f"min={cell.min} max={cell.max}"
            )
    else:
        lines.append("no responses")

    lines.append("== SATISFACTION BY AGE BAND (patients) ==")
    if report.satisfaction.by_age_band:
        for band, dim, cell in report.satisfaction.by_age_band:
            lines.append(
                f"{band} {dim}: n={cell.count} mean={cell.mean:.3f} min={cell.min} max={cell.max}"
            )
    else:
        lines.append("no banded responses")

    lines.append("== GROUP MEAN DIFFERENCES (P_Mica - P_Direct) ==")
    if report.satisfaction.mean_difference:
        for role, dim, diff in report.satisfaction.mean_difference:
            lines.append(f"{role} {dim}: {diff:+.3f}")
    else:
        lines.append("not comparable")

    lines.append("== CONSULTATION DURATIONS ==")
    for group, stats in report.durations_by_group:
        mean = f"{stats.mean_ms:.1f}" if stats.mean_ms is not None else "n/a"
        lines.append(
            f"{group}: n_used={stats.n_used} n_trimmed={stats.n_trimmed} "
            f"mean_ms={mean} min_ms={stats.min_ms} max_ms={stats.max_ms} "
            f"[{stats.trim_rule}]"
        )
    if report.duration_reduction_ms is not None:
        minutes = report.duration_reduction_ms / 60000.0
        lines.append(
            f"mean reduction with tool: {report.duration_reduction_ms:.1f} ms ({minutes:.2f} min)"
        )
    return "\n".join(lines) + "\n"


def write_csv_tables(report: TrialReport, out_dir: str | Path) -> list[Path]:
    """satisfaction.csv, age_bands.csv and durations.csv under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    path = out / "satisfaction.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["group", "role", "dimension", "count", "mean", "min", "max"])
        for group, role, dim, cell in report.satisfaction.by_group:
            writer.writerow([group, role, dim, cell.count, cell.mean, cell.min, cell.max])
    written.append(path)

    path = out / "age_bands.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["band", "dimension", "count", "mean", "min", "max"])
        for band, dim, cell in report.satisfaction.by_age_band:
            writer.writerow([band, dim, cell.count, cell.mean, cell.min, cell.max])
    written.append(path)

    path = out / "durations.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["group", "n_used", "n_trimmed", "mean_ms", "min_ms", "max_ms", "trim_rule"])
        for group, stats in report.durations_by_group:
            writer.writerow(
                [group, stats.n_used, stats.n_trimmed, stats.mean_ms, stats.min_ms, stats.max_ms, stats.trim_rule]
            )
    written.append(path)
    return written


def read_durations_file(path: str | Path) -> dict[str, int]:
    """Durations file: one `id,milliseconds` per line."""
    durations: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                patient_id, ms = line.rsplit(",", 1)
                durations[patient_id.strip()] = int(ms)
            except ValueError as exc:
                raise MicaError(f"{path}:{i}: expected 'id,milliseconds'") from exc
    return durations


def read_roster_file(path: str | Path) -> list[str]:
    """Roster file: one patient id per line."""
    roster: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                roster.append(line)
    return roster
