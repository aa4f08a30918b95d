"""Satisfaction aggregation by group, role, dimension and patient age band.

All means are exact: integer sums divided once. Responses arrive either as
a JSONL file of records or extracted from a service event log (where the
patient key is the session's anonymized reference).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from ..errors import MicaError
from ..service.app import DOCTOR_DIMENSIONS, PATIENT_DIMENSIONS
from .assign import Assignment, GROUP_CONTROL, GROUP_TOOL


class UnassignedSession(MicaError):
    pass


class MalformedBands(MicaError):
    pass


class BadSurveyRecord(MicaError):
    pass


@dataclass(frozen=True)
class AgeBand:
    lo: int | None  # None = open below
    hi: int | None  # None = open above

    @property
    def label(self) -> str:
        if self.lo is None:
            return f"<{(self.hi or 0) + 1}"
        if self.hi is None:
            return f">{self.lo - 1}"
        return f"{self.lo}..{self.hi}"

    def contains(self, age: int) -> bool:
        if self.lo is not None and age < self.lo:
            return False
        if self.hi is not None and age > self.hi:
            return False
        return True


DEFAULT_BANDS = (AgeBand(lo=None, hi=43), AgeBand(lo=44, hi=56), AgeBand(lo=57, hi=None))


def parse_bands(text: str) -> tuple[AgeBand, ...]:
    """Band spec like '<44,44..56,>56'."""
    bands: list[AgeBand] = []
    for part in text.split(","):
        part = part.strip()
        if part.startswith("<"):
            bands.append(AgeBand(lo=None, hi=int(part[1:]) - 1))
        elif part.startswith(">"):
            bands.append(AgeBand(lo=int(part[1:]) + 1, hi=None))
        elif ".." in part:
            lo, hi = part.split("..", 1)
            bands.append(AgeBand(lo=int(lo), hi=int(hi)))
        else:
            raise MalformedBands(f"cannot parse band '{part}'")
    validate_bands(bands)
    return tuple(bands)


def validate_bands(bands: Sequence[AgeBand]) -> None:
    """Bands must be disjoint and contiguous (no gap between neighbours)."""
    if not bands:
        raise MalformedBands("at least one band required")
    if sum(1 for b in bands if b.lo is None) > 1 or sum(1 for b in bands if b.hi is None) > 1:
        raise MalformedBands("at most one open band on each side")
    ordered = sorted(bands, key=lambda b: (-(1 << 60) if b.lo is None else b.lo))
    for prev, cur in zip(ordered, ordered[1:]):
        if prev.hi is None or cur.lo is None:
            raise MalformedBands("open-ended band in the middle of the range")
        if cur.lo <= prev.hi:
            raise MalformedBands(f"bands '{prev.label}' and '{cur.label}' overlap")
        if cur.lo != prev.hi + 1:
            raise MalformedBands(f"gap between bands '{prev.label}' and '{cur.label}'")


@dataclass(frozen=True)
class SurveyRecord:
    patient_id: str
    role: str  # doctor | patient
    scores: tuple[tuple[str, int], ...]
    respondent_age: int | None = None

    def score_map(self) -> dict[str, int]:
        return dict(self.scores)


def _check_record(patient_id: str, role: str, scores: dict, respondent_age, where: str) -> SurveyRecord:
    if role not in ("doctor", "patient"):
        raise BadSurveyRecord(f"{where}: bad role '{role}'")
    expected = DOCTOR_DIMENSIONS if role == "doctor" else PATIENT_DIMENSIONS
    if set(scores.keys()) != set(expected):
        raise BadSurveyRecord(f"{where}: dimension set does not match role '{role}'")
    for dim, value in scores.items():
        if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= 9:
            raise BadSurveyRecord(f"{where}: score '{dim}'={value!r} outside 1..9")
    if respondent_age is not None and (not isinstance(respondent_age, int) or respondent_age < 0):
        raise BadSurveyRecord(f"{where}: bad respondent_age {respondent_age!r}")
    return SurveyRecord(
        patient_id=patient_id,
        role=role,
        scores=tuple(sorted(scores.items())),
        respondent_age=respondent_age if role == "patient" else None,
    )


def load_survey_records(path: str) -> list[SurveyRecord]:
    """Read responses from JSONL: either plain records ({patient_id, role,
    scores, respondent_age?}) or a service event log (survey events keyed by
    the session's anon_ref)."""
    lines = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            line = line.strip()
            if line:
                lines.append((i, json.loads(line)))
    if not lines:
        return []

    if all("kind" in obj for _, obj in lines):  # service event log
        anon_by_session: dict[str, str] = {}
        records: list[SurveyRecord] = []
        latest: dict[tuple[str, str], tuple[int, SurveyRecord]] = {}
        for i, obj in lines:
            if obj["kind"] == "started":
                anon_by_session[obj["session_id"]] = obj["payload"]["anon_ref"]
        for i, obj in lines:
            if obj["kind"] != "survey":
                continue
            session_id = obj["session_id"]
            anon = anon_by_session.get(session_id)
            if anon is None:
                raise BadSurveyRecord(f"line {i}: survey for unknown session '{session_id}'")
            payload = obj["payload"]
            record = _check_record(
                anon, payload["role"], payload["scores"], payload.get("respondent_age"), f"line {i}"
            )
            latest[(session_id, payload["role"])] = (i, record)
        records = [rec for _, rec in sorted(latest.values(), key=lambda pair: pair[0])]
        return records

    records = []
    for i, obj in lines:
        records.append(
            _check_record(
                obj["patient_id"],
                obj["role"],
                obj["scores"],
                obj.get("respondent_age"),
                f"line {i}",
            )
        )
    return records


@dataclass(frozen=True)
class Cell:
    count: int
    mean: float
    min: int
    max: int

    def to_wire(self) -> dict:
        return {"count": self.count, "mean": self.mean, "min": self.min, "max": self.max}


@dataclass(frozen=True)
class SatisfactionReport:
    by_group: tuple[tuple[str, str, str, Cell], ...]  # (group, role, dimension, cell)
    by_age_band: tuple[tuple[str, str, Cell], ...]  # (band label, dimension, cell) — patients only
    mean_difference: tuple[tuple[str, str, float], ...]  # (role, dimension, P_Mica - P_Direct)
    n_responses: int

    def cell(self, group: str, role: str, dimension: str) -> Cell | None:
        for g, r, d, cell in self.by_group:
            if (g, r, d) == (group, role, dimension):
                return cell
        return None

    def to_wire(self) -> dict:
        return {
            "by_group": [
                {"group": g, "role": r, "dimension": d, **cell.to_wire()}
                for g, r, d, cell in self.by_group
            ],
            "by_age_band": [
                {"band": b, "dimension": d, **cell.to_wire()} for b, d, cell in self.by_age_band
            ],
            "mean_difference": [
                {"role": r, "dimension": d, "difference": diff} for r, d, diff in self.mean_difference
            ],
            "n_responses": self.n_responses,
        }


def _make_cell(values: list[int]) -> Cell:
    return Cell(count=len(values), mean=sum(values) / len(values), min=min(values), max=max(values))


def aggregate_surveys(
    responses: Iterable[SurveyRecord],
    assignment: Assignment,
    age_bands: Sequence[AgeBand] = DEFAULT_BANDS,
) -> SatisfactionReport:
    """Counts and exact means per (group, role, dimension) and per age band.

    Every response must belong to an assigned patient. Patient responses
    without a recorded age are simply absent from the age-band table.
    """
    validate_bands(age_bands)
    responses = list(responses)

    grouped: dict[tuple[str, str, str], list[int]] = {}
    banded: dict[tuple[str, str], list[int]] = {}
    for record in responses:
        group = assignment.groups.get(record.patient_id)
        if group is None:
            raise UnassignedSession(f"patient '{record.patient_id}' is not in the assignment")
        for dim, value in record.scores:
            grouped.setdefault((group, record.role, dim), []).append(value)
        if record.role == "patient" and record.respondent_age is not None:
            band = next((b for b in age_bands if b.contains(record.respondent_age)), None)
            if band is not None:
                for dim, value in record.scores:
                    banded.setdefault((band.label, dim), []).append(value)

    by_group = tuple(
        (g, r, d, _make_cell(values)) for (g, r, d), values in sorted(grouped.items())
    )
    by_age_band = tuple((b, d, _make_cell(values)) for (b, d), values in sorted(banded.items()))

    differences: list[tuple[str, str, float]] = []
    roles_dims = sorted({(r, d) for (_, r, d) in grouped})
    for role, dim in roles_dims:
        tool = grouped.get((GROUP_TOOL, role, dim))
        control = grouped.get((GROUP_CONTROL, role, dim))
        if tool and control:
            differences.append(
                (role, dim, sum(tool) / len(tool) - sum(control) / len(control))
            )

    return SatisfactionReport(
        by_group=by_group,
        by_age_band=by_age_band,
        mean_difference=tuple(differences),
        n_responses=len(responses),
    )
