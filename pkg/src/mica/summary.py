"""Doctor-facing synthesis of a completed interview.

Red flags always come first — the whole point of the summary is that the
doctor can look at the top of it and see what needs immediate attention.
Patient identity never appears anywhere: only the anonymized reference.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import re
from dataclasses import dataclass
from datetime import datetime, timezone

from .clinical import (
    ActivityScore,
    ClinicalOutputs,
    Motif,
    MotivationLevel,
    Profile,
    RedFlag,
    RiskAssessment,
)
from .dsl.model import DialogScript
from .engine import SessionState
from .errors import MicaError

PLAIN_HEADERS = (
    "== RED FLAGS ==",
    "== PROFILE ==",
    "== MOTIVATION ==",
    "== SCORES ==",
    "== RISK FACTORS ==",
    "== COMPLAINTS ==",
    "== ANSWERS ==",
    "== TIMING ==",
)


class SummaryError(MicaError):
    pass


class SessionIncomplete(SummaryError):
    pass


class WeakSecret(SummaryError):
    pass


class EmptyId(SummaryError):
    pass


# --- anonymization ---------------------------------------------------------------------


@dataclass(frozen=True)
class AnonRef:
    token: str  # 32 lowercase hex chars

    def __str__(self) -> str:
        return self.token


def anonymize_patient(raw_id: str, secret: bytes) -> AnonRef:
    """Keyed one-way token standing in for patient identity.

    HMAC-SHA256 truncated to 128 bits. Deterministic for a given
    (raw_id, secret); guaranteed never to leak a 4+ character substring of
    the raw id into the token — on the rare hex coincidence the hash is
    re-keyed with a counter until clean, which keeps the mapping
    deterministic.
    """
    if not raw_id:
        raise EmptyId("patient id must be non-empty")
    if len(secret) < 16:
        raise WeakSecret("anonymization secret must be at least 16 bytes")

    fragments = {raw_id.lower()[i : i + 4] for i in range(len(raw_id) - 3)}
    counter = 0
    material = raw_id.encode("utf-8")
    while True:
        token = hmac.new(secret, material, hashlib.sha256).hexdigest()[:32]
        if not any(fragment in token for fragment in fragments):
            return AnonRef(token=token)
        counter += 1
        material = raw_id.encode("utf-8") + b"\x00" + str(counter).encode("ascii")


# --- the summary -----------------------------------------------------------------------


@dataclass(frozen=True)
class AnswerEntry:
    node_id: str
    prompt: str
    answer: bool | int | str


@dataclass(frozen=True)
class SectionAnswers:
    section: str
    entries: tuple[AnswerEntry, ...]


@dataclass(frozen=True)
class DoctorSummary:
    anon_ref: str
    script_name: str
    script_version: int
    red_flags: tuple[RedFlag, ...]
    profile: Profile
    motivation: MotivationLevel | None
    scores: tuple[ActivityScore, ...]
    risk: RiskAssessment
    motifs: tuple[Motif, ...]
    answers_by_section: tuple[SectionAnswers, ...]
    interview_duration_ms: int
    generated_at: int  # ms epoch


def generate_summary(
    script: DialogScript,
    session: SessionState,
    clinical: ClinicalOutputs,
    *,
    generated_at: int,
) -> DoctorSummary:
    """Assemble the prioritized summary for a complete session.

    Answers are grouped by script section, in script order; every answered
    question appears exactly once.
    """
    if not session.is_complete:
        raise SessionIncomplete("cannot summarize before the interview ends")

    answers = {e.node: e.answer for e in session.transcript if e.kind == "answer"}
    sections: list[SectionAnswers] = []
    for section in script.sections:
        entries = tuple(
            AnswerEntry(node_id=q.id, prompt=q.prompt, answer=answers[q.id])
            for q in section.questions
            if q.id in answers
        )
        if entries:
            sections.append(SectionAnswers(section=section.id, entries=entries))

    return DoctorSummary(
        anon_ref=session.anon_ref,
        script_name=session.script_name,
        script_version=session.script_version,
        red_flags=clinical.red_flags,
        profile=clinical.profile,
        motivation=clinical.motivation,
        scores=clinical.scores,
        risk=clinical.risk,
        motifs=clinical.motifs,
        answers_by_section=tuple(sections),
        interview_duration_ms=session.duration_ms(),
        generated_at=generated_at,
    )


def _answer_text(answer: bool | int | str) -> str:
    if answer is True:
        return "yes"
    if answer is False:
        return "no"
    return str(answer)


def render_summary(summary: DoctorSummary, format: str = "plain") -> str:
    """Render in fixed block order; byte-deterministic for a given summary.

    plain: human-readable text. structured: the JSON wire object served by
    the HTTP API (parse it back with `parse_summary`).
    """
    if format == "structured":
        return json.dumps(summary_to_wire(summary), ensure_ascii=False, sort_keys=True, indent=2)
    if format != "plain":
        raise ValueError(f"unknown format '{format}'")

    lines: list[str] = ["== RED FLAGS =="]
    if summary.red_flags:
        for flag in summary.red_flags:
            lines.append(f"{flag.id}: {flag.triggered_by}")
    else:
        lines.append("no red flags")

    lines.append("== PROFILE ==")
    lines.append(summary.profile.id)

    lines.append("== MOTIVATION ==")
    if summary.motivation is not None:
        lines.append(f"{summary.motivation.level} (from score {summary.motivation.source_score_id})")
    else:
        lines.append("not assessed")

    lines.append("== SCORES ==")
    if summary.scores:
        for score in summary.scores:
            lines.append(f"{score.score_id}: total {score.total}, band {score.band}")
    else:
        lines.append("none")

    lines.append("== RISK FACTORS ==")
    contributing = ", ".join(summary.risk.contributing) if summary.risk.contributing else "none"
    lines.append(
        f"count {summary.risk.count} "
        f"(factors: {contributing}; age/sex contribution: {summary.risk.age_sex_contribution})"
    )

    lines.append("== COMPLAINTS ==")
    if summary.motifs:
        for motif in summary.motifs:
            suffix = f" (x{motif.count})" if motif.count > 1 else ""
            lines.append(f"{motif.category}: {motif.text}{suffix} [from {motif.source}]")
    else:
        lines.append("none")

    lines.append("== ANSWERS ==")
    for section in summary.answers_by_section:
        lines.append(f"[{section.section}]")
        for entry in section.entries:
            lines.append(f"{entry.prompt} -> {_answer_text(entry.answer)}")

    lines.append("== TIMING ==")
    lines.append(f"interview_duration_ms {summary.interview_duration_ms}")
    answered = sum(len(s.entries) for s in summary.answers_by_section)
    lines.append(f"questions_answered {answered}")
    return "\n".join(lines) + "\n"


def summary_to_wire(summary: DoctorSummary) -> dict:
    return {
        "anon_ref": summary.anon_ref,
        "script_name": summary.script_name,
        "script_version": summary.script_version,
        "red_flags": [{"id": f.id, "triggered_by": f.triggered_by} for f in summary.red_flags],
        "profile": summary.profile.id,
        "motivation": (
            {"level": summary.motivation.level, "source_score_id": summary.motivation.source_score_id}
            if summary.motivation is not None
            else None
        ),
        "scores": [{"id": s.score_id, "total": s.total, "band": s.band} for s in summary.scores],
        "risk": {
            "count": summary.risk.count,
            "contributing": list(summary.risk.contributing),
            "age_sex_contribution": summary.risk.age_sex_contribution,
        },
        "motifs": [
            {"category": m.category, "text": m.text, "source": m.source, "count": m.count}
            for m in summary.motifs
        ],
        "answers": [
            {"section": s.section, "node_id": e.node_id, "prompt": e.prompt, "answer": e.answer}
            for s in summary.answers_by_section
            for e in s.entries
        ],
        "interview_duration_ms": summary.interview_duration_ms,
        "generated_at": summary.generated_at,
    }


def parse_summary(text: str) -> DoctorSummary:
    """Inverse of the structured rendering."""
    data = json.loads(text)
    sections: list[SectionAnswers] = []
    for answer in data["answers"]:
        if not sections or sections[-1].section != answer["section"]:
            sections.append(SectionAnswers(section=answer["section"], entries=()))
        entry = AnswerEntry(node_id=answer["node_id"], prompt=answer["prompt"], answer=answer["answer"])
        sections[-1] = SectionAnswers(
            section=sections[-1].section, entries=sections[-1].entries + (entry,)
        )
    return DoctorSummary(
        anon_ref=data["anon_ref"],
        script_name=data["script_name"],
        script_version=data["script_version"],
        red_flags=tuple(RedFlag(id=f["id"], triggered_by=f["triggered_by"]) for f in data["red_flags"]),
        profile=Profile(id=data["profile"]),
        motivation=(
            MotivationLevel(
                level=data["motivation"]["level"],
                source_score_id=data["motivation"]["source_score_id"],
            )
            if data["motivation"] is not None
            else None
        ),
        scores=tuple(
            ActivityScore(score_id=s["id"], total=s["total"], band=s["band"]) for s in data["scores"]
        ),
        risk=RiskAssessment(
            count=data["risk"]["count"],
            contributing=tuple(data["risk"]["contributing"]),
            age_sex_contribution=data["risk"]["age_sex_contribution"],
        ),
        motifs=tuple(
            Motif(category=m["category"], text=m["text"], source=m["source"], count=m["count"])
            for m in data["motifs"]
        ),
        answers_by_section=tuple(sections),
        interview_duration_ms=data["interview_duration_ms"],
        generated_at=data["generated_at"],
    )


# --- prescription drafts ------------------------------------------------------------------

_PLACEHOLDER_RE = re.compile(r"\{([a-z_]+)\}")

KNOWN_PLACEHOLDERS = ("anon_ref", "profile", "activity_band", "motivation", "date")


@dataclass(frozen=True)
class PrescriptionDraft:
    anon_ref: str
    template_id: str
    filled: tuple[tuple[str, str], ...]  # (placeholder, value)
    text: str
    missing: tuple[str, ...]
    status: str = "draft"  # never anything else

    @property
    def complete(self) -> bool:
        return not self.missing


def prepare_prescription(
    summary: DoctorSummary, template: str, *, template_id: str = "custom"
) -> PrescriptionDraft:
    """Fill a `{placeholder}` template from the summary.

    Administrative scaffolding only: the result is always a draft, and an
    unknown or unavailable placeholder makes the draft incomplete rather
    than failing.
    """
    activity_band: str | None = None
    for score in summary.scores:
        if score.score_id == "activity":
            activity_band = score.band
            break
    if activity_band is None and summary.scores:
        activity_band = summary.scores[0].band

    values: dict[str, str | None] = {
        "anon_ref": summary.anon_ref,
        "profile": summary.profile.id,
        "activity_band": activity_band,
        "motivation": summary.motivation.level if summary.motivation else None,
        "date": datetime.fromtimestamp(summary.generated_at / 1000, tz=timezone.utc).strftime(
            "%Y-%m-%d"
        ),
    }

    filled: list[tuple[str, str]] = []
    missing: list[str] = []

    def substitute(match: re.Match) -> str:
        name = match.group(1)
        value = values.get(name)
        if value is None:
            if name not in missing:
                missing.append(name)
            return match.group(0)
        if (name, value) not in filled:
            filled.append((name, value))
        return value

    text = _PLACEHOLDER_RE.sub(substitute, template)
    return PrescriptionDraft(
        anon_ref=summary.anon_ref,
        template_id=template_id,
        filled=tuple(filled),
        text=text,
        missing=tuple(missing),
    )
