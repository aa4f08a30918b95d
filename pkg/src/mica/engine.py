"""Deterministic interview state machine.

The engine is a transition function over an explicit :class:`SessionState`:
no ambient clock, no randomness, no globals. Callers supply millisecond
timestamps, which makes every session replayable from its event stream and
keeps concurrent sessions trivially isolated (scripts are immutable, state
is confined to one session object).

Event wire format (shared with the HTTP service's append-only log): one dict
per event with keys ``kind``, ``ts`` and ``payload``. `transcript_events`
serializes a session to that stream and `replay` rebuilds a session from it,
raising :class:`ReplayDivergence` if a recorded step is not reproducible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Iterable

from .dsl.model import DialogScript, END, InterceptRule, QuestionNode
from .dsl.validate import validate_script
from .errors import MicaError


class EngineError(MicaError):
    pass


class InvalidScript(EngineError):
    def __init__(self, codes: tuple[str, ...]):
        super().__init__(f"script failed validation: {', '.join(codes)}")
        self.codes = codes


class SessionComplete(EngineError):
    pass


class NoRouteMatched(EngineError):
    """Internal defect: validated scripts always have a matching route."""


class ReplayDivergence(EngineError):
    def __init__(self, index: int, reason: str):
        super().__init__(f"replay diverged at event {index}: {reason}")
        self.index = index
        self.reason = reason


# --- session data ------------------------------------------------------------------


@dataclass(frozen=True)
class FactCapture:
    key: str
    value: bool | int | str
    source: str  # node id or intercept rule id
    kind: str  # "bool" | "int" | "choice" | "text" | "list"


@dataclass
class PatientFacts:
    """Typed key/value store of collected answers.

    Scalar keys are write-once (routing is acyclic, so a question can never
    run twice); list keys are append-only and hold complaint captures.
    The capture log preserves global capture order for motif extraction.
    """

    scalars: dict[str, bool | int | str] = field(default_factory=dict)
    lists: dict[str, list[str]] = field(default_factory=dict)
    provenance: dict[str, str] = field(default_factory=dict)
    captures: list[FactCapture] = field(default_factory=list)

    def set_scalar(self, key: str, value: bool | int | str, source: str, kind: str) -> None:
        if key in self.scalars:
            raise EngineError(f"fact '{key}' already written by {self.provenance[key]}")
        self.scalars[key] = value
        self.provenance[key] = source
        self.captures.append(FactCapture(key=key, value=value, source=source, kind=kind))

    def append_list(self, key: str, text: str, source: str) -> None:
        self.lists.setdefault(key, []).append(text)
        self.provenance.setdefault(key, source)
        self.captures.append(FactCapture(key=key, value=text, source=source, kind="list"))

    def get(self, key: str, default: Any = None) -> Any:
        if key in self.scalars:
            return self.scalars[key]
        if key in self.lists:
            return self.lists[key]
        return default

    def truthy(self, key: str) -> bool:
        """Flag-expression semantics: boolean True, or a non-empty list fact."""
        value = self.scalars.get(key)
        if value is True:
            return True
        return bool(self.lists.get(key))


@dataclass(frozen=True)
class TranscriptEntry:
    kind: str  # "answer" | "rejected" | "help" | "interrupted"
    node: str
    prompt_shown: str
    utterance: str
    answer: bool | int | str | None
    ts: int
    rule_id: str | None = None  # interrupted entries only
    keyword: str | None = None

    @property
    def was_interruption(self) -> bool:
        return self.kind == "interrupted"


@dataclass(frozen=True)
class Prompt:
    node_id: str
    text: str
    kind: str
    options: tuple[str, ...] = ()
    help: str | None = None


@dataclass(frozen=True)
class StepResult:
    state: str  # "awaiting_answer" | "complete" | "rejected"
    prompt: Prompt | None = None
    reject_reason: str | None = None
    warning: str | None = None


@dataclass
class SessionState:
    session_id: str
    anon_ref: str
    script_name: str
    script_version: int
    current: str | None  # None once complete
    facts: PatientFacts
    transcript: list[TranscriptEntry]
    interruption_stack: list[tuple[str, str]]  # (pending node, intercept rule id)
    started_at: int
    last_event_at: int
    per_question_latency: dict[str, int] = field(default_factory=dict)
    overhead_ms: int = 0  # time spent on help, rejections and interruptions

    @property
    def is_complete(self) -> bool:
        return self.current is None

    def duration_ms(self) -> int:
        return self.last_event_at - self.started_at

    def answered_nodes(self) -> list[str]:
        return [e.node for e in self.transcript if e.kind == "answer"]

    def rejection_count(self) -> int:
        return sum(1 for e in self.transcript if e.kind == "rejected")

    def interruption_count(self) -> int:
        return sum(1 for e in self.transcript if e.kind == "interrupted")

    def consecutive_rejections(self) -> int:
        streak = 0
        for entry in reversed(self.transcript):
            if entry.kind == "rejected":
                streak += 1
            else:
                break
        return streak


# --- answer normalization ------------------------------------------------------------

_INT_RE = re.compile(r"^[+-]?\d+$")


def normalize_answer(node: QuestionNode, utterance: str) -> tuple[bool, bool | int | str | None]:
    """(ok, value). Yes/no and option labels match case-insensitively,
    numeric answers must be in-range integers, text is taken verbatim."""
    if node.kind == "yesno":
        s = utterance.strip().lower()
        if s == "yes":
            return True, True
        if s == "no":
            return True, False
        return False, None
    if node.kind == "choice":
        s = utterance.strip().lower()
        for opt in node.options:
            if opt.label.lower() == s:
                return True, opt.label
        return False, None
    if node.kind == "numeric":
        s = utterance.strip()
        if not _INT_RE.match(s):
            return False, None
        value = int(s)
        lo, hi = node.numeric_range or (0, 0)
        if lo <= value <= hi:
            return True, value
        return False, None
    return True, utterance


_FACT_KIND = {"yesno": "bool", "numeric": "int", "choice": "choice", "text": "text"}


# --- engine operations ----------------------------------------------------------------


def start_session(
    script: DialogScript,
    anon_ref: str,
    now: int,
    *,
    session_id: str = "local",
    validation=None,
) -> tuple[SessionState, Prompt]:
    """Create a fresh session positioned at the script's start node.

    Pass a precomputed `validation` report to skip re-validation when the
    caller already checked the script (the service and simulator do).
    """
    report = validation if validation is not None else validate_script(script)
    if not report.ok:
        raise InvalidScript(report.error_codes())
    session = SessionState(
        session_id=session_id,
        anon_ref=anon_ref,
        script_name=script.name,
        script_version=script.version,
        current=script.start,
        facts=PatientFacts(),
        transcript=[],
        interruption_stack=[],
        started_at=now,
        last_event_at=now,
    )
    return session, build_prompt(script.node(script.start))


def build_prompt(node: QuestionNode, *, with_help: bool = False) -> Prompt:
    return Prompt(
        node_id=node.id,
        text=node.prompt,
        kind=node.kind,
        options=node.option_labels() if node.kind == "choice" else (),
        help=node.help if with_help else None,
    )


@lru_cache(maxsize=None)
def _keyword_patterns(keywords: tuple[str, ...]) -> tuple[tuple[str, re.Pattern], ...]:
    return tuple((kw, re.compile(rf"\b{re.escape(kw)}\b")) for kw in keywords)


def detect_interruption(
    script: DialogScript, session: SessionState, utterance: str
) -> tuple[InterceptRule, str] | None:
    """Whole-word scan of the utterance against every intercept lexicon.

    First rule in script order wins, first keyword in rule order within it.
    Never fires when the utterance is a legal direct answer to the current
    question: direct answers take precedence. Pure check; the caller records
    the complaint and re-prompts.
    """
    if session.current is None:
        return None
    node = script.node(session.current)
    ok, _ = normalize_answer(node, utterance)
    if ok:
        return None
    lowered = utterance.lower()
    for rule in script.intercepts:
        for keyword, pattern in _keyword_patterns(rule.keywords):
            if pattern.search(lowered):
                return rule, keyword
    return None


def select_next(
    script: DialogScript,
    facts: PatientFacts,
    node: QuestionNode,
    answer: bool | int | str,
) -> str:
    """First route whose condition matches the normalized answer.

    Returns the target node id, or ``end``. `facts` is part of the contract
    for future fact-conditioned routing; current conditions only inspect the
    answer.
    """
    for route in node.routes:
        if route.matches(answer):
            return route.target
    raise NoRouteMatched(f"no route of '{node.id}' matches {answer!r}")


def _advance_clock(session: SessionState, now: int) -> int:
    if now < session.last_event_at:
        raise EngineError(
            f"clock went backwards: {now} < {session.last_event_at}"
        )
    gap = now - session.last_event_at
    session.last_event_at = now
    return gap


def submit_utterance(
    script: DialogScript, session: SessionState, utterance: str, now: int
) -> StepResult:
    """Feed one patient utterance to the session.

    Order of business: interruption scan first (recording a complaint and
    re-asking the pending question), then answer normalization. Unparseable
    answers are rejected and the question is re-asked with its help text
    appended; the session never advances on a rejection.
    """
    if session.current is None:
        raise SessionComplete("session already complete")
    node = script.node(session.current)

    hit = detect_interruption(script, session, utterance)
    if hit is not None:
        rule, keyword = hit
        gap = _advance_clock(session, now)
        session.overhead_ms += gap
        session.facts.append_list(rule.record_fact, utterance, source=rule.id)
        if not session.interruption_stack:
            session.interruption_stack.append((node.id, rule.id))
        session.transcript.append(
            TranscriptEntry(
                kind="interrupted",
                node=node.id,
                prompt_shown=node.prompt,
                utterance=utterance,
                answer=None,
                ts=now,
                rule_id=rule.id,
                keyword=keyword,
            )
        )
        return StepResult(state="awaiting_answer", prompt=build_prompt(node))

    ok, value = normalize_answer(node, utterance)
    if not ok:
        gap = _advance_clock(session, now)
        session.overhead_ms += gap
        session.transcript.append(
            TranscriptEntry(
                kind="rejected",
                node=node.id,
                prompt_shown=node.prompt,
                utterance=utterance,
                answer=None,
                ts=now,
            )
        )
        warning = "repeated_rejections" if session.consecutive_rejections() >= 3 else None
        return StepResult(
            state="rejected",
            prompt=build_prompt(node, with_help=True),
            reject_reason="unparseable",
            warning=warning,
        )

    gap = _advance_clock(session, now)
    session.per_question_latency[node.id] = session.per_question_latency.get(node.id, 0) + gap
    if node.fact_name:
        session.facts.set_scalar(node.fact_name, value, source=node.id, kind=_FACT_KIND[node.kind])
    session.transcript.append(
        TranscriptEntry(
            kind="answer",
            node=node.id,
            prompt_shown=node.prompt,
            utterance=utterance,
            answer=value,
            ts=now,
        )
    )
    if session.interruption_stack and session.interruption_stack[-1][0] == node.id:
        session.interruption_stack.pop()

    target = select_next(script, session.facts, node, value)
    if target == END:
        session.current = None
        return StepResult(state="complete")
    session.current = target
    return StepResult(state="awaiting_answer", prompt=build_prompt(script.node(target)))


def request_help(script: DialogScript, session: SessionState, now: int) -> str:
    """Help text of the pending question; recorded but never advances state."""
    if session.current is None:
        raise SessionComplete("session already complete")
    node = script.node(session.current)
    gap = _advance_clock(session, now)
    session.overhead_ms += gap
    session.transcript.append(
        TranscriptEntry(
            kind="help",
            node=node.id,
            prompt_shown=node.prompt,
            utterance="",
            answer=None,
            ts=now,
        )
    )
    return node.help


# --- event serialization and replay ---------------------------------------------------


def transcript_events(session: SessionState, script: DialogScript) -> list[dict]:
    """Serialize a session to the line-delimited event stream.

    The stream matches what the HTTP service appends to its log, so a
    persisted log replays through `replay` directly.
    """
    events: list[dict] = [
        {
            "kind": "started",
            "ts": session.started_at,
            "payload": {
                "script_name": session.script_name,
                "script_version": session.script_version,
                "anon_ref": session.anon_ref,
            },
        },
        {
            "kind": "prompted",
            "ts": session.started_at,
            "payload": {"node_id": script.start, "text": script.node(script.start).prompt},
        },
    ]
    entries = session.transcript
    for i, entry in enumerate(entries):
        if entry.kind == "answer":
            events.append(
                {
                    "kind": "answered",
                    "ts": entry.ts,
                    "payload": {
                        "node_id": entry.node,
                        "utterance": entry.utterance,
                        "answer": entry.answer,
                    },
                }
            )
            next_node = entries[i + 1].node if i + 1 < len(entries) else session.current
            if next_node is None:
                events.append(
                    {
                        "kind": "completed",
                        "ts": entry.ts,
                        "payload": {"duration_ms": session.duration_ms()},
                    }
                )
            else:
                events.append(
                    {
                        "kind": "prompted",
                        "ts": entry.ts,
                        "payload": {"node_id": next_node, "text": script.node(next_node).prompt},
                    }
                )
        elif entry.kind == "rejected":
            events.append(
                {
                    "kind": "rejected",
                    "ts": entry.ts,
                    "payload": {"node_id": entry.node, "utterance": entry.utterance, "reason": "unparseable"},
                }
            )
            events.append(
                {
                    "kind": "prompted",
                    "ts": entry.ts,
                    "payload": {"node_id": entry.node, "text": script.node(entry.node).prompt},
                }
            )
        elif entry.kind == "interrupted":
            events.append(
                {
                    "kind": "interrupted",
                    "ts": entry.ts,
                    "payload": {
                        "node_id": entry.node,
                        "rule_id": entry.rule_id,
                        "keyword": entry.keyword,
                        "utterance": entry.utterance,
                    },
                }
            )
            events.append(
                {
                    "kind": "prompted",
                    "ts": entry.ts,
                    "payload": {"node_id": entry.node, "text": script.node(entry.node).prompt},
                }
            )
        elif entry.kind == "help":
            events.append({"kind": "help", "ts": entry.ts, "payload": {"node_id": entry.node}})
    return events


def replay(
    script: DialogScript,
    events: Iterable[dict],
    *,
    session_id: str = "local",
    validation=None,
) -> SessionState:
    """Rebuild a session by re-running recorded events through the engine.

    Every recorded step is verified against what the engine produces now;
    any mismatch (different normalized answer, different node, different
    outcome kind) raises :class:`ReplayDivergence` with the event index.
    """
    session: SessionState | None = None
    for index, event in enumerate(events):
        kind = event["kind"]
        ts = event["ts"]
        payload = event.get("payload", {})

        if kind == "started":
            if session is not None:
                raise ReplayDivergence(index, "second 'started' event")
            session, _ = start_session(
                script,
                payload["anon_ref"],
                ts,
                session_id=session_id,
                validation=validation,
            )
            continue
        if session is None:
            raise ReplayDivergence(index, f"'{kind}' before 'started'")

        if kind == "prompted":
            if session.current != payload["node_id"]:
                raise ReplayDivergence(
                    index,
                    f"prompt for '{payload['node_id']}' but session is at '{session.current}'",
                )
        elif kind in ("answered", "rejected", "interrupted"):
            try:
                submit_utterance(script, session, payload["utterance"], ts)
            except SessionComplete:
                raise ReplayDivergence(index, "utterance after completion") from None
            entry = session.transcript[-1]
            expected_kind = {"answered": "answer", "rejected": "rejected", "interrupted": "interrupted"}[kind]
            if entry.kind != expected_kind:
                raise ReplayDivergence(index, f"recorded {kind} but engine produced {entry.kind}")
            if entry.node != payload["node_id"]:
                raise ReplayDivergence(
                    index, f"recorded node '{payload['node_id']}' but engine was at '{entry.node}'"
                )
            if kind == "answered" and entry.answer != payload["answer"]:
                raise ReplayDivergence(
                    index,
                    f"recorded answer {payload['answer']!r} but engine normalized {entry.answer!r}",
                )
            if kind == "interrupted" and entry.rule_id != payload["rule_id"]:
                raise ReplayDivergence(
                    index,
                    f"recorded intercept '{payload['rule_id']}' but engine matched '{entry.rule_id}'",
                )
        elif kind == "help":
            try:
                request_help(script, session, ts)
            except SessionComplete:
                raise ReplayDivergence(index, "help after completion") from None
            if session.transcript[-1].node != payload["node_id"]:
                raise ReplayDivergence(index, "help recorded against a different node")
        elif kind == "completed":
            if not session.is_complete:
                raise ReplayDivergence(index, "recorded completion but session is not complete")
        elif kind == "survey":
            continue  # service-level event; nothing to replay in the engine
        else:
            raise ReplayDivergence(index, f"unknown event kind '{kind}'")

    if session is None:
        raise ReplayDivergence(0, "no 'started' event")
    return session
