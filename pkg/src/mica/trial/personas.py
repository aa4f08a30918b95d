"""Seeded persona simulation through the real interview engine.

A persona gives each question a weighted answer distribution plus latency
ranges. Sessions run through the exact same engine the service uses — no
reimplementation — so any engine behavior change shows up in simulation
snapshots. Everything is deterministic under (spec, n, seed).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from .. import engine
from ..clinical import compile_clinical
from ..dsl.model import DialogScript, END
from ..dsl.validate import validate_script
from ..errors import MicaError


class PersonaSpecIncomplete(MicaError):
    def __init__(self, node_id: str):
        super().__init__(f"persona gives no answers for reachable question '{node_id}'")
        self.node_id = node_id


@dataclass(frozen=True)
class AnswerChoice:
    text: str
    weight: float = 1.0
    latency_ms: tuple[int, int] | None = None  # falls back to the persona-wide default


@dataclass(frozen=True)
class PersonaSpec:
    name: str
    nodes: dict[str, tuple[AnswerChoice, ...]]
    default_latency_ms: tuple[int, int] = (1000, 5000)

    @classmethod
    def from_wire(cls, data: dict) -> "PersonaSpec":
        nodes: dict[str, tuple[AnswerChoice, ...]] = {}
        for node_id, behavior in data.get("nodes", {}).items():
            answers = tuple(
                AnswerChoice(
                    text=a["text"],
                    weight=a.get("weight", 1.0),
                    latency_ms=tuple(a["latency_ms"]) if a.get("latency_ms") else None,
                )
                for a in behavior["answers"]
            )
            nodes[node_id] = answers
        default = tuple(data.get("default_latency_ms", (1000, 5000)))
        return cls(name=data.get("name", "persona"), nodes=nodes, default_latency_ms=default)

    @classmethod
    def from_json(cls, text: str) -> "PersonaSpec":
        return cls.from_wire(json.loads(text))


def constant_persona(script: DialogScript, *, name: str = "constant", answer: str | None = None) -> PersonaSpec:
    """Persona that always gives the same (legal) answer everywhere.

    With answer=None each question gets its first legal answer; otherwise
    the given text is used wherever it is legal and the first legal answer
    elsewhere (handy for an always-"no" persona).
    """
    nodes: dict[str, tuple[AnswerChoice, ...]] = {}
    for node in script.all_nodes():
        choice = node.legal_answers()[0]
        if answer is not None:
            ok, _ = engine.normalize_answer(node, answer)
            if ok:
                choice = answer
        nodes[node.id] = (AnswerChoice(text=choice),)
    return PersonaSpec(name=name, nodes=nodes, default_latency_ms=(1000, 1000))


def reachable_nodes(script: DialogScript) -> set[str]:
    if not script.has_node(script.start):
        return set()
    seen = {script.start}
    stack = [script.start]
    while stack:
        node = script.node(stack.pop())
        for route in node.routes:
            if route.target != END and script.has_node(route.target) and route.target not in seen:
                seen.add(route.target)
                stack.append(route.target)
    return seen


@dataclass(frozen=True)
class SimulationReport:
    script_name: str
    persona_name: str
    n: int
    seed: int
    completed: int
    nodes_reachable: int
    nodes_visited: tuple[str, ...]
    coverage_pct: float
    question_count_min: int
    question_count_mean: float
    question_count_max: int
    duration_ms_min: int
    duration_ms_mean: float
    duration_ms_max: int
    rejections: int
    interruptions: int
    flag_counts: tuple[tuple[str, int], ...]
    durations_ms: tuple[int, ...] = field(repr=False)  # per session, roster order

    def to_wire(self) -> dict:
        return {
            "script_name": self.script_name,
            "persona_name": self.persona_name,
            "n": self.n,
            "seed": self.seed,
            "completed": self.completed,
            "nodes_reachable": self.nodes_reachable,
            "nodes_visited": list(self.nodes_visited),
            "coverage_pct": self.coverage_pct,
            "question_count": {
                "min": self.question_count_min,
                "mean": self.question_count_mean,
                "max": self.question_count_max,
            },
            "duration_ms": {
                "min": self.duration_ms_min,
                "mean": self.duration_ms_mean,
                "max": self.duration_ms_max,
            },
            "rejections": self.rejections,
            "interruptions": self.interruptions,
            "flag_counts": {flag: count for flag, count in self.flag_counts},
            "durations_ms": list(self.durations_ms),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_wire(), indent=2, sort_keys=True)

    def render_text(self) -> str:
        lines = [
            f"simulation: {self.n} persona session(s), seed {self.seed}",
            f"script: {self.script_name}",
            f"persona: {self.persona_name}",
            f"completed: {self.completed}/{self.n}",
            f"node coverage: {len(self.nodes_visited)}/{self.nodes_reachable} ({self.coverage_pct:.1f}%)",
            (
                "questions per session: "
                f"min {self.question_count_min}, mean {self.question_count_mean:.2f}, "
                f"max {self.question_count_max}"
            ),
            (
                "interview duration ms: "
                f"min {self.duration_ms_min}, mean {self.duration_ms_mean:.1f}, "
                f"max {self.duration_ms_max}"
            ),
            f"rejections: {self.rejections}",
            f"interruptions: {self.interruptions}",
            "red flag incidence:",
        ]
        if self.flag_counts:
            for flag, count in self.flag_counts:
                lines.append(f"  {flag}: {count}")
        else:
            lines.append("  none")
        return "\n".join(lines) + "\n"


_MAX_REJECTIONS_PER_NODE = 5
_MAX_INTERRUPTIONS_PER_NODE = 3


def simulate_personas(script: DialogScript, spec: PersonaSpec, n: int, seed: int) -> SimulationReport:
    """Run n seeded end-to-end interviews and summarize them.

    Raises :class:`PersonaSpecIncomplete` when a reachable question has no
    answer distribution. A persona that keeps producing rejected or
    interrupting utterances on one question falls back to a legal answer
    after a few tries so every session terminates.
    """
    if n < 1:
        raise ValueError("n must be positive")
    report = validate_script(script)
    if not report.ok:
        raise engine.InvalidScript(report.error_codes())
    reachable = reachable_nodes(script)
    for node_id in sorted(reachable):
        if node_id not in spec.nodes or not spec.nodes[node_id]:
            raise PersonaSpecIncomplete(node_id)

    visited: set[str] = set()
    question_counts: list[int] = []
    durations: list[int] = []
    rejections = 0
    interruptions = 0
    completed = 0
    flag_counts: dict[str, int] = {}

    for i in range(n):
        rng = random.Random(f"{seed}:{i}")
        session, _ = engine.start_session(
            script, f"sim{i:05x}" + "0" * 23, 0, session_id=f"sim{i:05d}", validation=report
        )
        now = 0
        rejected_here: dict[str, int] = {}
        interrupted_here: dict[str, int] = {}
        step_budget = (len(script.all_nodes()) + 1) * (
            _MAX_REJECTIONS_PER_NODE + _MAX_INTERRUPTIONS_PER_NODE + 2
        )
        while not session.is_complete:
            step_budget -= 1
            if step_budget < 0:
                raise MicaError("simulation did not terminate (engine progress bug?)")
            node_id = session.current
            assert node_id is not None
            choices = spec.nodes[node_id]
            if (
                rejected_here.get(node_id, 0) >= _MAX_REJECTIONS_PER_NODE
                or interrupted_here.get(node_id, 0) >= _MAX_INTERRUPTIONS_PER_NODE
            ):
                text = script.node(node_id).legal_answers()[0]
                latency = spec.default_latency_ms
            else:
                choice = rng.choices(choices, weights=[c.weight for c in choices])[0]
                text = choice.text
                latency = choice.latency_ms or spec.default_latency_ms
            now += rng.randint(latency[0], latency[1])
            engine.submit_utterance(script, session, text, now)
            entry = session.transcript[-1]
            if entry.kind == "rejected":
                rejected_here[node_id] = rejected_here.get(node_id, 0) + 1
            elif entry.kind == "interrupted":
                interrupted_here[node_id] = interrupted_here.get(node_id, 0) + 1

        completed += 1
        answered = session.answered_nodes()
        visited.update(answered)
        question_counts.append(len(answered))
        durations.append(session.duration_ms())
        rejections += session.rejection_count()
        interruptions += session.interruption_count()
        clinical = compile_clinical(script, session, strict=False)
        for flag in clinical.red_flags:
            flag_counts[flag.id] = flag_counts.get(flag.id, 0) + 1

    coverage = 100.0 * len(visited) / len(reachable) if reachable else 0.0
    return SimulationReport(
        script_name=script.name,
        persona_name=spec.name,
        n=n,
        seed=seed,
        completed=completed,
        nodes_reachable=len(reachable),
        nodes_visited=tuple(sorted(visited)),
        coverage_pct=coverage,
        question_count_min=min(question_counts),
        question_count_mean=sum(question_counts) / len(question_counts),
        question_count_max=max(question_counts),
        duration_ms_min=min(durations),
        duration_ms_mean=sum(durations) / len(durations),
        duration_ms_max=max(durations),
        rejections=rejections,
        interruptions=interruptions,
        flag_counts=tuple(sorted(flag_counts.items())),
        durations_ms=tuple(durations),
    )
