"""Shared generator + independent oracle for scoring tests.

The oracle re-walks the transcript summing option weights by label; it never
touches the facts store or the band machinery that compute_activity_score
uses, so the two sides can disagree when either is wrong.
"""

from __future__ import annotations

import random

from mica import engine
from mica.dsl.model import Band, DialogScript, Option, QuestionNode, Route, ScoreRule, Section


def make_scoring_script(rng: random.Random) -> DialogScript:
    """Chain of 1..5 weighted choice questions plus bands partitioning the
    achievable totals at random cut points."""
    n_questions = rng.randint(1, 5)
    nodes = []
    for i in range(n_questions):
        n_options = rng.randint(2, 5)
        options = tuple(
            Option(label=f"opt{j}", weight=rng.randint(0, 12)) for j in range(n_options)
        )
        target = f"q{i + 1}" if i + 1 < n_questions else "end"
        nodes.append(
            QuestionNode(
                id=f"q{i}",
                section="main",
                kind="choice",
                prompt=f"Question {i}?",
                help=f"Pick an option for {i}.",
                options=options,
                fact_name=f"f{i}",
                routes=(Route(cond=None, target=target),),
            )
        )

    amin = sum(min(o.weight for o in node.options) for node in nodes)
    amax = sum(max(o.weight for o in node.options) for node in nodes)
    # cuts strictly below amax so every band keeps at least one total
    cuts = sorted(rng.sample(range(amin, amax), k=min(rng.randint(0, 2), amax - amin))) if amax > amin else []
    bounds = [amin] + [c + 1 for c in cuts] + [amax + 1]
    bands = tuple(
        Band(name=f"band{i}", op="between", a=bounds[i], b=bounds[i + 1] - 1)
        for i in range(len(bounds) - 1)
    )

    return DialogScript(
        name="generated scoring script",
        version=1,
        start="q0",
        sections=(Section(id="main", questions=tuple(nodes)),),
        scores=(ScoreRule(id="gen", question_ids=tuple(n.id for n in nodes), bands=bands),),
    )


def run_random_answers(script: DialogScript, rng: random.Random) -> engine.SessionState:
    session, _ = engine.start_session(script, "a" * 32, 0, session_id="gen")
    ts = 0
    while not session.is_complete:
        node = script.node(session.current)
        ts += 1000
        engine.submit_utterance(script, session, rng.choice(node.options).label, ts)
    return session


def oracle_total(script: DialogScript, session: engine.SessionState, rule: ScoreRule) -> int:
    """Independent recount: walk the transcript, sum weights by label."""
    total = 0
    wanted = set(rule.question_ids)
    for entry in session.transcript:
        if entry.kind != "answer" or entry.node not in wanted:
            continue
        node = script.node(entry.node)
        weights = {o.label: o.weight or 0 for o in node.options}
        total += weights[entry.answer]
    return total


def oracle_band(rule: ScoreRule, total: int, amin: int, amax: int) -> str:
    for band in rule.bands:
        lo, hi = band.bounds(amin, amax)
        if lo <= total <= hi:
            return band.name
    raise AssertionError(f"no band for total {total}")
