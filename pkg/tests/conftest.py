from __future__ import annotations

import itertools
from pathlib import Path

import pytest

import mica
from mica import engine
from mica.dsl import parse_script

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def sample_text() -> str:
    return mica.sample_script_path().read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def sample_script(sample_text):
    return parse_script(sample_text)


class StepClock:
    """Deterministic millisecond clock advancing a fixed step per call."""

    def __init__(self, start: int = 1_000_000, step: int = 2_000):
        self._it = itertools.count(start, step)

    def __call__(self) -> int:
        return next(self._it)


@pytest.fixture
def clock() -> StepClock:
    return StepClock()


def run_interview(script, answers, *, anon_ref="a" * 32, start_ts=1_000, step_ms=2_000, session_id="test"):
    """Drive a session through a list of utterances; returns the final state."""
    session, _ = engine.start_session(script, anon_ref, start_ts, session_id=session_id)
    ts = start_ts
    for utterance in answers:
        ts += step_ms
        engine.submit_utterance(script, session, utterance, ts)
    return session


# Utterances walking the sample cardiology script end to end. The "my knee
# hurts" line lands on the yes/no sport question, so it fires the osteo
# intercept before being re-asked.
SAMPLE_WALK = [
    "45",
    "male",
    "yes",
    "10",
    "no",
    "yes",
    "yes",
    "no",
    "no",
    "no",
    "yes",
    "tightness in the chest when climbing stairs",
    "yes",
    "right knee, when running downhill",
    "my knee hurts when i run",
    "yes",
    "running",
    "once a week",
    "moderate",
    "30 to 60 minutes",
    "knee pain and a fitness check",
]

# A short clean path: all risk questions answered no, no detours.
SAMPLE_ALL_NO = [
    "62",
    "female",
    "no",
    "no",
    "no",
    "no",
    "no",
    "no",
    "no",
    "no",
    "no",
    "never",
    "light",
    "under 15 minutes",
    "general checkup",
]
