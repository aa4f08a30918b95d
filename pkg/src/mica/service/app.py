"""HTTP service hosting scripts and interview sessions.

Persistence is event-sourced: the JSONL log is the source of truth and the
in-memory sessions are a cache rebuilt by engine replay on startup.
Requests to different sessions run in parallel; requests to one session are
serialized by a per-session lock. Raw patient ids live only inside the
request that carries them — everything persisted or served uses the
anonymized reference.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import engine
from ..clinical import MotivationConfig, RiskConfig, compile_clinical
from ..dsl import parse_script, validate_script
from ..dsl.model import DialogScript, ValidationReport
from ..errors import MicaError, ScriptSyntaxError
from ..summary import anonymize_patient, generate_summary, summary_to_wire
from .store import EventStore

DOCTOR_DIMENSIONS = frozenset(
    {
        "service_quality",
        "consultation_quality",
        "data_collection_quality",
        "technology_confidence",
        "time_saving_feeling",
    }
)
PATIENT_DIMENSIONS = frozenset({"felt_listened", "felt_understood", "treatment_personalized"})


def default_clock() -> int:
    return time.time_ns() // 1_000_000


class ApiError(MicaError):
    def __init__(self, status: int, code: str):
        super().__init__(code)
        self.status = status
        self.code = code


@dataclass
class ServiceConfig:
    scripts_dir: Path
    store_path: Path
    secret: bytes
    clock: Callable[[], int] = default_clock
    durable: bool = True
    verify_replay: bool = False  # test builds: re-replay the log after every mutation

    def __post_init__(self) -> None:
        if len(self.secret) < 16:
            raise ValueError("anonymization secret must be at least 16 bytes")


@dataclass
class _LoadedScript:
    script_id: str
    script: DialogScript
    report: ValidationReport


@dataclass
class _Session:
    script_id: str
    state: engine.SessionState
    lock: threading.RLock = field(default_factory=threading.RLock)


class ServiceRuntime:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self.scripts: dict[str, _LoadedScript] = {}
        self.sessions: dict[str, _Session] = {}
        self.surveys: dict[tuple[str, str], dict] = {}
        self._registry_lock = threading.Lock()
        self._load_scripts()
        self.store = EventStore(config.store_path, durable=config.durable)
        self._rebuild()

    # --- startup ---

    def _load_scripts(self) -> None:
        for path in sorted(Path(self.config.scripts_dir).glob("*.mica")):
            try:
                script = parse_script(path.read_text(encoding="utf-8"))
            except ScriptSyntaxError:
                continue  # unparseable files are simply not served
            self.scripts[path.stem] = _LoadedScript(
                script_id=path.stem, script=script, report=validate_script(script)
            )

    def _script_by_name(self, name: str, version: int) -> _LoadedScript | None:
        for loaded in self.scripts.values():
            if loaded.script.name == name and loaded.script.version == version:
                return loaded
        return None

    def _rebuild(self) -> None:
        by_session: dict[str, list[dict]] = {}
        for record in self.store.read_all():
            by_session.setdefault(record["session_id"], []).append(record)
        for session_id, records in by_session.items():
            started = next((r for r in records if r["kind"] == "started"), None)
            if started is None:
                continue
            loaded = self.scripts.get(started["payload"].get("script_id", ""))
            if loaded is None:
                loaded = self._script_by_name(
                    started["payload"]["script_name"], started["payload"]["script_version"]
                )
            if loaded is None or not loaded.report.ok:
                continue
            state = engine.replay(
                loaded.script, records, session_id=session_id, validation=loaded.report
            )
            self.sessions[session_id] = _Session(script_id=loaded.script_id, state=state)
            for record in records:
                if record["kind"] == "survey":
                    payload = record["payload"]
                    self.surveys[(session_id, payload["role"])] = payload

    # --- helpers ---

    def session_or_404(self, session_id: str) -> _Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise ApiError(404, "unknown_session")
        return session

    def _assert_replay_matches(self, session: _Session) -> None:
        loaded = self.scripts[session.script_id]
        rebuilt = engine.replay(
            loaded.script,
            self.store.session_events(session.state.session_id),
            session_id=session.state.session_id,
            validation=loaded.report,
        )
        if rebuilt != session.state:
            raise AssertionError(
                f"event log diverged from live state for session {session.state.session_id}"
            )

    # --- operations ---

    def create_session(self, script_id: str, patient_id: str) -> dict:
        loaded = self.scripts.get(script_id)
        if loaded is None:
            raise ApiError(404, "unknown_script")
        if not loaded.report.ok:
            raise ApiError(422, "invalid_script")
        if not patient_id:
            raise ApiError(422, "empty_patient_id")
        anon = anonymize_patient(patient_id, self.config.secret)
        session_id = uuid.uuid4().hex
        now = self.config.clock()
        state, prompt = engine.start_session(
            loaded.script, anon.token, now, session_id=session_id, validation=loaded.report
        )
        session = _Session(script_id=script_id, state=state)
        with self._registry_lock:
            self.sessions[session_id] = session
        self.store.append(
            session_id,
            "started",
            now,
            {
                "script_id": script_id,
                "script_name": loaded.script.name,
                "script_version": loaded.script.version,
                "anon_ref": anon.token,
            },
        )
        self.store.append(session_id, "prompted", now, {"node_id": prompt.node_id, "text": prompt.text})
        if self.config.verify_replay:
            self._assert_replay_matches(session)
        return {"session_id": session_id, "anon_ref": anon.token, "prompt": _prompt_wire(prompt)}

    def post_answer(self, session_id: str, utterance: str) -> dict:
        session = self.session_or_404(session_id)
        loaded = self.scripts[session.script_id]
        with session.lock:
            if session.state.is_complete:
                raise ApiError(409, "session_complete")
            now = self.config.clock()
            result = engine.submit_utterance(loaded.script, session.state, utterance, now)
            entry = session.state.transcript[-1]
            if entry.kind == "answer":
                self.store.append(
                    session_id,
                    "answered",
                    now,
                    {"node_id": entry.node, "utterance": entry.utterance, "answer": entry.answer},
                )
            elif entry.kind == "rejected":
                self.store.append(
                    session_id,
                    "rejected",
                    now,
                    {"node_id": entry.node, "utterance": entry.utterance, "reason": "unparseable"},
                )
            else:
                self.store.append(
                    session_id,
                    "interrupted",
                    now,
                    {
                        "node_id": entry.node,
                        "rule_id": entry.rule_id,
                        "keyword": entry.keyword,
                        "utterance": entry.utterance,
                    },
                )
            if result.state == "complete":
                self.store.append(
                    session_id, "completed", now, {"duration_ms": session.state.duration_ms()}
                )
            else:
                assert result.prompt is not None
                self.store.append(
                    session_id,
                    "prompted",
                    now,
                    {"node_id": result.prompt.node_id, "text": result.prompt.text},
                )
            if self.config.verify_replay:
                self._assert_replay_matches(session)

            body: dict[str, Any] = {"state": result.state}
            if result.prompt is not None:
                body["prompt"] = _prompt_wire(result.prompt)
            if result.reject_reason is not None:
                body["reject_reason"] = result.reject_reason
            if result.warning is not None:
                body["warning"] = result.warning
            return body

    def get_help(self, session_id: str) -> dict:
        session = self.session_or_404(session_id)
        loaded = self.scripts[session.script_id]
        with session.lock:
            if session.state.is_complete:
                raise ApiError(409, "session_complete")
            now = self.config.clock()
            text = engine.request_help(loaded.script, session.state, now)
            entry = session.state.transcript[-1]
            self.store.append(session_id, "help", now, {"node_id": entry.node})
            if self.config.verify_replay:
                self._assert_replay_matches(session)
            return {"help": text}

    def get_summary(self, session_id: str, role: str) -> dict:
        if role != "doctor":
            raise ApiError(403, "role_forbidden")
        session = self.session_or_404(session_id)
        loaded = self.scripts[session.script_id]
        with session.lock:
            if not session.state.is_complete:
                raise ApiError(409, "session_incomplete")
            clinical = compile_clinical(
                loaded.script,
                session.state,
                risk_config=RiskConfig.from_script(loaded.script),
                motivation_config=(
                    MotivationConfig.for_script(loaded.script) if loaded.script.scores else None
                ),
                strict=False,
            )
            doc = generate_summary(
                loaded.script, session.state, clinical, generated_at=self.config.clock()
            )
            return summary_to_wire(doc)

    def submit_survey(self, body: dict) -> dict:
        session_id = body.get("session_id")
        if not isinstance(session_id, str) or session_id not in self.sessions:
            raise ApiError(404, "unknown_session")
        role = body.get("role")
        if role not in ("doctor", "patient"):
            raise ApiError(422, "bad_role")
        scores = body.get("scores")
        if not isinstance(scores, dict):
            raise ApiError(422, "bad_dimension_set")
        expected = DOCTOR_DIMENSIONS if role == "doctor" else PATIENT_DIMENSIONS
        if set(scores.keys()) != set(expected):
            raise ApiError(422, "bad_dimension_set")
        for value in scores.values():
            if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= 9:
                raise ApiError(422, "score_out_of_range")
        respondent_age = body.get("respondent_age") if role == "patient" else None
        if respondent_age is not None and (
            not isinstance(respondent_age, int) or isinstance(respondent_age, bool) or respondent_age < 0
        ):
            raise ApiError(422, "bad_respondent_age")

        session = self.session_or_404(session_id)
        with session.lock:
            now = self.config.clock()
            payload = {
                "role": role,
                "scores": dict(sorted(scores.items())),
                "respondent_age": respondent_age,
                "submitted_at": now,
                "supersedes_previous": (session_id, role) in self.surveys,
            }
            self.surveys[(session_id, role)] = payload
            self.store.append(session_id, "survey", now, payload)
        return {"accepted": True}

    def metrics(self) -> dict:
        started = len(self.sessions)
        completed = [s for s in self.sessions.values() if s.state.is_complete]
        durations = [s.state.duration_ms() for s in completed]
        rejections = sum(s.state.rejection_count() for s in self.sessions.values())
        interruptions = sum(s.state.interruption_count() for s in self.sessions.values())
        by_role = {"doctor": 0, "patient": 0}
        for (_, role) in self.surveys:
            by_role[role] += 1
        return {
            "sessions_started": started,
            "sessions_completed": len(completed),
            "mean_interview_duration_ms": (sum(durations) / len(durations)) if durations else 0,
            "rejections": rejections,
            "interruptions": interruptions,
            "surveys_by_role": by_role,
        }

    def close(self) -> None:
        self.store.close()


def _prompt_wire(prompt: engine.Prompt) -> dict:
    body: dict[str, Any] = {"node_id": prompt.node_id, "text": prompt.text, "kind": prompt.kind}
    if prompt.options:
        body["options"] = list(prompt.options)
    if prompt.help is not None:
        body["help"] = prompt.help
    return body


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="mica interview service", version="0.1.0")
    runtime = ServiceRuntime(config)
    app.state.runtime = runtime

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError) -> JSONResponse:
        return JSONResponse(status_code=exc.status, content={"error": exc.code})

    @app.post("/v1/sessions", status_code=201)
    def create_session(body: dict) -> dict:
        script_id = body.get("script_id")
        patient_id = body.get("patient_id")
        if not isinstance(script_id, str) or not isinstance(patient_id, str):
            raise ApiError(422, "bad_request")
        return runtime.create_session(script_id, patient_id)

    @app.post("/v1/sessions/{session_id}/answer")
    def post_answer(session_id: str, body: dict) -> dict:
        utterance = body.get("utterance")
        if not isinstance(utterance, str):
            raise ApiError(422, "bad_request")
        return runtime.post_answer(session_id, utterance)

    @app.post("/v1/sessions/{session_id}/help")
    def post_help(session_id: str, body: dict | None = None) -> dict:
        return runtime.get_help(session_id)

    @app.get("/v1/sessions/{session_id}/summary")
    def get_summary(session_id: str, role: str = "") -> dict:
        return runtime.get_summary(session_id, role)

    @app.post("/v1/surveys")
    def post_survey(body: dict) -> dict:
        return runtime.submit_survey(body)

    @app.get("/v1/metrics")
    def get_metrics() -> dict:
        return runtime.metrics()

    return app
