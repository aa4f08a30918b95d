"""Append-only JSONL event log.

One JSON object per line: {seq, session_id, ts, kind, payload}. seq is
gapless from 1 per session. A single appender writes with flush+fsync
before any response goes out, so a restarted service can rebuild every
session by replay.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path


class EventStore:
    def __init__(self, path: str | Path, *, durable: bool = True):
        self.path = Path(path)
        self.durable = durable
        self._lock = threading.Lock()
        self._seq: dict[str, int] = {}
        self.path.parent.mkdir(parents=True, exist_ok=True)
        for record in self.read_all():
            self._seq[record["session_id"]] = record["seq"]
        self._fh = open(self.path, "a", encoding="utf-8")

    def append(self, session_id: str, kind: str, ts: int, payload: dict) -> dict:
        with self._lock:
            seq = self._seq.get(session_id, 0) + 1
            self._seq[session_id] = seq
            record = {
                "seq": seq,
                "session_id": session_id,
                "ts": ts,
                "kind": kind,
                "payload": payload,
            }
            self._fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
            self._fh.flush()
            if self.durable:
                os.fsync(self._fh.fileno())
            return record

    def read_all(self) -> list[dict]:
        if not self.path.exists():
            return []
        records = []
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(json.loads(line))
        return records

    def session_events(self, session_id: str) -> list[dict]:
        return [r for r in self.read_all() if r["session_id"] == session_id]

    def close(self) -> None:
        self._fh.close()
