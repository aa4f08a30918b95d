"""Duration statistics with configurable outlier trimming."""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Sequence

from ..errors import MicaError


class EmptyInput(MicaError):
    pass


@dataclass(frozen=True)
class TrimRule:
    """Either 'exceptional' values above a median multiple, or a fixed cap."""

    kind: str  # "median_multiple" | "absolute_cap"
    factor: float = 3.0
    cap_ms: int | None = None

    def describe(self) -> str:
        if self.kind == "median_multiple":
            return f"exclude values > {self.factor:g} x median"
        return f"exclude values > {self.cap_ms} ms"

    def threshold(self, values: Sequence[int]) -> float:
        if self.kind == "median_multiple":
            return self.factor * statistics.median(values)
        assert self.cap_ms is not None
        return float(self.cap_ms)


DEFAULT_TRIM = TrimRule(kind="median_multiple", factor=3.0)


def parse_trim_rule(text: str) -> TrimRule:
    """'3xmedian' or 'cap:<milliseconds>'."""
    text = text.strip().lower()
    if text.endswith("xmedian"):
        return TrimRule(kind="median_multiple", factor=float(text[: -len("xmedian")]))
    if text.startswith("cap:"):
        return TrimRule(kind="absolute_cap", cap_ms=int(text[len("cap:"):]))
    raise ValueError(f"unknown trim rule '{text}' (use '3xmedian' or 'cap:<ms>')")


@dataclass(frozen=True)
class DurationStats:
    n_used: int
    n_trimmed: int
    mean_ms: float | None
    min_ms: int | None
    max_ms: int | None
    trim_rule: str

    def to_wire(self) -> dict:
        return {
            "n_used": self.n_used,
            "n_trimmed": self.n_trimmed,
            "mean_ms": self.mean_ms,
            "min_ms": self.min_ms,
            "max_ms": self.max_ms,
            "trim_rule": self.trim_rule,
        }


def duration_stats(durations: Sequence[int], trim_rule: TrimRule = DEFAULT_TRIM) -> DurationStats:
    """Trim, then mean/min/max over what remains.

    Trimming only removes values, never alters them; the applied rule is
    recorded in the result for auditability. The mean is the exact integer
    sum divided once at the end.
    """
    if not durations:
        raise EmptyInput("no durations to summarize")
    if any(d < 0 for d in durations):
        raise ValueError("durations must be non-negative milliseconds")

    threshold = trim_rule.threshold(durations)
    kept = [d for d in durations if d <= threshold]
    n_trimmed = len(durations) - len(kept)
    if not kept:
        return DurationStats(
            n_used=0,
            n_trimmed=n_trimmed,
            mean_ms=None,
            min_ms=None,
            max_ms=None,
            trim_rule=trim_rule.describe(),
        )
    return DurationStats(
        n_used=len(kept),
        n_trimmed=n_trimmed,
        mean_ms=sum(kept) / len(kept),
        min_ms=min(kept),
        max_ms=max(kept),
        trim_rule=trim_rule.describe(),
    )
