"""AST for the .mica dialog-script language.

All nodes are frozen dataclasses so a parsed script is immutable and can be
shared freely across concurrent interview sessions. Equality is structural,
which is what the parse/render round-trip tests rely on.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Union

END = "end"

KINDS = ("yesno", "choice", "numeric", "text")


# --- boolean expressions (flags and profiles) ---------------------------------

@dataclass(frozen=True)
class FactAtom:
    key: str


@dataclass(frozen=True)
class RiskCountAtom:
    min_count: int


@dataclass(frozen=True)
class ScoreBandAtom:
    score_id: str
    band: str


@dataclass(frozen=True)
class AgeAtom:
    op: str  # "<=" or ">="
    bound: int


@dataclass(frozen=True)
class Not:
    operand: "Expr"


@dataclass(frozen=True)
class And:
    terms: tuple["Expr", ...]


@dataclass(frozen=True)
class Or:
    terms: tuple["Expr", ...]


Expr = Union[FactAtom, RiskCountAtom, ScoreBandAtom, AgeAtom, Not, And, Or]


def fact_keys_in(expr: Expr) -> set[str]:
    """All fact keys referenced anywhere in an expression."""
    if isinstance(expr, FactAtom):
        return {expr.key}
    if isinstance(expr, Not):
        return fact_keys_in(expr.operand)
    if isinstance(expr, (And, Or)):
        keys: set[str] = set()
        for term in expr.terms:
            keys |= fact_keys_in(term)
        return keys
    return set()


def atoms_in(expr: Expr) -> list[Expr]:
    if isinstance(expr, Not):
        return atoms_in(expr.operand)
    if isinstance(expr, (And, Or)):
        out: list[Expr] = []
        for term in expr.terms:
            out.extend(atoms_in(term))
        return out
    return [expr]


# --- routing -------------------------------------------------------------------

@dataclass(frozen=True)
class YesNoCond:
    value: bool


@dataclass(frozen=True)
class LabelCond:
    label: str


@dataclass(frozen=True)
class RangeCond:
    lo: int
    hi: int


Cond = Union[YesNoCond, LabelCond, RangeCond]


@dataclass(frozen=True)
class Route:
    cond: Cond | None  # None is the unconditional default route
    target: str  # node id or END

    def matches(self, answer: bool | int | str) -> bool:
        if self.cond is None:
            return True
        if isinstance(self.cond, YesNoCond):
            return isinstance(answer, bool) and answer == self.cond.value
        if isinstance(self.cond, LabelCond):
            return isinstance(answer, str) and answer.lower() == self.cond.label.lower()
        if isinstance(self.cond, RangeCond):
            return (
                isinstance(answer, int)
                and not isinstance(answer, bool)
                and self.cond.lo <= answer <= self.cond.hi
            )
        return False


# --- questions and sections ----------------------------------------------------

@dataclass(frozen=True)
class Option:
    label: str
    weight: int | None = None


@dataclass(frozen=True)
class QuestionNode:
    id: str
    section: str
    kind: str  # one of KINDS
    prompt: str
    help: str
    options: tuple[Option, ...] = ()
    numeric_range: tuple[int, int] | None = None
    fact_name: str | None = None
    risk_factor: bool = False
    routes: tuple[Route, ...] = ()

    def option_labels(self) -> tuple[str, ...]:
        return tuple(o.label for o in self.options)

    def legal_answers(self) -> tuple[str, ...]:
        """Representative textual answers covering the node's answer domain."""
        if self.kind == "yesno":
            return ("yes", "no")
        if self.kind == "choice":
            return self.option_labels()
        if self.kind == "numeric":
            lo, hi = self.numeric_range or (0, 0)
            return (str(lo),) if lo == hi else (str(lo), str(hi))
        return ("sample text",)


@dataclass(frozen=True)
class Section:
    id: str
    questions: tuple[QuestionNode, ...]


# --- scoring, flags, profiles, intercepts ---------------------------------------

@dataclass(frozen=True)
class Band:
    name: str
    op: str  # "lt", "between" or "gt"
    a: int
    b: int | None = None  # only for "between"

    def bounds(self, achievable_lo: int, achievable_hi: int) -> tuple[int, int]:
        """Concrete closed interval the band covers, clipped to the achievable totals."""
        if self.op == "lt":
            return (achievable_lo, self.a - 1)
        if self.op == "gt":
            return (self.a + 1, achievable_hi)
        assert self.b is not None
        return (self.a, self.b)

    def contains(self, total: int, achievable_lo: int, achievable_hi: int) -> bool:
        lo, hi = self.bounds(achievable_lo, achievable_hi)
        return lo <= total <= hi


@dataclass(frozen=True)
class ScoreRule:
    id: str
    question_ids: tuple[str, ...]
    bands: tuple[Band, ...]


@dataclass(frozen=True)
class FlagRule:
    id: str
    expr: Expr


@dataclass(frozen=True)
class ProfileRule:
    id: str
    expr: Expr


@dataclass(frozen=True)
class InterceptRule:
    id: str
    keywords: tuple[str, ...]
    record_fact: str


# --- the script ------------------------------------------------------------------

@dataclass(frozen=True)
class DialogScript:
    name: str
    version: int
    start: str
    sections: tuple[Section, ...] = ()
    scores: tuple[ScoreRule, ...] = ()
    flags: tuple[FlagRule, ...] = ()
    profiles: tuple[ProfileRule, ...] = ()
    intercepts: tuple[InterceptRule, ...] = ()

    @cached_property
    def _node_index(self) -> dict[str, QuestionNode]:
        index: dict[str, QuestionNode] = {}
        for section in self.sections:
            for question in section.questions:
                # on a duplicate id the first definition wins; the validator reports it
                index.setdefault(question.id, question)
        return index

    def node(self, node_id: str) -> QuestionNode:
        return self._node_index[node_id]

    def has_node(self, node_id: str) -> bool:
        return node_id in self._node_index

    def all_nodes(self) -> tuple[QuestionNode, ...]:
        return tuple(q for s in self.sections for q in s.questions)

    def producible_fact_keys(self) -> set[str]:
        """Fact keys some question or intercept can write."""
        keys = {q.fact_name for q in self.all_nodes() if q.fact_name}
        keys |= {i.record_fact for i in self.intercepts}
        return keys

    def risk_fact_keys(self) -> tuple[str, ...]:
        """Fact keys of risk-factor-tagged questions, in script order."""
        return tuple(
            q.fact_name for q in self.all_nodes() if q.risk_factor and q.fact_name
        )

    def score_rule(self, score_id: str) -> ScoreRule | None:
        for rule in self.scores:
            if rule.id == score_id:
                return rule
        return None


# --- validation report ------------------------------------------------------------

@dataclass(frozen=True)
class Issue:
    code: str
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} at {self.location}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[Issue, ...] = ()
    warnings: tuple[Issue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors

    def error_codes(self) -> tuple[str, ...]:
        return tuple(i.code for i in self.errors)
