"""Clinical artifacts derived from a completed interview.

Activity score, risk-factor count, red flags, profile, motivation level and
the motif list are all pure functions of the collected facts plus script
configuration. Nothing here diagnoses or recommends treatment; these are
prioritization aids for the doctor.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dsl.model import (
    AgeAtom,
    And,
    DialogScript,
    Expr,
    FactAtom,
    FlagRule,
    Not,
    Or,
    ProfileRule,
    RiskCountAtom,
    ScoreBandAtom,
    ScoreRule,
)
from .dsl.render import render_expr
from .engine import PatientFacts, SessionState
from .errors import MicaError

UNCLASSIFIED = "unclassified"

MOTIVATION_LEVELS = ("low", "medium", "high")


class ClinicalError(MicaError):
    pass


class MissingAnswers(ClinicalError):
    def __init__(self, score_id: str, missing: tuple[str, ...]):
        super().__init__(f"score '{score_id}' missing answers for: {', '.join(missing)}")
        self.score_id = score_id
        self.missing = missing


class MissingDemographics(ClinicalError):
    pass


class UnknownScore(ClinicalError):
    pass


# --- result types --------------------------------------------------------------------


@dataclass(frozen=True)
class ActivityScore:
    score_id: str
    total: int
    band: str


@dataclass(frozen=True)
class RiskAssessment:
    count: int
    contributing: tuple[str, ...]
    age_sex_contribution: int  # 0 or 1


@dataclass(frozen=True)
class RedFlag:
    id: str
    triggered_by: str  # rule expression rendered as text


@dataclass(frozen=True)
class Profile:
    id: str


@dataclass(frozen=True)
class MotivationLevel:
    level: str  # low | medium | high
    source_score_id: str


@dataclass(frozen=True)
class Motif:
    category: str
    text: str
    source: str  # node id or intercept rule id of the first capture
    count: int = 1


# --- configuration -------------------------------------------------------------------


@dataclass(frozen=True)
class RiskConfig:
    """Which facts count as risk factors, plus the age/sex contribution rule.

    The default thresholds are sample configuration, not clinical guidance;
    real deployments set their own.
    """

    risk_fact_keys: tuple[str, ...]
    male_age_threshold: int = 50
    female_age_threshold: int = 60
    age_key: str = "age"
    sex_key: str = "sex"

    @classmethod
    def from_script(
        cls, script: DialogScript, *, male_age_threshold: int = 50, female_age_threshold: int = 60
    ) -> "RiskConfig":
        return cls(
            risk_fact_keys=script.risk_fact_keys(),
            male_age_threshold=male_age_threshold,
            female_age_threshold=female_age_threshold,
        )


@dataclass(frozen=True)
class MotivationConfig:
    """Maps a designated score's band to a motivation level.

    The script language deliberately has no syntax for this; deployments
    configure it next to the script. `for_script` builds the identity
    mapping over the first score rule, which fits bands already named
    low/medium/high.
    """

    source_score_id: str
    band_to_level: tuple[tuple[str, str], ...]  # (band, level) pairs

    @classmethod
    def for_script(cls, script: DialogScript) -> "MotivationConfig":
        if not script.scores:
            raise UnknownScore("script declares no score rules")
        rule = script.scores[0]
        return cls(
            source_score_id=rule.id,
            band_to_level=tuple((band.name, band.name) for band in rule.bands),
        )

    def level_for(self, band: str) -> str | None:
        for b, level in self.band_to_level:
            if b == band:
                return level
        return None

    def validate(self, script: DialogScript) -> list[str]:
        """Configuration problems, reported at load time rather than mid-interview."""
        problems: list[str] = []
        rule = script.score_rule(self.source_score_id)
        if rule is None:
            return [f"motivation source score '{self.source_score_id}' does not exist"]
        mapped = {b for b, _ in self.band_to_level}
        for band in rule.bands:
            if band.name not in mapped:
                problems.append(f"motivation table has no entry for band '{band.name}'")
        for band, level in self.band_to_level:
            if level not in MOTIVATION_LEVELS:
                problems.append(f"band '{band}' maps to unknown level '{level}'")
        return problems


# --- expression evaluation -------------------------------------------------------------


@dataclass(frozen=True)
class EvalContext:
    facts: PatientFacts
    riskcount: int = 0
    score_bands: tuple[tuple[str, str], ...] = ()  # (score_id, band)

    def band_of(self, score_id: str) -> str | None:
        for sid, band in self.score_bands:
            if sid == score_id:
                return band
        return None

    @property
    def age(self) -> int | None:
        value = self.facts.scalars.get("age")
        return value if isinstance(value, int) and not isinstance(value, bool) else None


def eval_expr(expr: Expr, ctx: EvalContext) -> bool:
    """Evaluate a flag/profile expression over final facts.

    A missing fact is simply false — a flag that requires the presence of a
    risk never fires on silence, while `not fact(k)` deliberately fires when
    k was never collected (follow-up-style flags want exactly that).
    Likewise a missing age makes both age comparisons false.
    """
    if isinstance(expr, FactAtom):
        return ctx.facts.truthy(expr.key)
    if isinstance(expr, RiskCountAtom):
        return ctx.riskcount >= expr.min_count
    if isinstance(expr, ScoreBandAtom):
        return ctx.band_of(expr.score_id) == expr.band
    if isinstance(expr, AgeAtom):
        age = ctx.age
        if age is None:
            return False
        return age <= expr.bound if expr.op == "<=" else age >= expr.bound
    if isinstance(expr, Not):
        return not eval_expr(expr.operand, ctx)
    if isinstance(expr, And):
        return all(eval_expr(t, ctx) for t in expr.terms)
    if isinstance(expr, Or):
        return any(eval_expr(t, ctx) for t in expr.terms)
    raise TypeError(f"unknown expression {expr!r}")


# --- the six operations ------------------------------------------------------------------


def compute_activity_score(facts: PatientFacts, rule: ScoreRule, script: DialogScript) -> ActivityScore:
    """Exact integer sum of the chosen option weights, plus band lookup."""
    total = 0
    missing: list[str] = []
    for qid in rule.question_ids:
        node = script.node(qid)
        answer = facts.scalars.get(node.fact_name or "")
        if answer is None:
            missing.append(qid)
            continue
        for opt in node.options:
            if opt.label == answer:
                total += opt.weight or 0
                break
        else:
            missing.append(qid)
    if missing:
        raise MissingAnswers(rule.id, tuple(missing))

    achievable_lo = sum(min(o.weight or 0 for o in script.node(q).options) for q in rule.question_ids)
    achievable_hi = sum(max(o.weight or 0 for o in script.node(q).options) for q in rule.question_ids)
    for band in rule.bands:
        if band.contains(total, achievable_lo, achievable_hi):
            return ActivityScore(score_id=rule.id, total=total, band=band.name)
    raise ClinicalError(f"score '{rule.id}': no band contains total {total}")


def count_risk_factors(facts: PatientFacts, risk_config: RiskConfig) -> RiskAssessment:
    """True risk-factor facts plus the age/sex contribution.

    Age and sex must have been collected; sex contributes 1 when the
    patient's age reaches the threshold configured for it.
    """
    age = facts.scalars.get(risk_config.age_key)
    sex = facts.scalars.get(risk_config.sex_key)
    if age is None or sex is None:
        raise MissingDemographics("age and sex facts are required to count risk factors")

    contributing = tuple(k for k in risk_config.risk_fact_keys if facts.scalars.get(k) is True)
    sex_label = str(sex).lower()
    threshold = (
        risk_config.male_age_threshold if sex_label == "male" else risk_config.female_age_threshold
    )
    age_sex = 1 if isinstance(age, int) and age >= threshold else 0
    return RiskAssessment(
        count=len(contributing) + age_sex,
        contributing=contributing,
        age_sex_contribution=age_sex,
    )


def evaluate_red_flags(
    facts: PatientFacts, riskcount: int, flags: tuple[FlagRule, ...] | list[FlagRule]
) -> list[RedFlag]:
    """Every flag whose rule evaluates true, in script order."""
    ctx = EvalContext(facts=facts, riskcount=riskcount)
    return [
        RedFlag(id=rule.id, triggered_by=render_expr(rule.expr))
        for rule in flags
        if eval_expr(rule.expr, ctx)
    ]


def classify_profile(
    facts: PatientFacts,
    scores: list[ActivityScore] | tuple[ActivityScore, ...],
    riskcount: int,
    profiles: tuple[ProfileRule, ...] | list[ProfileRule],
) -> Profile:
    """First matching profile rule wins; `unclassified` when none match."""
    ctx = EvalContext(
        facts=facts,
        riskcount=riskcount,
        score_bands=tuple((s.score_id, s.band) for s in scores),
    )
    for rule in profiles:
        if eval_expr(rule.expr, ctx):
            return Profile(id=rule.id)
    return Profile(id=UNCLASSIFIED)


def motivation_level(
    scores: list[ActivityScore] | tuple[ActivityScore, ...], motivation_config: MotivationConfig
) -> MotivationLevel:
    """Table lookup from the designated score's band."""
    for score in scores:
        if score.score_id == motivation_config.source_score_id:
            level = motivation_config.level_for(score.band)
            if level is None or level not in MOTIVATION_LEVELS:
                raise UnknownScore(
                    f"motivation table has no usable entry for band '{score.band}' "
                    f"(validate the configuration at load time)"
                )
            return MotivationLevel(level=level, source_score_id=score.score_id)
    raise UnknownScore(f"no computed score named '{motivation_config.source_score_id}'")


def extract_motifs(facts: PatientFacts) -> tuple[Motif, ...]:
    """Complaint captures, in capture order, with exact duplicates collapsed.

    Includes every list-fact append (interrupt captures) and every text
    answer that was stored under a fact key.
    """
    ordered: list[tuple[str, str, str]] = []  # (category, text, source)
    for capture in facts.captures:
        if capture.kind in ("list", "text"):
            ordered.append((capture.key, str(capture.value), capture.source))
    merged: dict[tuple[str, str], Motif] = {}
    for category, text, source in ordered:
        key = (category, text)
        if key in merged:
            prior = merged[key]
            merged[key] = Motif(category=category, text=text, source=prior.source, count=prior.count + 1)
        else:
            merged[key] = Motif(category=category, text=text, source=source)
    return tuple(merged.values())


# --- orchestration ------------------------------------------------------------------------


@dataclass(frozen=True)
class ClinicalOutputs:
    red_flags: tuple[RedFlag, ...]
    profile: Profile
    motivation: MotivationLevel | None
    scores: tuple[ActivityScore, ...]
    risk: RiskAssessment
    motifs: tuple[Motif, ...]


def compile_clinical(
    script: DialogScript,
    session: SessionState,
    *,
    risk_config: RiskConfig | None = None,
    motivation_config: MotivationConfig | None = None,
    strict: bool = True,
) -> ClinicalOutputs:
    """Run all six derivations over a completed session.

    With strict=False (used by the bulk simulator on arbitrary scripts),
    scores whose questions were skipped are omitted, missing demographics
    degrade to a zero age/sex contribution, and motivation is skipped when
    no score rule applies.
    """
    facts = session.facts

    scores: list[ActivityScore] = []
    for rule in script.scores:
        try:
            scores.append(compute_activity_score(facts, rule, script))
        except MissingAnswers:
            if strict:
                raise

    try:
        risk = count_risk_factors(facts, risk_config or RiskConfig.from_script(script))
    except MissingDemographics:
        if strict:
            raise
        config = risk_config or RiskConfig.from_script(script)
        contributing = tuple(k for k in config.risk_fact_keys if facts.scalars.get(k) is True)
        risk = RiskAssessment(count=len(contributing), contributing=contributing, age_sex_contribution=0)

    flags = evaluate_red_flags(facts, risk.count, script.flags)
    profile = classify_profile(facts, scores, risk.count, script.profiles)

    motivation: MotivationLevel | None = None
    if motivation_config is not None:
        motivation = motivation_level(scores, motivation_config)
    elif script.scores:
        try:
            motivation = motivation_level(scores, MotivationConfig.for_script(script))
        except UnknownScore:
            if strict:
                raise

    return ClinicalOutputs(
        red_flags=tuple(flags),
        profile=profile,
        motivation=motivation,
        scores=tuple(scores),
        risk=risk,
        motifs=extract_motifs(facts),
    )
