"""Canonical text form for dialog scripts.

`render_script` is the inverse of `parse_script`: rendering then parsing
yields a structurally equal AST, and rendering is a fixed point (one
canonicalization pass makes the text byte-stable).
"""

from __future__ import annotations

from .model import (
    AgeAtom,
    And,
    Band,
    Cond,
    DialogScript,
    Expr,
    FactAtom,
    Not,
    Or,
    QuestionNode,
    RangeCond,
    RiskCountAtom,
    Route,
    ScoreBandAtom,
    LabelCond,
    YesNoCond,
)

_STRING_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t"}


def _quote(s: str) -> str:
    return '"' + "".join(_STRING_ESCAPES.get(c, c) for c in s) + '"'


def _render_cond(cond: Cond) -> str:
    if isinstance(cond, YesNoCond):
        return "yes" if cond.value else "no"
    if isinstance(cond, LabelCond):
        return _quote(cond.label)
    if isinstance(cond, RangeCond):
        return f"{cond.lo}..{cond.hi}"
    raise TypeError(f"unknown condition {cond!r}")


def _render_route(route: Route) -> str:
    if route.cond is None:
        return f"goto {route.target}"
    return f"when {_render_cond(route.cond)} goto {route.target}"


# precedence: or < and < not < atom
_PREC_OR, _PREC_AND, _PREC_NOT, _PREC_ATOM = 1, 2, 3, 4


def render_expr(expr: Expr) -> str:
    return _render_expr(expr, 0)


def _render_expr(expr: Expr, parent_prec: int) -> str:
    if isinstance(expr, Or):
        text = " or ".join(_render_expr(t, _PREC_OR + 1) for t in expr.terms)
        prec = _PREC_OR
    elif isinstance(expr, And):
        text = " and ".join(_render_expr(t, _PREC_AND + 1) for t in expr.terms)
        prec = _PREC_AND
    elif isinstance(expr, Not):
        text = "not " + _render_expr(expr.operand, _PREC_ATOM)
        prec = _PREC_NOT
    elif isinstance(expr, FactAtom):
        text, prec = f"fact({expr.key})", _PREC_ATOM
    elif isinstance(expr, RiskCountAtom):
        text, prec = f"riskcount >= {expr.min_count}", _PREC_ATOM
    elif isinstance(expr, ScoreBandAtom):
        text, prec = f"scoreband({expr.score_id}, {expr.band})", _PREC_ATOM
    elif isinstance(expr, AgeAtom):
        text, prec = f"age {expr.op} {expr.bound}", _PREC_ATOM
    else:
        raise TypeError(f"unknown expression {expr!r}")
    if prec < parent_prec:
        return f"({text})"
    return text


def _render_band(band: Band) -> str:
    if band.op == "lt":
        interval = f"< {band.a}"
    elif band.op == "gt":
        interval = f"> {band.a}"
    else:
        interval = f"{band.a}..{band.b}"
    return f"{band.name} when {interval}"


def _render_question(q: QuestionNode) -> list[str]:
    if q.kind == "numeric":
        lo, hi = q.numeric_range or (0, 0)
        kind = f"numeric {lo}..{hi}"
    else:
        kind = q.kind
    lines = [f"  question {q.id} {kind} {_quote(q.prompt)}"]
    lines.append(f"    help {_quote(q.help)}")
    if q.risk_factor:
        lines.append("    riskfactor")
    if q.fact_name:
        lines.append(f"    set {q.fact_name}")
    for opt in q.options:
        if opt.weight is None:
            lines.append(f"    option {_quote(opt.label)}")
        else:
            lines.append(f"    option {_quote(opt.label)} weight {opt.weight}")
    for route in q.routes:
        lines.append(f"    {_render_route(route)}")
    return lines


def render_script(script: DialogScript) -> str:
    """Render a script to its canonical text form (stable ordering, LF endings)."""
    blocks: list[str] = [
        f"script {_quote(script.name)} version {script.version} start {script.start}"
    ]
    for section in script.sections:
        lines = [f"section {section.id} {{"]
        for i, q in enumerate(section.questions):
            if i:
                lines.append("")
            lines.extend(_render_question(q))
        lines.append("}")
        blocks.append("\n".join(lines))
    for rule in script.scores:
        lines = [f"score {rule.id} {{"]
        lines.append("  questions " + " ".join(rule.question_ids))
        lines.append("  thresholds {")
        for band in rule.bands:
            lines.append(f"    {_render_band(band)}")
        lines.append("  }")
        lines.append("}")
        blocks.append("\n".join(lines))
    for flag in script.flags:
        blocks.append(f"flag {flag.id} when {render_expr(flag.expr)}")
    for profile in script.profiles:
        blocks.append(f"profile {profile.id} when {render_expr(profile.expr)}")
    for intercept in script.intercepts:
        kws = " ".join(_quote(k) for k in intercept.keywords)
        blocks.append(
            f"intercept {intercept.id} keywords {kws} record {intercept.record_fact}"
        )
    return "\n\n".join(blocks) + "\n"
