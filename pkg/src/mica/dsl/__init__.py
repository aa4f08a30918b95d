"""The .mica dialog-script language: AST, parser, renderer, validator."""

from __future__ import annotations

from ..errors import DuplicateIdError, ScriptSyntaxError
from .model import (
    AgeAtom,
    And,
    Band,
    DialogScript,
    END,
    Expr,
    FactAtom,
    FlagRule,
    InterceptRule,
    Issue,
    LabelCond,
    Not,
    Option,
    Or,
    ProfileRule,
    QuestionNode,
    RangeCond,
    RiskCountAtom,
    Route,
    ScoreBandAtom,
    ScoreRule,
    Section,
    ValidationReport,
    YesNoCond,
)
from .parser import parse_script
from .paths import CycleDetected, PathEnumeration, enumerate_paths
from .render import render_expr, render_script
from .validate import validate_script


def check_script(text: str) -> ValidationReport:
    """Parse then validate, folding parse failures into the report.

    Handy for tools (CLI, service script loading) that want one list of
    problems regardless of which stage caught them.
    """
    try:
        script = parse_script(text)
    except DuplicateIdError as exc:
        return ValidationReport(
            errors=(Issue(code="duplicate_id", location=f"line {exc.line}:{exc.col}", message=exc.reason),)
        )
    except ScriptSyntaxError as exc:
        return ValidationReport(
            errors=(Issue(code="syntax_error", location=f"line {exc.line}:{exc.col}", message=exc.reason),)
        )
    return validate_script(script)


__all__ = [
    "AgeAtom",
    "And",
    "Band",
    "CycleDetected",
    "DialogScript",
    "DuplicateIdError",
    "END",
    "Expr",
    "FactAtom",
    "FlagRule",
    "InterceptRule",
    "Issue",
    "LabelCond",
    "Not",
    "Option",
    "Or",
    "PathEnumeration",
    "ProfileRule",
    "QuestionNode",
    "RangeCond",
    "RiskCountAtom",
    "Route",
    "ScoreBandAtom",
    "ScoreRule",
    "ScriptSyntaxError",
    "Section",
    "ValidationReport",
    "YesNoCond",
    "check_script",
    "enumerate_paths",
    "parse_script",
    "render_expr",
    "render_script",
    "validate_script",
]
