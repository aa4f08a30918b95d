"""Parser behavior: structure, errors with positions, id uniqueness."""

from __future__ import annotations

import pytest

from mica.dsl import DuplicateIdError, ScriptSyntaxError, parse_script
from mica.dsl.model import And, FactAtom, Not, Or, RangeCond, YesNoCond

MINIMAL = """
script "tiny" version 1 start q_a
section main {
  question q_a yesno "Ok?"
    help "Yes or no."
    when yes goto end
    when no goto end
}
"""


def test_minimal_script_parses():
    script = parse_script(MINIMAL)
    assert script.name == "tiny"
    assert script.version == 1
    assert script.start == "q_a"
    assert len(script.all_nodes()) == 1
    node = script.node("q_a")
    assert node.kind == "yesno"
    assert node.routes[0].cond == YesNoCond(value=True)
    assert node.routes[1].target == "end"


def test_empty_input_fails_at_line_one():
    with pytest.raises(ScriptSyntaxError) as exc:
        parse_script("")
    assert exc.value.line == 1
    assert "script" in str(exc.value)


def test_comment_only_input_fails_like_empty():
    with pytest.raises(ScriptSyntaxError):
        parse_script("# nothing here\n# still nothing\n")


def test_duplicate_node_id_raises_at_parse():
    text = MINIMAL + """
section extra {
  question q_a yesno "Again?"
    help "Yes or no."
    goto end
}
"""
    with pytest.raises(DuplicateIdError) as exc:
        parse_script(text)
    assert exc.value.duplicate_id == "q_a"
    assert exc.value.line > 1


def test_duplicate_rule_id_raises():
    text = MINIMAL + "\nflag f when fact(x)\nflag f when fact(x)\n"
    with pytest.raises(DuplicateIdError):
        parse_script(text)


def test_syntax_error_carries_position():
    bad = 'script "x" version 1 start q_a\nsection main {\n  question q_a bogus "?"\n'
    with pytest.raises(ScriptSyntaxError) as exc:
        parse_script(bad)
    assert exc.value.line == 3
    assert "kind" in exc.value.reason


def test_keyword_cannot_be_an_id():
    bad = MINIMAL.replace("start q_a", "start score")
    with pytest.raises(ScriptSyntaxError) as exc:
        parse_script(bad)
    assert "keyword" in str(exc.value)


def test_missing_route_rejected():
    bad = """
script "x" version 1 start q_a
section main {
  question q_a yesno "Ok?"
    help "H."
}
"""
    with pytest.raises(ScriptSyntaxError) as exc:
        parse_script(bad)
    assert "route" in str(exc.value)


def test_string_escapes_round():
    text = '''
script "quote \\" backslash \\\\ tab \\t nl \\n" version 1 start q_a
section main {
  question q_a yesno "Ok?"
    help "H."
    goto end
}
'''
    script = parse_script(text)
    assert script.name == 'quote " backslash \\ tab \t nl \n'


def test_unterminated_string():
    with pytest.raises(ScriptSyntaxError) as exc:
        parse_script('script "oops version 1 start q_a')
    assert "unterminated" in str(exc.value)


def test_boolexpr_precedence_and_over_or():
    text = MINIMAL + "\nflag f when fact(a) and fact(b) or fact(c) and fact(d)\n"
    expr = parse_script(text).flags[0].expr
    assert expr == Or(
        terms=(
            And(terms=(FactAtom("a"), FactAtom("b"))),
            And(terms=(FactAtom("c"), FactAtom("d"))),
        )
    )


def test_boolexpr_parens_group_or_under_and():
    text = MINIMAL + "\nflag f when (fact(a) or fact(b)) and not fact(c)\n"
    expr = parse_script(text).flags[0].expr
    assert expr == And(
        terms=(Or(terms=(FactAtom("a"), FactAtom("b"))), Not(operand=FactAtom("c")))
    )


def test_numeric_route_conditions():
    text = """
script "n" version 1 start q_n
section main {
  question q_n numeric 0..99 "N?"
    help "H."
    when 0..49 goto end
    goto end
}
"""
    node = parse_script(text).node("q_n")
    assert node.numeric_range == (0, 99)
    assert node.routes[0].cond == RangeCond(lo=0, hi=49)
    assert node.routes[1].cond is None


def test_version_must_be_positive():
    with pytest.raises(ScriptSyntaxError):
        parse_script(MINIMAL.replace("version 1", "version 0"))


def test_sample_script_shape(sample_script):
    assert sample_script.start == "q_age"
    assert len(sample_script.sections) == 5
    assert [f.id for f in sample_script.flags] == [
        "diabetes_followup",
        "symptomatic",
        "many_risks",
        "complaint_reported",
    ]
    assert len(sample_script.profiles) == 4
    assert sample_script.risk_fact_keys() == (
        "tobacco",
        "high_bp",
        "cholesterol",
        "diabetes",
        "infarct_history",
    )
