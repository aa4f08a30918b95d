"""Validator: the seeded-defect corpus plus individual check behavior."""

from __future__ import annotations

from pathlib import Path

import pytest

from mica.dsl import check_script, validate_script

DEFECTS = Path(__file__).parent / "fixtures" / "defects"

EXPECTED_DEFECTS = {
    "dangling_target.mica": "dangling_target",
    "unreachable_node.mica": "unreachable_node",
    "missing_help.mica": "missing_help",
    "duplicate_id.mica": "duplicate_id",
    "score_unweighted_question.mica": "score_unweighted_question",
    "bands_overlap.mica": "bands_overlap",
    "flag_unknown_fact.mica": "flag_unknown_fact",
    "routes_not_exhaustive.mica": "routes_not_exhaustive",
}


@pytest.mark.parametrize("filename,code", sorted(EXPECTED_DEFECTS.items()))
def test_seeded_defect_yields_exactly_its_code(filename, code):
    report = check_script((DEFECTS / filename).read_text(encoding="utf-8"))
    assert report.error_codes() == (code,)


def test_defect_corpus_has_eight_classes():
    assert len(EXPECTED_DEFECTS) == 8
    assert len(set(EXPECTED_DEFECTS.values())) == 8


def test_sample_script_is_clean(sample_text):
    report = check_script(sample_text)
    assert report.ok
    assert report.errors == ()


def test_sample_script_help_totality(sample_script):
    assert all(q.help.strip() for q in sample_script.all_nodes())


BASE = """
script "v" version 1 start q_a
section main {{
  question q_a yesno "Ok?"
    help "Yes or no."
    goto end
}}
{extra}
"""


def _validate(extra: str = "", base: str | None = None):
    return check_script((base or BASE).format(extra=extra))


def test_dangling_start():
    text = 'script "v" version 1 start q_nope\nsection m { question q_a yesno "?" help "H." goto end }'
    assert "dangling_start" in check_script(text).error_codes()


def test_cycle_detected():
    text = """
script "v" version 1 start q_a
section main {
  question q_a yesno "Ok?"
    help "H."
    when yes goto q_b
    goto end
  question q_b yesno "Back?"
    help "H."
    goto q_a
}
"""
    assert "cycle" in check_script(text).error_codes()


def test_self_loop_is_a_cycle():
    text = """
script "v" version 1 start q_a
section main {
  question q_a yesno "Again?"
    help "H."
    goto q_a
}
"""
    codes = check_script(text).error_codes()
    assert "cycle" in codes


def test_route_type_mismatch_numeric_cond_on_yesno():
    text = """
script "v" version 1 start q_a
section main {
  question q_a yesno "Ok?"
    help "H."
    when 1..2 goto end
    goto end
}
"""
    assert "route_type_mismatch" in check_script(text).error_codes()


def test_route_label_unknown():
    text = """
script "v" version 1 start q_a
section main {
  question q_a choice "Pick?"
    help "H."
    option "a"
    option "b"
    when "c" goto end
    goto end
}
"""
    assert "route_label_unknown" in check_script(text).error_codes()


def test_numeric_coverage_gap_found():
    text = """
script "v" version 1 start q_a
section main {
  question q_a numeric 0..10 "N?"
    help "H."
    when 0..3 goto end
    when 6..10 goto end
}
"""
    report = check_script(text)
    assert report.error_codes() == ("routes_not_exhaustive",)
    assert "4..5" in report.errors[0].message


def test_shadowed_route_is_a_warning_not_error():
    text = """
script "v" version 1 start q_a
section main {
  question q_a yesno "Ok?"
    help "H."
    when yes goto end
    when no goto end
    goto end
}
"""
    report = check_script(text)
    assert report.ok
    assert [w.code for w in report.warnings] == ["route_shadowed"]


def test_bands_gap_detected():
    text = """
script "v" version 1 start q_a
section main {
  question q_a choice "Pick?"
    help "H."
    set pick
    option "x" weight 0
    option "y" weight 10
    goto end
}
score s {
  questions q_a
  thresholds {
    low when 0..3
    high when 8..10
  }
}
"""
    assert "bands_gap" in check_script(text).error_codes()


def test_band_boundaries_exact_no_false_positives():
    # low [0], mid [1..9], high [10]: tiles the achievable range exactly
    text = """
script "v" version 1 start q_a
section main {
  question q_a choice "Pick?"
    help "H."
    set pick
    option "x" weight 0
    option "y" weight 10
    goto end
}
score s {
  questions q_a
  thresholds {
    low when < 1
    mid when 1..9
    high when > 9
  }
}
"""
    assert check_script(text).ok


def test_score_unknown_question():
    extra = 'score s {\n  questions q_zz\n  thresholds {\n    low when < 1\n    hi when > 0\n  }\n}'
    assert "score_unknown_question" in _validate(extra).error_codes()


def test_score_question_without_set_tag():
    text = """
script "v" version 1 start q_a
section main {
  question q_a choice "Pick?"
    help "H."
    option "x" weight 0
    option "y" weight 1
    goto end
}
score s {
  questions q_a
  thresholds {
    low when < 1
    hi when 1..1
  }
}
"""
    assert "score_question_unset" in check_script(text).error_codes()


def test_flag_rejects_scoreband_and_age_atoms():
    extra = "flag f when age >= 40"
    assert "flag_bad_atom" in _validate(extra).error_codes()


def test_profile_unknown_scoreband():
    extra = "profile p when scoreband(nope, low)"
    assert "unknown_scoreband" in _validate(extra).error_codes()


def test_profile_unknown_fact():
    extra = "profile p when fact(ghost)"
    assert "profile_unknown_fact" in _validate(extra).error_codes()


def test_intercept_fact_satisfies_flag_reference():
    extra = 'flag f when fact(complaints)\n\nintercept i keywords "knee" record complaints'
    report = _validate(extra)
    assert report.ok


def test_duplicate_keyword_in_intercept():
    extra = 'intercept i keywords "knee" "knee" record complaints'
    assert "duplicate_keyword" in _validate(extra).error_codes()


def test_uppercase_keyword_rejected():
    extra = 'intercept i keywords "Knee" record complaints'
    assert "keyword_not_lowercase" in _validate(extra).error_codes()


def test_bad_riskcount_threshold():
    extra = "flag f when riskcount >= 0"
    assert "bad_riskcount" in _validate(extra).error_codes()


def test_fact_rewrite_on_same_path():
    text = """
script "v" version 1 start q_a
section main {
  question q_a yesno "Ok?"
    help "H."
    set answer
    goto q_b
  question q_b yesno "Again?"
    help "H."
    set answer
    goto end
}
"""
    assert "fact_rewrite" in check_script(text).error_codes()


def test_same_fact_on_exclusive_branches_is_fine():
    text = """
script "v" version 1 start q_a
section main {
  question q_a yesno "Ok?"
    help "H."
    when yes goto q_b
    goto q_c
  question q_b numeric 0..9 "N?"
    help "H."
    set detail
    goto end
  question q_c numeric 0..9 "M?"
    help "H."
    set detail
    goto end
}
"""
    assert check_script(text).ok


def test_fact_kind_conflict():
    text = """
script "v" version 1 start q_a
section main {
  question q_a text "Describe?"
    help "H."
    set complaints
    goto end
}
intercept i keywords "knee" record complaints
"""
    assert "fact_kind_conflict" in check_script(text).error_codes()


def test_choice_needs_two_options():
    text = """
script "v" version 1 start q_a
section main {
  question q_a choice "Pick?"
    help "H."
    option "only"
    goto end
}
"""
    assert "bad_choice_options" in check_script(text).error_codes()


def test_options_on_yesno_rejected():
    text = """
script "v" version 1 start q_a
section main {
  question q_a yesno "Ok?"
    help "H."
    option "yes"
    option "no"
    goto end
}
"""
    assert "options_on_nonchoice" in check_script(text).error_codes()


def test_bad_numeric_range():
    text = """
script "v" version 1 start q_a
section main {
  question q_a numeric 9..3 "N?"
    help "H."
    goto end
}
"""
    assert "bad_numeric_range" in check_script(text).error_codes()


def test_validator_runs_on_ast_built_duplicates(sample_script):
    # duplicate detection must not rely on the parser
    from dataclasses import replace

    section = sample_script.sections[0]
    doubled = replace(
        sample_script,
        sections=(section,) + sample_script.sections,
    )
    codes = validate_script(doubled).error_codes()
    assert "duplicate_id" in codes


def test_syntax_error_becomes_report_entry():
    report = check_script("not a script at all")
    assert report.error_codes() == ("syntax_error",)
    assert "line 1" in report.errors[0].location
