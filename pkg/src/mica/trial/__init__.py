"""Trial harness: group assignment, persona simulation, duration stats, survey aggregation."""

from .assign import Assignment, DuplicateRosterId, GROUP_CONTROL, GROUP_TOOL, assign_groups
from .personas import (
    AnswerChoice,
    PersonaSpec,
    PersonaSpecIncomplete,
    SimulationReport,
    constant_persona,
    reachable_nodes,
    simulate_personas,
)
from .report import (
    TrialReport,
    build_trial_report,
    read_durations_file,
    read_roster_file,
    render_text,
    write_csv_tables,
)
from .stats import DEFAULT_TRIM, DurationStats, EmptyInput, TrimRule, duration_stats, parse_trim_rule
from .surveys import (
    AgeBand,
    DEFAULT_BANDS,
    MalformedBands,
    SatisfactionReport,
    SurveyRecord,
    UnassignedSession,
    aggregate_surveys,
    load_survey_records,
    parse_bands,
)

__all__ = [
    "AgeBand",
    "AnswerChoice",
    "Assignment",
    "DEFAULT_BANDS",
    "DEFAULT_TRIM",
    "DuplicateRosterId",
    "DurationStats",
    "EmptyInput",
    "GROUP_CONTROL",
    "GROUP_TOOL",
    "MalformedBands",
    "PersonaSpec",
    "PersonaSpecIncomplete",
    "SatisfactionReport",
    "SimulationReport",
    "SurveyRecord",
    "TrialReport",
    "TrimRule",
    "UnassignedSession",
    "aggregate_surveys",
    "assign_groups",
    "build_trial_report",
    "constant_persona",
    "duration_stats",
    "load_survey_records",
    "parse_bands",
    "parse_trim_rule",
    "reachable_nodes",
    "read_durations_file",
    "read_roster_file",
    "render_text",
    "simulate_personas",
    "write_csv_tables",
]
