"""mica: pre-teleconsultation interview toolkit.

A declarative dialog-script language drives deterministic patient
interviews; collected facts feed scoring, red-flag and profiling rules;
results render as prioritized doctor summaries. An HTTP service hosts
sessions over an append-only event log, and a trial harness covers group
assignment, persona simulation and satisfaction reporting.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

__version__ = "0.1.0"


def sample_script_path() -> Path:
    """Filesystem path of the bundled sample cardiology script."""
    return Path(str(resources.files("mica").joinpath("data/cardio_sport.mica")))


def load_sample_script():
    from .dsl import parse_script

    return parse_script(sample_script_path().read_text(encoding="utf-8"))
