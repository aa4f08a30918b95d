"""mica command line.

    mica validate <script.mica>
    mica run <script.mica> [--transcript <out.jsonl>]
    mica simulate <script.mica> --personas <spec.json> --n <N> --seed <S>
                  [--out <report.json>] [--figures <dir>]
    mica serve --port <P> --scripts <dir> --store <file> --secret-file <path>
    mica trial assign --roster <file> --seed <S> [--out <assignment.json>]
    mica trial report --surveys <file> --assignment <file> --durations <file>
                      [--bands <spec>] [--trim <rule>] [--out <dir>]
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
import time
from pathlib import Path

from . import engine, trial
from .clinical import compile_clinical
from .dsl import check_script, parse_script
from .errors import MicaError
from .summary import anonymize_patient, generate_summary, render_summary


def _now_ms() -> int:
    return time.time_ns() // 1_000_000


def _load_script(path: str):
    text = Path(path).read_text(encoding="utf-8")
    report = check_script(text)
    if not report.ok:
        for issue in report.errors:
            print(f"error {issue}", file=sys.stderr)
        raise MicaError(f"script '{path}' failed validation")
    return parse_script(text)


# --- subcommands -----------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    text = Path(args.script).read_text(encoding="utf-8")
    report = check_script(text)
    for issue in report.errors:
        print(f"error {issue}")
    for issue in report.warnings:
        print(f"warning {issue}")
    if report.ok:
        print(f"{args.script}: ok ({len(report.warnings)} warning(s))")
        return 0
    print(f"{args.script}: {len(report.errors)} error(s)")
    return 1


def cmd_run(args: argparse.Namespace) -> int:
    script = _load_script(args.script)
    anon = anonymize_patient(args.patient_id, secrets.token_bytes(32))
    session, prompt = engine.start_session(script, anon.token, _now_ms(), session_id="cli")

    print(f"# {script.name} (v{script.version}) — type ? for help")
    while not session.is_complete:
        print(f"\n{prompt.text}")
        if prompt.kind == "choice":
            for label in prompt.options:
                print(f"  - {label}")
        try:
            utterance = input("> ").strip()
        except EOFError:
            print("\ninterview aborted")
            return 1
        if utterance == "?":
            print(engine.request_help(script, session, _now_ms()))
            continue
        result = engine.submit_utterance(script, session, utterance, _now_ms())
        if result.state == "rejected":
            assert result.prompt is not None
            print(f"sorry, I could not use that answer. {result.prompt.help}")
            prompt = result.prompt
        elif result.state == "complete":
            break
        else:
            assert result.prompt is not None
            if session.transcript[-1].kind == "interrupted":
                print("noted — we will pass that along to the doctor.")
            prompt = result.prompt

    clinical = compile_clinical(script, session, strict=False)
    doc = generate_summary(script, session, clinical, generated_at=_now_ms())
    print("\n" + render_summary(doc, "plain"))

    if args.transcript:
        events = engine.transcript_events(session, script)
        with open(args.transcript, "w", encoding="utf-8") as fh:
            for seq, event in enumerate(events, start=1):
                record = {"seq": seq, "session_id": session.session_id, **event}
                fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
        print(f"transcript written to {args.transcript}")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    script = _load_script(args.script)
    spec = trial.PersonaSpec.from_json(Path(args.personas).read_text(encoding="utf-8"))
    started = time.perf_counter()
    report = trial.simulate_personas(script, spec, args.n, args.seed)
    elapsed = time.perf_counter() - started
    print(report.render_text(), end="")
    print(f"({elapsed:.2f}s)")
    if args.out:
        Path(args.out).write_text(report.to_json() + "\n", encoding="utf-8")
        print(f"report written to {args.out}")
    if args.figures:
        from .trial.figures import render_simulation_figures

        for path in render_simulation_figures(report, args.figures):
            print(f"figure written to {path}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    secret = Path(args.secret_file).read_bytes().strip()
    config = ServiceConfig(
        scripts_dir=Path(args.scripts),
        store_path=Path(args.store),
        secret=secret,
    )
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_trial_assign(args: argparse.Namespace) -> int:
    roster = trial.read_roster_file(args.roster)
    assignment = trial.assign_groups(roster, args.seed)
    text = assignment.to_json() + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"assignment written to {args.out}")
    else:
        print(text, end="")
    sizes = {g: len(assignment.group_ids(g)) for g in (trial.GROUP_TOOL, trial.GROUP_CONTROL)}
    print(f"groups: {sizes[trial.GROUP_TOOL]} {trial.GROUP_TOOL}, {sizes[trial.GROUP_CONTROL]} {trial.GROUP_CONTROL}")
    return 0


def cmd_trial_report(args: argparse.Namespace) -> int:
    assignment = trial.Assignment.from_json(Path(args.assignment).read_text(encoding="utf-8"))
    responses = trial.load_survey_records(args.surveys)
    durations = trial.read_durations_file(args.durations)
    bands = trial.parse_bands(args.bands) if args.bands else trial.DEFAULT_BANDS
    rule = trial.parse_trim_rule(args.trim) if args.trim else trial.DEFAULT_TRIM
    report = trial.build_trial_report(
        assignment, responses, durations, age_bands=bands, trim_rule=rule
    )
    print(trial.render_text(report), end="")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(trial.render_text(report), encoding="utf-8")
        (out / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
        for path in trial.write_csv_tables(report, out):
            print(f"table written to {path}")
        from .trial.figures import render_trial_figures

        for path in render_trial_figures(report, out):
            print(f"figure written to {path}")
    return 0


# --- wiring ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mica", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a dialog script, exit 0 iff clean")
    p.add_argument("script")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="interactive terminal interview")
    p.add_argument("script")
    p.add_argument("--transcript", help="write the event log here (JSONL)")
    p.add_argument("--patient-id", default="local-patient", help="raw id, anonymized immediately")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("simulate", help="run seeded persona sessions")
    p.add_argument("script")
    p.add_argument("--personas", required=True, help="persona spec JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--figures", help="render PNG figures into this directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--scripts", required=True, help="directory of .mica scripts")
    p.add_argument("--store", required=True, help="append-only event log file")
    p.add_argument("--secret-file", required=True, help="anonymization secret (>= 16 bytes)")
    p.set_defaults(func=cmd_serve)

    trial_parser = sub.add_parser("trial", help="study harness")
    trial_sub = trial_parser.add_subparsers(dest="trial_command", required=True)

    p = trial_sub.add_parser("assign", help="randomize a roster into two groups")
    p.add_argument("--roster", required=True, help="one patient id per line")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="write assignment JSON here")
    p.set_defaults(func=cmd_trial_assign)

    p = trial_sub.add_parser("report", help="aggregate surveys and durations")
    p.add_argument("--surveys", required=True, help="JSONL responses or a service event log")
    p.add_argument("--assignment", required=True, help="assignment JSON from 'trial assign'")
    p.add_argument("--durations", required=True, help="CSV 'id,milliseconds' per line")
    p.add_argument("--bands", help="age bands, e.g. '<44,44..56,>56'")
    p.add_argument("--trim", help="duration trim rule: '3xmedian' or 'cap:<ms>'")
    p.add_argument("--out", help="write text/JSON/CSV/figures into this directory")
    p.set_defaults(func=cmd_trial_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MicaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
