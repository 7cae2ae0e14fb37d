"""Command-line surface: the terminal grading loop and auxiliary commands."""

from __future__ import annotations

import csv
import io
import os
import sys
from pathlib import Path
from typing import NoReturn

import click

from .engine import (
    Action,
    ApplyCodes,
    FlowStart,
    GradingSession,
    NewRubricItem,
    NoteIssue,
    PersonalizedMessage,
    Quit,
    SessionConfig,
    Skip,
    parse_input,
)
from .errors import (
    AllGradedError,
    GradekitError,
    InputError,
    ValidationError,
)
from .fsutil import SessionLock, atomic_write_text
from .outputs import format_points, generate_outputs
from .paths import check_presence, compile_template, instantiate, resolve_all
from .progress import ProgressLog
from .roster import gradees as roster_gradees, parse_roster
from .rubric import (
    ALL_QUESTIONS,
    ALL_QUESTIONS_NAME,
    GENERAL,
    GENERAL_NAME,
    Applicability,
    GradingMode,
    RubricItem,
    parse_points,
    parse_rubric,
    rubric_template,
)
from . import push as push_mod

TOKEN_ENV_OVERRIDE = "GRADEKIT_TOKEN_ENV"
DEFAULT_TOKEN_ENV = "GITHUB_TOKEN"


@click.group()
def main() -> None:
    """Grading workflow assistant: rubric prompt codes in, grades and feedback out."""


def _fail(error: Exception) -> NoReturn:
    if isinstance(error, ValidationError):
        click.echo("validation failed:", err=True)
        for issue in error.issues:
            click.echo(f"  - {issue}", err=True)
    else:
        click.echo(f"error: {error}", err=True)
    sys.exit(1)


def _session_options(func):
    decorators = [
        click.option("--rubric", "rubric_path", required=True, help="Rubric CSV path."),
        click.option("--roster", "roster_path", required=True, help="Roster CSV path."),
        click.option(
            "--example-id",
            required=True,
            help="Identifier of the example gradee used for path inference.",
        ),
        click.option(
            "--example-sub",
            required=True,
            help="Example gradee's submission path (file or folder).",
        ),
        click.option(
            "--example-feedback",
            required=True,
            help="Example gradee's feedback file path.",
        ),
        click.option("--log", "log_path", required=True, help="Progress log CSV path."),
        click.option(
            "--grades", "grades_path", required=True, help="Final grade sheet CSV path."
        ),
        click.option(
            "--mode",
            type=click.Choice(["auto", "negative", "positive"]),
            default="auto",
            show_default=True,
            help="Grading direction; auto reads it off the rubric's points column.",
        ),
        click.option(
            "--open-hook",
            default=None,
            help="Command run as '<cmd> <submission>' when a gradee starts; "
            "'none' disables; default is the platform opener.",
        ),
        click.option(
            "--close-hook",
            default=None,
            help="Command run when a gradee is finished; 'none' disables; "
            "default prints a notice.",
        ),
    ]
    for decorator in reversed(decorators):
        func = decorator(func)
    return func


def _advanced_options(func):
    decorators = [
        click.option(
            "--students",
            multiple=True,
            help="Grade only these gradees (repeatable).",
        ),
        click.option(
            "--questions",
            multiple=True,
            help=f"Grade only these questions (repeatable; {GENERAL_NAME!r} targets "
            "the overall step).",
        ),
        click.option(
            "--github-issues",
            is_flag=True,
            help="Offer the 'i' action to note GitHub issues while grading.",
        ),
    ]
    for decorator in reversed(decorators):
        func = decorator(func)
    return func


def _resolve_mode(rubric_path: Path, mode: str) -> GradingMode:
    if mode != "auto":
        return GradingMode(mode)
    try:
        header = next(csv.reader(io.StringIO(rubric_path.read_text(encoding="utf-8"))))
    except (OSError, StopIteration, csv.Error) as exc:
        raise GradekitError(f"cannot read rubric header from {rubric_path}: {exc}")
    last = header[-1].strip() if header else ""
    for candidate in GradingMode:
        if last == candidate.points_column:
            return candidate
    raise GradekitError(
        f"cannot infer grading mode: last rubric column is {last!r}, expected "
        "points_to_remove or points_to_add (or pass --mode)"
    )


def _build_config(
    rubric_path: str,
    roster_path: str,
    example_id: str,
    example_sub: str,
    example_feedback: str,
    log_path: str,
    grades_path: str,
    mode: str,
    open_hook: str | None,
    close_hook: str | None,
    team_mode: bool = False,
    github_issues: bool = False,
    students: tuple[str, ...] = (),
    questions: tuple[str, ...] = (),
) -> SessionConfig:
    root = Path.cwd()
    return SessionConfig(
        rubric_path=rubric_path,
        roster_path=roster_path,
        example_identifier=example_id,
        example_submission_path=example_sub,
        example_feedback_path=example_feedback,
        log_path=log_path,
        grade_sheet_path=grades_path,
        mode=_resolve_mode(root / rubric_path, mode),
        team_mode=team_mode,
        github_issues=github_issues,
        students_to_grade=students or None,
        questions_to_grade=questions or None,
        open_hook=open_hook,
        close_hook=close_hook,
        root=root,
    )


# -- the interactive loop ------------------------------------------------------


def _read_line(prompt: str) -> str | None:
    """One input line; None on EOF (treated as quit)."""
    click.echo(prompt, nl=False)
    line = sys.stdin.readline()
    if line == "":
        click.echo()
        return None
    return line.rstrip("\n")


def _print_notices(notices: list[str]) -> None:
    for notice in notices:
        click.echo(f"  ({notice})")


def _print_prompt(session: GradingSession) -> None:
    assert session.current is not None
    gradee, question = session.current
    graded, total = session.counts()
    label = "overall" if question == GENERAL_NAME else question
    click.echo()
    click.echo(f"== {gradee} | {label} [{graded}/{total} graded] ==")
    sign = "-" if session.rubric.mode is GradingMode.NEGATIVE else "+"
    for item in session.visible_items():
        click.echo(f"  [{item.prompt_code}] {item.prompt_message} ({sign}{format_points(item.points)})")
    extra = ", i=note issue" if session.config.github_issues else ""
    click.echo(f"  enter codes, or: p=personalized message, r=new rubric item{extra}, s=skip, q=quit")


def _prompt_new_item(session: GradingSession) -> NewRubricItem | None:
    assert session.current is not None
    _, question = session.current
    default_scope = "general" if question == GENERAL_NAME else question
    scope_line = _read_line(f"applies to [{default_scope}]: ")
    if scope_line is None:
        return None
    scope_text = scope_line.strip() or default_scope
    lowered = scope_text.lower()
    if lowered == ALL_QUESTIONS_NAME:
        applicability = ALL_QUESTIONS
    elif lowered == GENERAL_NAME:
        applicability = GENERAL
    else:
        applicability = Applicability.for_question(scope_text)

    code = _read_line("prompt code: ")
    message = _read_line("prompt message: ") if code is not None else None
    feedback = _read_line("feedback for the student: ") if message is not None else None
    points_text = _read_line("points: ") if feedback is not None else None
    if points_text is None:
        return None
    points = parse_points(points_text.strip())
    if points is None:
        click.echo(f"! points {points_text!r} is not a non-negative decimal")
        return None
    return NewRubricItem(
        RubricItem(
            applicability=applicability,
            prompt_code=(code or "").strip(),
            prompt_message=message or "",
            feedback=feedback or "",
            points=points,
        )
    )


def _collect_action(session: GradingSession) -> Action | None:
    """Prompt until the grader produces an action; None means re-prompt."""
    line = _read_line("> ")
    if line is None:
        return Quit()
    try:
        parsed = parse_input(line, session.visible_codes(), session.config.github_issues)
    except InputError as exc:
        click.echo(f"! {exc}")
        return None
    if parsed == FlowStart.MESSAGE:
        text = _read_line("personalized message: ")
        return Quit() if text is None else PersonalizedMessage(text)
    if parsed == FlowStart.ISSUE:
        title = _read_line("issue title: ")
        if title is None:
            return Quit()
        body = _read_line("issue body: ")
        if body is None:
            return Quit()
        return NoteIssue(title=title, body=body)
    if parsed == FlowStart.NEW_ITEM:
        return _prompt_new_item(session)
    return parsed  # a complete Action


def _run_loop(session: GradingSession) -> None:
    if session.missing:
        click.echo("missing submissions (excluded from grading):")
        for gradee in session.missing:
            click.echo(f"  - {gradee}")
    _print_notices(session.open_current_submission())
    while not session.ended:
        _print_prompt(session)
        action = _collect_action(session)
        if action is None:
            continue
        try:
            effects = session.apply(action)
        except (InputError, ValidationError) as exc:
            if isinstance(exc, ValidationError):
                for issue in exc.issues:
                    click.echo(f"! {issue}")
            else:
                click.echo(f"! {exc}")
            continue
        _print_notices(effects.notices)
        if effects.finalized and effects.outputs is not None:
            click.echo()
            click.echo(f"grade sheet written to {effects.outputs.grade_sheet_path}")
            click.echo(f"feedback files written: {len(effects.outputs.feedback_files)}")


def _grade_command(config: SessionConfig) -> None:
    try:
        session = GradingSession.start(config)
    except AllGradedError:
        click.echo("nothing pending in this session's scope; regenerating outputs")
        report = _finalize_outputs(config)
        click.echo(f"grade sheet written to {report.grade_sheet_path}")
        return
    except GradekitError as exc:
        _fail(exc)
    try:
        _run_loop(session)
    finally:
        session.close()


# -- shared non-interactive plumbing -------------------------------------------


def _finalize_outputs(config: SessionConfig):
    root = Path(config.root)
    rubric = parse_rubric(
        (root / config.rubric_path).read_text(encoding="utf-8"), config.mode
    )
    roster = parse_roster(
        (root / config.roster_path).read_text(encoding="utf-8"),
        team_mode=config.team_mode,
    )
    all_gradees = roster_gradees(roster, team_mode=config.team_mode)
    submission_template = compile_template(
        config.example_identifier, config.example_submission_path
    )
    feedback_template = compile_template(
        config.example_identifier, config.example_feedback_path
    )
    submission_paths = resolve_all(submission_template, all_gradees)
    _, missing = check_presence(submission_paths, root=root)
    log = ProgressLog.load(
        root / config.log_path,
        expected_gradees=[g.identifier for g in all_gradees],
        expected_questions=list(rubric.question_order),
        expect_general=rubric.has_general,
        expected_mode=config.mode,
    )
    return generate_outputs(
        roster=roster,
        the_gradees=all_gradees,
        log=log,
        rubric=rubric,
        missing=set(missing),
        feedback_template=feedback_template,
        grade_sheet_path=config.grade_sheet_path,
        root=root,
        team_mode=config.team_mode,
    )


# -- commands -------------------------------------------------------------------


@main.command()
@_session_options
def grade(**kwargs) -> None:
    """Grade every question of every student, interactively."""
    try:
        config = _build_config(**kwargs)
    except GradekitError as exc:
        _fail(exc)
    _grade_command(config)


@main.command("grade-advanced")
@_session_options
@_advanced_options
def grade_advanced(students, questions, github_issues, **kwargs) -> None:
    """Grading with student/question subsets and GitHub issue recording."""
    try:
        config = _build_config(
            students=students,
            questions=questions,
            github_issues=github_issues,
            **kwargs,
        )
    except GradekitError as exc:
        _fail(exc)
    _grade_command(config)


@main.command("grade-team")
@_session_options
@_advanced_options
def grade_team(students, questions, github_issues, **kwargs) -> None:
    """Team grading: the roster's team_identifier stands in for the student."""
    try:
        config = _build_config(
            students=students,
            questions=questions,
            github_issues=github_issues,
            team_mode=True,
            **kwargs,
        )
    except GradekitError as exc:
        _fail(exc)
    _grade_command(config)


@main.command()
@_session_options
@_advanced_options
@click.option("--team-mode", is_flag=True, help="The log was created by grade-team.")
@click.option("--all", "clear_all", is_flag=True, help="Regrade every cell.")
def regrade(students, questions, github_issues, team_mode, clear_all, **kwargs) -> None:
    """Erase chosen cells from the log and grade them again."""
    if not students and not questions and not clear_all:
        raise click.UsageError(
            "say what to regrade: --students and/or --questions, or --all"
        )
    try:
        config = _build_config(
            students=students,
            questions=questions,
            github_issues=github_issues,
            team_mode=team_mode,
            **kwargs,
        )
        root = Path(config.root)
        with SessionLock(root / config.log_path):
            log = ProgressLog.load(root / config.log_path, expected_mode=config.mode)
            clear_gradees = list(students) if students else list(log.gradee_order)
            clear_questions = list(questions) if questions else (
                list(log.question_order)
                + ([GENERAL_NAME] if log.has_general else [])
            )
            log.clear_cells(clear_gradees, clear_questions)
        click.echo(
            f"cleared {len(clear_gradees) * len(clear_questions)} cell(s); regrading"
        )
    except GradekitError as exc:
        _fail(exc)
    _grade_command(config)


@main.command()
@click.option("--out", required=True, help="Where to write the template CSV.")
@click.option(
    "--mode",
    type=click.Choice(["negative", "positive"]),
    default="negative",
    show_default=True,
)
@click.option("--force", is_flag=True, help="Overwrite an existing file.")
def template(out: str, mode: str, force: bool) -> None:
    """Write an empty rubric CSV with the required column names."""
    target = Path(out)
    if target.exists() and not force:
        _fail(GradekitError(f"{out} already exists; pass --force to overwrite"))
    atomic_write_text(target, rubric_template(GradingMode(mode)))
    click.echo(f"rubric template written to {out}")


@main.command()
@_session_options
@click.option("--team-mode", is_flag=True, help="The log was created by grade-team.")
def finalize(team_mode: bool, **kwargs) -> None:
    """Regenerate the grade sheet and feedback files from the existing log."""
    try:
        config = _build_config(team_mode=team_mode, **kwargs)
        report = _finalize_outputs(config)
    except GradekitError as exc:
        _fail(exc)
    click.echo(f"grade sheet written to {report.grade_sheet_path}")
    click.echo(f"feedback files written: {len(report.feedback_files)}")


@main.command(name="push")
@click.option("--log", "log_path", required=True, help="Progress log CSV path.")
@click.option("--example-id", required=True, help="Example gradee identifier.")
@click.option(
    "--example-feedback", required=True, help="Example gradee's feedback file path."
)
@click.option(
    "--repo-template",
    required=True,
    help="Example gradee's repository, e.g. org/hw01-BaronPoisson.",
)
@click.option(
    "--commit-message",
    default="Add feedback",
    show_default=True,
    help="Commit message for pushed feedback files.",
)
@click.option(
    "--token-env",
    default=None,
    help=f"Environment variable holding the API token "
    f"[default: ${TOKEN_ENV_OVERRIDE} or {DEFAULT_TOKEN_ENV}].",
)
@click.option("--plan-only", is_flag=True, help="Print the plan; change nothing.")
@click.option(
    "--api-base",
    default="https://api.github.com",
    show_default=True,
    help="REST API base URL of the hosting service.",
)
@click.option(
    "--clone-base",
    default="https://github.com",
    show_default=True,
    help="Clone URL prefix (a local directory of bare repos also works).",
)
def push(
    log_path: str,
    example_id: str,
    example_feedback: str,
    repo_template: str,
    commit_message: str,
    token_env: str | None,
    plan_only: bool,
    api_base: str,
    clone_base: str,
) -> None:
    """Push feedback files and create noted issues on per-gradee repositories."""
    try:
        root = Path.cwd()
        log = ProgressLog.load(root / log_path)
        feedback_tmpl = compile_template(example_id, example_feedback)
        repo_tmpl = compile_template(example_id, repo_template)
        feedback_paths = {
            gradee: instantiate(feedback_tmpl, gradee) for gradee in log.gradee_order
        }
        plan = push_mod.plan_push(
            log, feedback_paths, repo_tmpl, commit_message, root=root
        )
    except GradekitError as exc:
        _fail(exc)

    for warning in plan.warnings:
        click.echo(f"warning: {warning}", err=True)
    click.echo(
        f"plan: {len(plan.push_files)} feedback push(es), "
        f"{len(plan.create_issues)} issue(s)"
    )
    for op in plan.operations:
        if isinstance(op, push_mod.PushFile):
            click.echo(f"  PUSH_FILE   {op.repo}: {op.local_path} -> {op.destination_path}")
        else:
            click.echo(f"  CREATE_ISSUE {op.repo}: {op.title}")
    if plan_only:
        report = push_mod.execute(plan, push_mod.DryRunTransport())
        click.echo(f"dry run: {len(report.results)} operation(s), nothing executed")
        return

    env_name = token_env or os.environ.get(TOKEN_ENV_OVERRIDE) or DEFAULT_TOKEN_ENV
    token = os.environ.get(env_name)
    if not token:
        _fail(GradekitError(f"no token in ${env_name}; export it or pass --token-env"))
    transport = push_mod.LiveTransport(
        token=token, api_base=api_base, clone_base=clone_base
    )
    report = push_mod.execute(plan, transport)
    for result in report.results:
        status = "ok" if result.ok else "FAILED"
        click.echo(f"  {status}: {result.operation.repo} ({result.detail})")
    if report.failures:
        _fail(GradekitError(f"{len(report.failures)} operation(s) failed"))


@main.command()
@_session_options
@_advanced_options
@click.option("--team-mode", is_flag=True, help="Team grading semantics.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8787, show_default=True)
@click.option(
    "--static-dir",
    default=None,
    help="Directory of built web-UI assets to serve at / "
    "[default: ./frontend/dist when present].",
)
def serve(
    students, questions, github_issues, team_mode, host, port, static_dir, **kwargs
) -> None:
    """Start the local HTTP API (and web UI) over a grading session."""
    import uvicorn

    from .server.app import create_app

    try:
        config = _build_config(
            students=students,
            questions=questions,
            github_issues=github_issues,
            team_mode=team_mode,
            **kwargs,
        )
        session = GradingSession.start(config)
    except GradekitError as exc:
        _fail(exc)
    resolved_static = Path(static_dir) if static_dir else Path("frontend/dist")
    app = create_app(
        session, static_dir=resolved_static if resolved_static.is_dir() else None
    )
    click.echo(f"serving grading session on http://{host}:{port}")
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    finally:
        session.close()


if __name__ == "__main__":
    main()
