"""The interactive grading state machine.

Walks pending (gradee, question) cells, shows the rubric items visible at
each prompt, turns grader input into actions, fires submission open/close
hooks, and commits everything to the progress log. Both the terminal loop
and the HTTP API drive this same actor, one action at a time.
"""

from __future__ import annotations

import shlex
import subprocess
import sys
import threading
from dataclasses import dataclass, field
from pathlib import Path

from . import outputs as outputs_mod
from .errors import (
    AllGradedError,
    InputError,
    SessionBusyError,
    SessionEndedError,
    ValidationError,
    ValidationIssue,
)
from .fsutil import SessionLock, atomic_write_text
from .paths import PathTemplate, check_presence, compile_template, resolve_all
from .progress import CellRecord, GRADED, LogMeta, ProgressLog
from .roster import Gradee, Roster, gradees as roster_gradees, parse_roster
from .rubric import (
    GENERAL_NAME,
    GradingMode,
    RESERVED_ACTION_TOKENS,
    Rubric,
    RubricItem,
    Scope,
    parse_rubric,
    serialize_rubric,
)

# -- actions -----------------------------------------------------------------


@dataclass(frozen=True)
class ApplyCodes:
    codes: tuple[str, ...]


@dataclass(frozen=True)
class PersonalizedMessage:
    text: str


@dataclass(frozen=True)
class NewRubricItem:
    item: RubricItem


@dataclass(frozen=True)
class NoteIssue:
    title: str
    body: str


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Quit:
    pass


Action = ApplyCodes | PersonalizedMessage | NewRubricItem | NoteIssue | Skip | Quit


class FlowStart:
    """Reserved tokens that open a multi-step prompt rather than a one-line action."""

    MESSAGE = "message"
    NEW_ITEM = "new_item"
    ISSUE = "issue"


_FLOW_TOKENS = {"p": FlowStart.MESSAGE, "r": FlowStart.NEW_ITEM, "i": FlowStart.ISSUE}


def parse_input(
    raw: str, visible_codes: set[str], github_issues: bool
) -> Action | str:
    """Map one grader input line to an action or a flow start.

    Reserved single letters (case-insensitive): p = personalized message,
    r = new rubric item, i = note issue, s = skip, q = quit. Anything else is
    a comma/whitespace-separated list of visible prompt codes.
    """
    stripped = raw.strip()
    if not stripped:
        raise InputError("empty input; enter prompt codes or an action letter")
    lowered = stripped.lower()
    if lowered == "q":
        return Quit()
    if lowered == "s":
        return Skip()
    if lowered in _FLOW_TOKENS:
        if lowered == "i" and not github_issues:
            raise InputError(
                "'i' is unavailable: GitHub issue recording is disabled "
                "(enable with --github-issues)"
            )
        return _FLOW_TOKENS[lowered]

    tokens = [t for t in stripped.replace(",", " ").split() if t]
    seen: set[str] = set()
    for token in tokens:
        if token.lower() in RESERVED_ACTION_TOKENS:
            raise InputError(
                f"reserved action token {token!r} cannot be combined with prompt codes"
            )
        if token not in visible_codes:
            raise InputError(f"unknown prompt code {token!r}")
        if token in seen:
            raise InputError(f"prompt code {token!r} given twice")
        seen.add(token)
    return ApplyCodes(codes=tuple(tokens))


# -- configuration and effects ------------------------------------------------


@dataclass(frozen=True)
class SessionConfig:
    rubric_path: str
    roster_path: str
    example_identifier: str
    example_submission_path: str
    example_feedback_path: str
    log_path: str
    grade_sheet_path: str
    mode: GradingMode = GradingMode.NEGATIVE
    team_mode: bool = False
    github_issues: bool = False
    students_to_grade: tuple[str, ...] | None = None
    questions_to_grade: tuple[str, ...] | None = None
    open_hook: str | None = None  # None = platform opener; "none" disables
    close_hook: str | None = None  # None = notice only; "none" disables
    root: Path = Path(".")


@dataclass
class Effects:
    """What an action did besides mutating the log, for the front-end to show."""

    opened: str | None = None
    closed: str | None = None
    finalized: bool = False
    outputs: outputs_mod.OutputsReport | None = None
    notices: list[str] = field(default_factory=list)


class HookRunner:
    """Runs the submission open/close hooks as ``<command> <path>`` via the shell."""

    def __init__(self, open_hook: str | None, close_hook: str | None, root: Path):
        self.open_hook = open_hook
        self.close_hook = close_hook
        self.root = root

    @staticmethod
    def _platform_opener() -> str:
        if sys.platform == "darwin":
            return "open"
        if sys.platform.startswith("win"):
            return "start"
        return "xdg-open"

    def _run(self, command: str, path: str) -> list[str]:
        try:
            result = subprocess.run(
                f"{command} {shlex.quote(path)}",
                shell=True,
                cwd=self.root,
                capture_output=True,
                timeout=30,
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            return [f"warning: hook {command!r} failed for {path}: {exc}"]
        if result.returncode != 0:
            return [f"warning: hook {command!r} exited {result.returncode} for {path}"]
        return []

    def open_submission(self, path: str) -> list[str]:
        if self.open_hook == "none" or self.open_hook == "":
            return []
        command = self.open_hook or self._platform_opener()
        notices = self._run(command, path)
        return notices or [f"opened {path}"]

    def close_submission(self, path: str) -> list[str]:
        if self.close_hook == "none" or self.close_hook == "":
            return []
        if self.close_hook is None:
            return [f"done with {path}; close it when convenient"]
        notices = self._run(self.close_hook, path)
        return notices or [f"closed {path}"]


# -- the session --------------------------------------------------------------


class GradingSession:
    """Single-actor session: exactly one action is processed at a time."""

    def __init__(
        self,
        config: SessionConfig,
        rubric: Rubric,
        roster: Roster,
        all_gradees: list[Gradee],
        log: ProgressLog,
        submission_paths: dict[str, str],
        feedback_template: PathTemplate,
        missing: list[str],
        lock: SessionLock,
        hooks: HookRunner,
    ):
        self.config = config
        self.rubric = rubric
        self.roster = roster
        self.gradees = all_gradees
        self.log = log
        self.submission_paths = submission_paths
        self.feedback_template = feedback_template
        self.missing = missing
        self.ended = False
        self.current: tuple[str, str] | None = None
        self._lock = lock
        self._hooks = hooks
        self._actor = threading.Lock()

    # -- startup ------------------------------------------------------------

    @classmethod
    def start(cls, config: SessionConfig, hooks: HookRunner | None = None) -> "GradingSession":
        root = Path(config.root)
        rubric = parse_rubric(
            (root / config.rubric_path).read_text(encoding="utf-8"), config.mode
        )
        roster = parse_roster(
            (root / config.roster_path).read_text(encoding="utf-8"),
            team_mode=config.team_mode,
        )
        all_gradees = roster_gradees(roster, team_mode=config.team_mode)
        if not all_gradees:
            raise ValidationError([ValidationIssue("roster has no gradees")])
        if not rubric.question_order:
            raise ValidationError(
                [ValidationIssue("rubric has no question-scoped items; nothing to iterate")]
            )

        cls._check_subsets(config, rubric, all_gradees)

        submission_template = compile_template(
            config.example_identifier, config.example_submission_path
        )
        feedback_template = compile_template(
            config.example_identifier, config.example_feedback_path
        )
        submission_paths = resolve_all(submission_template, all_gradees)
        resolve_all(feedback_template, all_gradees)  # collisions surface before grading
        _, missing = check_presence(submission_paths, root=root)

        lock = SessionLock(root / config.log_path)
        lock.acquire()
        try:
            log_file = root / config.log_path
            gradee_ids = [g.identifier for g in all_gradees]
            questions = list(rubric.question_order)
            if log_file.exists():
                log = ProgressLog.load(
                    log_file,
                    expected_gradees=gradee_ids,
                    expected_questions=questions,
                    expect_general=rubric.has_general,
                    expected_mode=config.mode,
                )
            else:
                log = ProgressLog.create(
                    log_file,
                    gradee_order=gradee_ids,
                    question_order=questions,
                    has_general=rubric.has_general,
                    meta=LogMeta.now(
                        rubric_path=config.rubric_path,
                        mode=config.mode,
                        team_mode=config.team_mode,
                    ),
                )

            session = cls(
                config=config,
                rubric=rubric,
                roster=roster,
                all_gradees=all_gradees,
                log=log,
                submission_paths=submission_paths,
                feedback_template=feedback_template,
                missing=missing,
                lock=lock,
                hooks=hooks
                or HookRunner(config.open_hook, config.close_hook, root),
            )
            first = session._next_pending(after=None)
            if first is None:
                raise AllGradedError(
                    "every cell in this session's scope is already graded"
                )
            session.current = first
            return session
        except BaseException:
            lock.release()
            raise

    @staticmethod
    def _check_subsets(
        config: SessionConfig, rubric: Rubric, all_gradees: list[Gradee]
    ) -> None:
        issues: list[ValidationIssue] = []
        if config.students_to_grade is not None:
            known = {g.identifier for g in all_gradees}
            for name in config.students_to_grade:
                if name not in known:
                    issues.append(
                        ValidationIssue(f"--students {name!r} is not a roster gradee")
                    )
        if config.questions_to_grade is not None:
            known_questions = set(rubric.question_order) | {GENERAL_NAME}
            for name in config.questions_to_grade:
                if name not in known_questions:
                    issues.append(
                        ValidationIssue(f"--questions {name!r} is not a rubric question")
                    )
        if issues:
            raise ValidationError(issues)

    # -- iteration ----------------------------------------------------------

    def _gradee_filter(self) -> set[str]:
        wanted = (
            set(self.config.students_to_grade)
            if self.config.students_to_grade is not None
            else {g.identifier for g in self.gradees}
        )
        return wanted - set(self.missing)

    def _question_filter(self) -> set[str] | None:
        if self.config.questions_to_grade is None:
            return None
        return set(self.config.questions_to_grade)

    def _include_general(self) -> bool:
        if not self.rubric.has_general:
            return False
        subset = self.config.questions_to_grade
        return subset is None or GENERAL_NAME in subset

    def _next_pending(self, after: tuple[str, str] | None) -> tuple[str, str] | None:
        return self.log.next_pending(
            gradees=self._gradee_filter(),
            questions=self._question_filter(),
            include_general=self._include_general(),
            after=after,
        )

    # -- snapshots ----------------------------------------------------------

    def visible_items(self) -> tuple[RubricItem, ...]:
        if self.current is None:
            return ()
        return self.rubric.items_for_scope(self.current[1])

    def visible_codes(self) -> set[str]:
        return {item.prompt_code for item in self.visible_items()}

    def counts(self) -> tuple[int, int]:
        graded, total = self.log.counts()
        if self.log.has_general and not self._include_general():
            general_cells = [
                self.log.cell(g, GENERAL_NAME) for g in self.log.gradee_order
            ]
            total -= len(general_cells)
            graded -= sum(1 for c in general_cells if c.status == GRADED)
        return graded, total

    def pending_message(self) -> str:
        if self.current is None:
            return ""
        return self.log.cell(*self.current).personalized_message

    def current_submission_path(self) -> str | None:
        if self.current is None:
            return None
        return self.submission_paths[self.current[0]]

    # -- actions ------------------------------------------------------------

    def open_current_submission(self) -> list[str]:
        """Fire the open hook for the current gradee; called once at startup."""
        path = self.current_submission_path()
        return self._hooks.open_submission(path) if path else []

    def apply(self, action: Action) -> Effects:
        if not self._actor.acquire(blocking=False):
            raise SessionBusyError("another action is already in flight")
        try:
            return self._apply_locked(action)
        finally:
            self._actor.release()

    def _apply_locked(self, action: Action) -> Effects:
        if self.ended:
            raise SessionEndedError("this grading session has ended")
        effects = Effects()

        if isinstance(action, Quit):
            self._close_current(effects)
            self._finalize(effects)
            self._end()
            return effects

        assert self.current is not None  # ended sessions returned above
        gradee, question = self.current

        if isinstance(action, ApplyCodes):
            self._validate_codes(action.codes)
            cell = self.log.cell(gradee, question)
            self.log.commit_cell(
                gradee,
                question,
                CellRecord(
                    gradee=gradee,
                    question=question,
                    applied_codes=tuple(action.codes),
                    personalized_message=cell.personalized_message,
                    issue_title=cell.issue_title,
                    issue_body=cell.issue_body,
                ),
            )
            self._advance(effects)
        elif isinstance(action, PersonalizedMessage):
            self.log.annotate_cell(gradee, question, personalized_message=action.text)
        elif isinstance(action, NewRubricItem):
            self._add_rubric_item(action.item)
        elif isinstance(action, NoteIssue):
            if not self.config.github_issues:
                raise InputError(
                    "GitHub issue recording is disabled (enable with --github-issues)"
                )
            if not action.title.strip():
                raise InputError("issue title must not be empty")
            self.log.annotate_cell(
                gradee, question, issue_title=action.title, issue_body=action.body
            )
        elif isinstance(action, Skip):
            self._advance(effects)
        else:
            raise InputError(f"unsupported action {action!r}")
        return effects

    def _validate_codes(self, codes: tuple[str, ...]) -> None:
        visible = self.visible_codes()
        seen: set[str] = set()
        for code in codes:
            if code not in visible:
                raise InputError(f"unknown prompt code {code!r}")
            if code in seen:
                raise InputError(f"prompt code {code!r} given twice")
            seen.add(code)

    def _add_rubric_item(self, item: RubricItem) -> None:
        applic = item.applicability
        if applic.scope is Scope.QUESTION and applic.question not in self.rubric.question_order:
            raise InputError(
                f"new items must target an existing question, all_questions, or "
                f"general; {applic.question!r} is not in the rubric"
            )
        new_rubric = self.rubric.add_item(item)  # ValidationError propagates
        atomic_write_text(
            Path(self.config.root) / self.config.rubric_path,
            serialize_rubric(new_rubric),
        )
        first_general = new_rubric.has_general and not self.log.has_general
        self.rubric = new_rubric
        if first_general:
            self.log.add_general_cells()

    def _advance(self, effects: Effects) -> None:
        previous = self.current
        assert previous is not None
        nxt = self._next_pending(after=previous)
        self.current = nxt
        if nxt is None:
            self._close_current(effects, path=self.submission_paths[previous[0]])
            self._finalize(effects)
            self._end()
            return
        if nxt[0] != previous[0]:
            self._close_current(effects, path=self.submission_paths[previous[0]])
            opened = self.submission_paths[nxt[0]]
            effects.opened = opened
            effects.notices.extend(self._hooks.open_submission(opened))

    def _close_current(self, effects: Effects, path: str | None = None) -> None:
        target = path or self.current_submission_path()
        if target is not None:
            effects.closed = target
            effects.notices.extend(self._hooks.close_submission(target))

    def _finalize(self, effects: Effects) -> None:
        report = outputs_mod.generate_outputs(
            roster=self.roster,
            the_gradees=self.gradees,
            log=self.log,
            rubric=self.rubric,
            missing=set(self.missing),
            feedback_template=self.feedback_template,
            grade_sheet_path=self.config.grade_sheet_path,
            root=self.config.root,
            team_mode=self.config.team_mode,
        )
        effects.finalized = True
        effects.outputs = report

    def _end(self) -> None:
        self.ended = True
        self.current = None
        self._lock.release()

    def close(self) -> None:
        """Release the session lock without finalizing (abnormal exits)."""
        self._lock.release()
