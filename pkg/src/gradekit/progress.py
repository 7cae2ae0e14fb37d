"""The grading progress log: prompt codes and unique texts, never grades.

Everything derivable (grades, feedback documents) is recomputed from this log
plus the current rubric, which is what makes pausing, resuming, re-pricing
rubric items, and regrading safe. One CSV row per (gradee, question) cell; a
JSON side-file carries session metadata. Writes are atomic replaces, rows are
kept in a canonical order so that committing one cell changes exactly one
line on disk.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

from .errors import (
    AxesMismatchError,
    MalformedLogError,
    UnknownCellError,
)
from .fsutil import atomic_write_text
from .rubric import GENERAL_NAME, GradingMode

_COLUMNS = [
    "gradee_identifier",
    "question",
    "applied_codes",
    "personalized_message",
    "issue_title",
    "issue_body",
    "status",
]

UNGRADED = "ungraded"
GRADED = "graded"

# Prompt codes may not contain ";" (enforced by rubric validation), so the
# join below is unambiguous.
_CODE_SEP = ";"


@dataclass
class CellRecord:
    gradee: str
    question: str
    applied_codes: tuple[str, ...] = ()
    personalized_message: str = ""
    issue_title: str = ""
    issue_body: str = ""
    status: str = UNGRADED

    def __post_init__(self) -> None:
        if len(set(self.applied_codes)) != len(self.applied_codes):
            raise ValueError(f"duplicate prompt codes in cell record: {self.applied_codes}")
        if self.status not in (UNGRADED, GRADED):
            raise ValueError(f"bad cell status {self.status!r}")


@dataclass
class LogMeta:
    created_at: str
    rubric_path: str
    mode: str
    team_mode: bool = False

    @classmethod
    def now(cls, rubric_path: str, mode: GradingMode, team_mode: bool) -> "LogMeta":
        return cls(
            created_at=datetime.now(timezone.utc).isoformat(),
            rubric_path=rubric_path,
            mode=mode.value,
            team_mode=team_mode,
        )


@dataclass
class ProgressLog:
    path: Path
    gradee_order: tuple[str, ...]
    question_order: tuple[str, ...]  # question names only; the overall step is separate
    has_general: bool
    meta: LogMeta
    cells: dict[tuple[str, str], CellRecord] = field(default_factory=dict)

    # -- construction -------------------------------------------------------

    @classmethod
    def create(
        cls,
        path: Path | str,
        gradee_order: list[str],
        question_order: list[str],
        has_general: bool,
        meta: LogMeta,
    ) -> "ProgressLog":
        """Fresh all-ungraded log, persisted immediately."""
        if not gradee_order:
            raise ValueError("cannot initialize a log with no gradees")
        if not question_order:
            raise ValueError("cannot initialize a log with no questions")
        log = cls(
            path=Path(path),
            gradee_order=tuple(gradee_order),
            question_order=tuple(question_order),
            has_general=has_general,
            meta=meta,
        )
        for gradee, question in log._axis_cells():
            log.cells[(gradee, question)] = CellRecord(gradee=gradee, question=question)
        log.save()
        return log

    @classmethod
    def load(
        cls,
        path: Path | str,
        expected_gradees: list[str] | None = None,
        expected_questions: list[str] | None = None,
        expect_general: bool | None = None,
        expected_mode: GradingMode | None = None,
    ) -> "ProgressLog":
        """Load and cross-check against the current roster/rubric axes.

        A changed gradee or question axis means the inputs no longer describe
        the recorded progress; that needs explicit operator action, not a
        silent guess. A rubric that gained its first general item is the one
        tolerated change: the missing overall cells are added, ungraded.
        """
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise MalformedLogError(f"cannot read progress log {path}: {exc}") from exc
        try:
            rows = list(csv.reader(io.StringIO(text)))
        except csv.Error as exc:
            raise MalformedLogError(f"progress log is not parseable CSV: {exc}") from exc
        if not rows or rows[0] != _COLUMNS:
            raise MalformedLogError(f"progress log {path} has a wrong or missing header")

        cells: dict[tuple[str, str], CellRecord] = {}
        gradee_order: list[str] = []
        questions_seen: list[str] = []
        for offset, raw in enumerate(rows[1:], start=2):
            if not raw:
                continue
            if len(raw) != len(_COLUMNS):
                raise MalformedLogError(
                    f"progress log row {offset} has {len(raw)} fields, "
                    f"expected {len(_COLUMNS)}"
                )
            gradee, question, codes_text, message, title, body, status = raw
            if status not in (UNGRADED, GRADED):
                raise MalformedLogError(f"progress log row {offset}: bad status {status!r}")
            codes = tuple(codes_text.split(_CODE_SEP)) if codes_text else ()
            if any(not c for c in codes):
                raise MalformedLogError(f"progress log row {offset}: empty prompt code")
            key = (gradee, question)
            if key in cells:
                raise MalformedLogError(
                    f"progress log row {offset}: duplicate cell {key!r}"
                )
            try:
                cells[key] = CellRecord(
                    gradee=gradee,
                    question=question,
                    applied_codes=codes,
                    personalized_message=message,
                    issue_title=title,
                    issue_body=body,
                    status=status,
                )
            except ValueError as exc:
                raise MalformedLogError(f"progress log row {offset}: {exc}") from exc
            if gradee not in gradee_order:
                gradee_order.append(gradee)
            if question != GENERAL_NAME and question not in questions_seen:
                questions_seen.append(question)

        if not cells:
            raise MalformedLogError(f"progress log {path} has no cells")
        has_general = any(q == GENERAL_NAME for _, q in cells)
        meta = cls._load_meta(path)

        log = cls(
            path=path,
            gradee_order=tuple(gradee_order),
            question_order=tuple(questions_seen),
            has_general=has_general,
            meta=meta,
        )
        log.cells = cells
        expected_keys = set(log._axis_cells())
        actual_keys = set(cells)
        if expected_keys != actual_keys:
            raise MalformedLogError(
                f"progress log {path} does not cover the full gradee x question grid"
            )

        if expected_gradees is not None and list(log.gradee_order) != list(expected_gradees):
            raise AxesMismatchError(
                "roster gradees changed since this log was created: "
                f"log has {list(log.gradee_order)}, inputs give {list(expected_gradees)}"
            )
        if expected_questions is not None and list(log.question_order) != list(
            expected_questions
        ):
            raise AxesMismatchError(
                "rubric questions changed since this log was created: "
                f"log has {list(log.question_order)}, rubric gives {list(expected_questions)}"
            )
        if expected_mode is not None and meta.mode and meta.mode != expected_mode.value:
            raise AxesMismatchError(
                f"this log was created under {meta.mode} grading; "
                f"rerun in that mode or start a fresh log"
            )
        if expect_general and not log.has_general:
            log.has_general = True
            for gradee in log.gradee_order:
                log.cells[(gradee, GENERAL_NAME)] = CellRecord(
                    gradee=gradee, question=GENERAL_NAME
                )
            log.save()
        return log

    # -- persistence --------------------------------------------------------

    @property
    def meta_path(self) -> Path:
        return Path(f"{self.path}.meta.json")

    @classmethod
    def _load_meta(cls, path: Path) -> LogMeta:
        meta_path = Path(f"{path}.meta.json")
        if not meta_path.exists():
            return LogMeta(created_at="", rubric_path="", mode="")
        try:
            data = json.loads(meta_path.read_text(encoding="utf-8"))
            return LogMeta(
                created_at=data.get("created_at", ""),
                rubric_path=data.get("rubric_path", ""),
                mode=data.get("mode", ""),
                team_mode=bool(data.get("team_mode", False)),
            )
        except (json.JSONDecodeError, TypeError) as exc:
            raise MalformedLogError(f"bad meta side-file {meta_path}: {exc}") from exc

    def _axis_cells(self):
        for gradee in self.gradee_order:
            for question in self.question_order:
                yield gradee, question
            if self.has_general:
                yield gradee, GENERAL_NAME

    def serialize(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(_COLUMNS)
        for key in self._axis_cells():
            cell = self.cells[key]
            writer.writerow(
                [
                    cell.gradee,
                    cell.question,
                    _CODE_SEP.join(cell.applied_codes),
                    cell.personalized_message,
                    cell.issue_title,
                    cell.issue_body,
                    cell.status,
                ]
            )
        return out.getvalue()

    def save(self) -> None:
        atomic_write_text(self.path, self.serialize())
        meta = {
            "created_at": self.meta.created_at,
            "rubric_path": self.meta.rubric_path,
            "mode": self.meta.mode,
            "team_mode": self.meta.team_mode,
        }
        atomic_write_text(self.meta_path, json.dumps(meta, indent=2) + "\n")

    # -- cell operations ----------------------------------------------------

    def _require_cell(self, gradee: str, question: str) -> CellRecord:
        try:
            return self.cells[(gradee, question)]
        except KeyError:
            raise UnknownCellError(
                f"no cell for gradee {gradee!r}, question {question!r}"
            ) from None

    def commit_cell(self, gradee: str, question: str, record: CellRecord) -> None:
        """Replace the whole cell (regrades overwrite old input) and persist."""
        self._require_cell(gradee, question)
        self.cells[(gradee, question)] = replace(
            record, gradee=gradee, question=question, status=GRADED
        )
        self.save()

    def annotate_cell(
        self,
        gradee: str,
        question: str,
        personalized_message: str | None = None,
        issue_title: str | None = None,
        issue_body: str | None = None,
    ) -> None:
        """Record texts on a cell without grading it, so they survive a pause."""
        cell = self._require_cell(gradee, question)
        if personalized_message is not None:
            cell.personalized_message = personalized_message
        if issue_title is not None:
            cell.issue_title = issue_title
        if issue_body is not None:
            cell.issue_body = issue_body
        self.save()

    def next_pending(
        self,
        gradees: set[str] | None = None,
        questions: set[str] | None = None,
        include_general: bool = True,
        after: tuple[str, str] | None = None,
    ) -> tuple[str, str] | None:
        """First ungraded cell in gradee-major order, overall step last per gradee.

        With ``after``, only cells strictly beyond that position count: a
        skipped cell stays ungraded but is not offered again until the next
        session.
        """
        passed = after is None
        for gradee, question in self._axis_cells():
            if not passed:
                if (gradee, question) == after:
                    passed = True
                continue
            if gradees is not None and gradee not in gradees:
                continue
            if question == GENERAL_NAME and not include_general:
                continue
            if questions is not None and question not in questions:
                continue
            if self.cells[(gradee, question)].status == UNGRADED:
                return gradee, question
        return None

    def add_general_cells(self) -> None:
        """Add the overall step for every gradee; the rubric gained its first general item."""
        if self.has_general:
            return
        self.has_general = True
        for gradee in self.gradee_order:
            self.cells[(gradee, GENERAL_NAME)] = CellRecord(
                gradee=gradee, question=GENERAL_NAME
            )
        self.save()

    def clear_cells(self, gradees: list[str], questions: list[str]) -> None:
        """Reset every named (gradee, question) cell to ungraded, contents erased."""
        if not gradees or not questions:
            raise ValueError("clear_cells needs non-empty gradee and question subsets")
        for gradee in gradees:
            for question in questions:
                self._require_cell(gradee, question)
        for gradee in gradees:
            for question in questions:
                self.cells[(gradee, question)] = CellRecord(
                    gradee=gradee, question=question
                )
        self.save()

    # -- queries ------------------------------------------------------------

    def counts(self) -> tuple[int, int]:
        """(graded, total) over the whole grid."""
        keys = list(self._axis_cells())
        graded = sum(1 for k in keys if self.cells[k].status == GRADED)
        return graded, len(keys)

    def cell(self, gradee: str, question: str) -> CellRecord:
        return self._require_cell(gradee, question)
