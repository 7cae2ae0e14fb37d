"""Derive the final grade sheet and feedback documents from rubric + log.

Both outputs are pure recomputations: run them again after editing a point
value or a feedback text in the rubric and the change propagates, because the
log stores prompt codes, never grades.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path

from .errors import (
    AxesMismatchError,
    UnknownCodeError,
    UnknownGradeeError,
    ValidationError,
    ValidationIssue,
)
from .fsutil import atomic_write_text
from .paths import PathTemplate, resolve_all
from .progress import GRADED, ProgressLog
from .roster import ID_COLUMN, TEAM_COLUMN, Gradee, Roster
from .rubric import GENERAL_NAME, GradingMode, Rubric

STATUS_COMPLETE = "COMPLETE"
STATUS_PARTIAL = "PARTIAL"
STATUS_MISSING = "MISSING_SUBMISSION"

_QUANTUM = Decimal("0.0001")


def format_points(value: Decimal) -> str:
    """Up to 4 fractional digits, trailing zeros trimmed, never scientific."""
    quantized = value.quantize(_QUANTUM, rounding=ROUND_HALF_EVEN)
    text = format(quantized, "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return "0" if text == "-0" else text


def _item_by_code(rubric: Rubric, scope: str, code: str):
    for item in rubric.items_for_scope(scope):
        if item.prompt_code == code:
            return item
    raise UnknownCodeError(f"code {code!r} is not visible for {scope!r}")


def compute_cell_grade(
    rubric: Rubric, question: str, codes: tuple[str, ...] | list[str]
) -> tuple[Decimal, list[str]]:
    """Grade for one question cell, plus out-of-range warnings.

    Negative grading starts from the question total and subtracts; positive
    grading sums the applied points. No clamping: a result outside
    [0, total] usually means a rubric mistake, and silently hiding it would
    be worse than reporting it.
    """
    total = rubric.total_for(question)
    applied = Decimal(0)
    for code in codes:
        applied += _item_by_code(rubric, question, code).points
    if rubric.mode is GradingMode.NEGATIVE:
        grade = total - applied
    else:
        grade = applied
    warnings = []
    if grade < 0:
        warnings.append(f"grade {format_points(grade)} is below zero")
    elif grade > total:
        warnings.append(
            f"grade {format_points(grade)} exceeds the question total {format_points(total)}"
        )
    return grade, warnings


def compute_general_adjustment(rubric: Rubric, codes: tuple[str, ...]) -> Decimal:
    """Signed adjustment the overall step adds to the assignment total."""
    applied = Decimal(0)
    for code in codes:
        applied += _item_by_code(rubric, GENERAL_NAME, code).points
    return -applied if rubric.mode is GradingMode.NEGATIVE else applied


@dataclass
class GradeSheet:
    columns: list[str]
    rows: list[dict[str, str]]

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.DictWriter(out, fieldnames=self.columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.rows)
        return out.getvalue()


def build_grade_sheet(
    roster: Roster,
    log: ProgressLog,
    rubric: Rubric,
    missing: set[str] | None = None,
    team_mode: bool = False,
) -> GradeSheet:
    """One row per roster row: all roster columns verbatim, then the grades.

    Team members share their team's cells, so they come out with identical
    grade columns. Missing submissions get blank grades; a gradee with any
    ungraded question gets no assignment total, to keep misleading numbers
    out of circulation.
    """
    missing = missing or set()
    questions = list(log.question_order)
    if list(rubric.question_order) != questions:
        raise AxesMismatchError(
            f"rubric questions {list(rubric.question_order)} do not match "
            f"log questions {questions}"
        )
    log_gradees = set(log.gradee_order)
    roster_gradees = {
        row[TEAM_COLUMN] if team_mode else row[ID_COLUMN] for row in roster.rows
    }
    if roster_gradees != log_gradees:
        raise AxesMismatchError(
            f"roster gradees {sorted(roster_gradees)} do not match "
            f"log gradees {sorted(log_gradees)}"
        )

    include_general = rubric.has_general and log.has_general
    grade_columns = [f"grade_{q}" for q in questions]
    if include_general:
        grade_columns.append("grade_general")
    extra = grade_columns + ["assignment_total", "status", "warnings"]
    clash = [c for c in extra if c in roster.columns]
    if clash:
        raise ValidationError(
            [
                ValidationIssue(
                    f"roster column {c!r} collides with a generated grade-sheet column"
                )
                for c in clash
            ]
        )

    rows: list[dict[str, str]] = []
    for roster_row in roster.rows:
        gradee_id = roster_row[TEAM_COLUMN] if team_mode else roster_row[ID_COLUMN]
        out = {column: roster_row[column] for column in roster.columns}
        for column in extra:
            out[column] = ""

        if gradee_id in missing:
            out["status"] = STATUS_MISSING
            rows.append(out)
            continue

        warnings: list[str] = []
        partial = False
        total = Decimal(0)
        for question in questions:
            cell = log.cell(gradee_id, question)
            if cell.status != GRADED:
                partial = True
                continue
            grade, cell_warnings = compute_cell_grade(rubric, question, cell.applied_codes)
            out[f"grade_{question}"] = format_points(grade)
            warnings.extend(f"{question}: {w}" for w in cell_warnings)
            total += grade

        if include_general:
            general_cell = log.cell(gradee_id, GENERAL_NAME)
            if general_cell.status == GRADED:
                adjustment = compute_general_adjustment(rubric, general_cell.applied_codes)
                out["grade_general"] = format_points(adjustment)
                total += adjustment

        out["status"] = STATUS_PARTIAL if partial else STATUS_COMPLETE
        if not partial:
            out["assignment_total"] = format_points(total)
        out["warnings"] = "; ".join(warnings)
        rows.append(out)

    return GradeSheet(columns=list(roster.columns) + extra, rows=rows)


def render_feedback(gradee: str, log: ProgressLog, rubric: Rubric) -> str:
    """Markdown feedback document for one gradee."""
    if gradee not in log.gradee_order:
        raise UnknownGradeeError(f"gradee {gradee!r} is not in the progress log")

    lines: list[str] = [f"# Feedback for {gradee}"]
    for question in log.question_order:
        cell = log.cell(gradee, question)
        total = rubric.total_for(question)
        if cell.status != GRADED:
            lines.append("")
            lines.append(f"## {question} — (not graded)")
            if cell.personalized_message:
                lines.append("")
                lines.append(f"*{cell.personalized_message}*")
            continue
        grade, _ = compute_cell_grade(rubric, question, cell.applied_codes)
        lines.append("")
        lines.append(f"## {question} — {format_points(grade)}/{format_points(total)}")
        for code in cell.applied_codes:
            item = _item_by_code(rubric, question, code)
            lines.append("")
            lines.append(f"- {item.feedback}")
        if cell.personalized_message:
            lines.append("")
            lines.append(f"*{cell.personalized_message}*")

    if rubric.has_general and log.has_general:
        cell = log.cell(gradee, GENERAL_NAME)
        if cell.applied_codes or cell.personalized_message:
            lines.append("")
            lines.append("## Overall")
            for code in cell.applied_codes:
                item = _item_by_code(rubric, GENERAL_NAME, code)
                lines.append("")
                lines.append(f"- {item.feedback}")
            if cell.personalized_message:
                lines.append("")
                lines.append(f"*{cell.personalized_message}*")

    return "\n".join(lines) + "\n"


@dataclass
class OutputsReport:
    grade_sheet_path: Path
    feedback_files: dict[str, Path]  # gradee -> written path


def write_outputs(
    sheet: GradeSheet,
    feedback_docs: dict[str, str],
    feedback_paths: dict[str, str],
    grade_sheet_path: Path | str,
    root: Path | str = ".",
) -> OutputsReport:
    """Write the grade sheet and one feedback file per gradee, atomically."""
    root = Path(root)
    sheet_path = root / Path(grade_sheet_path)
    atomic_write_text(sheet_path, sheet.to_csv())
    written: dict[str, Path] = {}
    for gradee, text in feedback_docs.items():
        target = root / Path(feedback_paths[gradee])
        atomic_write_text(target, text)
        written[gradee] = target
    return OutputsReport(grade_sheet_path=sheet_path, feedback_files=written)


def generate_outputs(
    roster: Roster,
    the_gradees: list[Gradee],
    log: ProgressLog,
    rubric: Rubric,
    missing: set[str],
    feedback_template: PathTemplate,
    grade_sheet_path: Path | str,
    root: Path | str = ".",
    team_mode: bool = False,
) -> OutputsReport:
    """Regenerate every output from the current rubric + log state.

    Gradees with a missing submission get no feedback file — there was
    nothing to grade.
    """
    sheet = build_grade_sheet(roster, log, rubric, missing=missing, team_mode=team_mode)
    feedback_paths = resolve_all(feedback_template, the_gradees)
    docs = {
        g.identifier: render_feedback(g.identifier, log, rubric)
        for g in the_gradees
        if g.identifier not in missing
    }
    return write_outputs(sheet, docs, feedback_paths, grade_sheet_path, root=root)
