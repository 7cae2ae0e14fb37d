"""Rubric parsing, validation, templating, and mutation.

The rubric is a CSV with header
``name,total_points,prompt_code,prompt_message,feedback,<points column>``
where the points column is ``points_to_remove`` under negative grading and
``points_to_add`` under positive grading. The ``name`` column holds either a
question name, the literal ``all_questions``, or the literal ``general``.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, replace
from decimal import Decimal
from enum import Enum

from .errors import (
    MalformedTableError,
    UnknownQuestionError,
    ValidationError,
    ValidationIssue,
)

# Single-letter commands the interactive loop reserves for itself. Rubric
# prompt codes must not collide with these (case-insensitively), or grader
# input would be ambiguous.
RESERVED_ACTION_TOKENS = frozenset({"p", "r", "i", "s", "q"})

# Spellings of the non-question scopes in the rubric file's name column.
ALL_QUESTIONS_NAME = "all_questions"
GENERAL_NAME = "general"

_POINTS_RE = re.compile(r"^(\d+(\.\d*)?|\.\d+)$")
_CODE_FORBIDDEN_RE = re.compile(r"[\s,;]")
_ANY_QUESTION = "\x00any-question"  # internal scope label, never a real name


class GradingMode(str, Enum):
    NEGATIVE = "negative"
    POSITIVE = "positive"

    @property
    def points_column(self) -> str:
        return "points_to_remove" if self is GradingMode.NEGATIVE else "points_to_add"


class Scope(str, Enum):
    QUESTION = "question"
    ALL_QUESTIONS = "all_questions"
    GENERAL = "general"


@dataclass(frozen=True)
class Applicability:
    """Where a rubric item is offered: one question, every question, or the overall step."""

    scope: Scope
    question: str | None = None

    def __post_init__(self) -> None:
        if self.scope is Scope.QUESTION:
            if not self.question or self.question != self.question.strip():
                raise ValueError("question name must be non-empty with no surrounding whitespace")
        elif self.question is not None:
            raise ValueError(f"{self.scope.value} applicability carries no question name")

    @classmethod
    def for_question(cls, name: str) -> "Applicability":
        return cls(Scope.QUESTION, name)

    @property
    def file_name(self) -> str:
        """Value written to the rubric file's name column."""
        if self.scope is Scope.QUESTION:
            assert self.question is not None
            return self.question
        return ALL_QUESTIONS_NAME if self.scope is Scope.ALL_QUESTIONS else GENERAL_NAME


ALL_QUESTIONS = Applicability(Scope.ALL_QUESTIONS)
GENERAL = Applicability(Scope.GENERAL)


@dataclass(frozen=True)
class RubricItem:
    applicability: Applicability
    prompt_code: str
    prompt_message: str
    feedback: str
    points: Decimal
    total_points: Decimal | None = None  # required for question items, ignored otherwise

    def __post_init__(self) -> None:
        # Magnitudes only; the grading mode supplies the direction.
        if self.points < 0:
            raise ValueError(f"points must be non-negative, got {self.points}")
        if self.total_points is not None and self.total_points < 0:
            raise ValueError(f"total_points must be non-negative, got {self.total_points}")


@dataclass(frozen=True)
class Rubric:
    items: tuple[RubricItem, ...]
    mode: GradingMode

    @property
    def question_order(self) -> tuple[str, ...]:
        """Question names in first-appearance order."""
        seen: list[str] = []
        for item in self.items:
            if item.applicability.scope is Scope.QUESTION:
                name = item.applicability.question
                if name not in seen:
                    seen.append(name)  # type: ignore[arg-type]
        return tuple(seen)

    @property
    def has_general(self) -> bool:
        return any(item.applicability.scope is Scope.GENERAL for item in self.items)

    def total_for(self, question: str) -> Decimal:
        for item in self.items:
            if item.applicability == Applicability.for_question(question):
                assert item.total_points is not None
                return item.total_points
        raise UnknownQuestionError(f"question {question!r} is not in the rubric")

    def items_for_scope(self, scope: str) -> tuple[RubricItem, ...]:
        """Items visible at one prompt.

        For a question: its own items followed by all_questions items, in
        rubric order. For ``general``: the general items only.
        """
        if scope == GENERAL_NAME:
            return tuple(i for i in self.items if i.applicability.scope is Scope.GENERAL)
        if scope not in self.question_order:
            raise UnknownQuestionError(f"question {scope!r} is not in the rubric")
        own = tuple(
            i for i in self.items if i.applicability == Applicability.for_question(scope)
        )
        shared = tuple(i for i in self.items if i.applicability.scope is Scope.ALL_QUESTIONS)
        return own + shared

    def visible_codes(self, scope: str) -> set[str]:
        return {item.prompt_code for item in self.items_for_scope(scope)}

    def add_item(self, item: RubricItem) -> "Rubric":
        """Return a new rubric with ``item`` appended; all invariants re-checked."""
        candidate = item
        if item.applicability.scope is Scope.QUESTION:
            question = item.applicability.question
            assert question is not None
            if question in self.question_order:
                existing_total = self.total_for(question)
                if item.total_points is None:
                    candidate = replace(item, total_points=existing_total)
        else:
            if item.total_points is not None:
                candidate = replace(item, total_points=None)
        extended = Rubric(items=self.items + (candidate,), mode=self.mode)
        issues: list[ValidationIssue] = []
        code_problem = _validate_code(candidate.prompt_code)
        if code_problem:
            issues.append(ValidationIssue(code_problem))
        issues.extend(_validate_items(extended.items))
        if issues:
            raise ValidationError(issues)
        return extended


def _validate_code(code: str) -> str | None:
    if not code:
        return "prompt_code is empty"
    if _CODE_FORBIDDEN_RE.search(code):
        return f"prompt_code {code!r} contains whitespace, a comma, or a semicolon"
    if code.lower() in RESERVED_ACTION_TOKENS:
        return f"prompt_code {code!r} collides with a reserved action token"
    return None


def parse_points(text: str) -> Decimal | None:
    if not _POINTS_RE.match(text):
        return None
    return Decimal(text)


def _validate_items(
    items: tuple[RubricItem, ...], rows: list[int] | None = None
) -> list[ValidationIssue]:
    """Checks that only make sense across the whole item list."""
    at = (lambda i: rows[i]) if rows is not None else (lambda i: None)
    issues: list[ValidationIssue] = []

    totals: dict[str, Decimal] = {}
    for idx, item in enumerate(items):
        if item.applicability.scope is not Scope.QUESTION:
            continue
        question = item.applicability.question
        assert question is not None
        if item.total_points is None:
            issues.append(
                ValidationIssue(f"question {question!r} item has no total_points", at(idx))
            )
        elif question in totals:
            if item.total_points != totals[question]:
                issues.append(
                    ValidationIssue(
                        f"inconsistent total_points for question {question!r}: "
                        f"{totals[question]} vs {item.total_points}",
                        at(idx),
                    )
                )
        else:
            totals[question] = item.total_points

    if not items:
        issues.append(ValidationIssue("rubric has no items"))

    # Duplicate prompt codes, per visible scope: each question sees its own
    # items plus the all_questions items; the overall step sees general items.
    # Without any question yet, all_questions items still form one future scope.
    questions: list[str] = []
    for item in items:
        if item.applicability.scope is Scope.QUESTION and item.applicability.question not in questions:
            questions.append(item.applicability.question)  # type: ignore[arg-type]
    scopes: list[str] = (questions or [_ANY_QUESTION]) + [GENERAL_NAME]
    reported: set[tuple[str, int]] = set()
    for scope_name in scopes:
        seen: dict[str, int] = {}
        for idx, item in enumerate(items):
            applic = item.applicability
            if scope_name == GENERAL_NAME:
                visible = applic.scope is Scope.GENERAL
            elif scope_name == _ANY_QUESTION:
                visible = applic.scope is Scope.ALL_QUESTIONS
            else:
                visible = applic.scope is Scope.ALL_QUESTIONS or applic == Applicability.for_question(
                    scope_name
                )
            if not visible:
                continue
            if item.prompt_code in seen:
                key = (item.prompt_code, idx)
                if key not in reported:
                    reported.add(key)
                    where = (
                        "any question" if scope_name == _ANY_QUESTION else repr(scope_name)
                    )
                    issues.append(
                        ValidationIssue(
                            f"prompt_code {item.prompt_code!r} appears twice in the "
                            f"scope visible at {where}",
                            at(idx),
                        )
                    )
            else:
                seen[item.prompt_code] = idx
    return issues


def parse_rubric(csv_text: str, mode: GradingMode) -> Rubric:
    """Parse and fully validate rubric CSV; raises with every violation listed."""
    if "\x00" in csv_text:
        raise MalformedTableError("rubric contains NUL bytes; not a text CSV")
    try:
        reader = csv.reader(io.StringIO(csv_text))
        raw_rows = list(reader)
    except csv.Error as exc:
        raise MalformedTableError(f"rubric is not parseable CSV: {exc}") from exc
    if not raw_rows:
        raise MalformedTableError("rubric file is empty")

    expected = ["name", "total_points", "prompt_code", "prompt_message", "feedback"]
    header = [cell.strip() for cell in raw_rows[0]]
    issues: list[ValidationIssue] = []
    if header[:5] != expected or len(header) != 6:
        raise ValidationError(
            [
                ValidationIssue(
                    "header must be exactly: name, total_points, prompt_code, "
                    f"prompt_message, feedback, {mode.points_column}",
                    row=1,
                )
            ]
        )
    if header[5] != mode.points_column:
        other = (
            GradingMode.POSITIVE if mode is GradingMode.NEGATIVE else GradingMode.NEGATIVE
        )
        detail = (
            f"this rubric uses {other.value} grading"
            if header[5] == other.points_column
            else f"unknown column {header[5]!r}"
        )
        raise ValidationError(
            [
                ValidationIssue(
                    f"points column must be {mode.points_column!r} in {mode.value} "
                    f"grading mode; {detail}",
                    row=1,
                )
            ]
        )

    items: list[RubricItem] = []
    rows: list[int] = []
    for offset, raw in enumerate(raw_rows[1:], start=2):
        if not raw:
            continue  # blank line
        if len(raw) != 6:
            raise MalformedTableError(
                f"rubric row {offset} has {len(raw)} fields, expected 6"
            )
        # Prompt messages and feedback are kept verbatim; structural fields
        # tolerate stray whitespace.
        name = raw[0].strip()
        total_text = raw[1].strip()
        code = raw[2].strip()
        message = raw[3]
        feedback = raw[4]
        points_text = raw[5].strip()

        if not name:
            issues.append(ValidationIssue("name column is empty", offset))
            continue
        lowered = name.lower()
        if lowered == ALL_QUESTIONS_NAME:
            applicability = ALL_QUESTIONS
        elif lowered == GENERAL_NAME:
            applicability = GENERAL
        else:
            applicability = Applicability.for_question(name)

        code_problem = _validate_code(code)
        if code_problem:
            issues.append(ValidationIssue(code_problem, offset))
            continue

        points = parse_points(points_text)
        if points is None:
            issues.append(
                ValidationIssue(
                    f"{mode.points_column} {points_text!r} is not a non-negative decimal",
                    offset,
                )
            )
            continue

        total: Decimal | None = None
        if applicability.scope is Scope.QUESTION:
            total = parse_points(total_text)
            if total is None:
                issues.append(
                    ValidationIssue(
                        f"total_points {total_text!r} is not a non-negative decimal",
                        offset,
                    )
                )
                continue

        items.append(
            RubricItem(
                applicability=applicability,
                prompt_code=code,
                prompt_message=message,
                feedback=feedback,
                points=points,
                total_points=total,
            )
        )
        rows.append(offset)

    issues.extend(_validate_items(tuple(items), rows))
    if issues:
        raise ValidationError(issues)
    return Rubric(items=tuple(items), mode=mode)


def rubric_template(mode: GradingMode = GradingMode.NEGATIVE) -> str:
    """Header-only rubric CSV; append data rows and it parses."""
    return (
        f"name,total_points,prompt_code,prompt_message,feedback,{mode.points_column}\n"
    )


def serialize_rubric(rubric: Rubric) -> str:
    """Inverse of parse_rubric: parse(serialize(r), r.mode) == r."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        ["name", "total_points", "prompt_code", "prompt_message", "feedback",
         rubric.mode.points_column]
    )
    for item in rubric.items:
        writer.writerow(
            [
                item.applicability.file_name,
                "" if item.total_points is None else str(item.total_points),
                item.prompt_code,
                item.prompt_message,
                item.feedback,
                str(item.points),
            ]
        )
    return out.getvalue()
