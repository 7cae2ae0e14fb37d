"""Class roster parsing and gradee grouping.

The roster is a CSV with one required column, ``student_identifier``; every
other column is carried through verbatim to the final grade sheet. Team
grading additionally requires a ``team_identifier`` column, and the team
identifier then stands in for the student identifier everywhere.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .errors import MalformedTableError, ValidationError, ValidationIssue

ID_COLUMN = "student_identifier"
TEAM_COLUMN = "team_identifier"


@dataclass(frozen=True)
class Roster:
    columns: tuple[str, ...]
    rows: tuple[dict[str, str], ...]

    @property
    def identifiers(self) -> tuple[str, ...]:
        return tuple(row[ID_COLUMN] for row in self.rows)


@dataclass(frozen=True)
class Gradee:
    """The unit receiving a grade: a student, or a team sharing one grade."""

    identifier: str
    members: tuple[str, ...]


def parse_roster(csv_text: str, team_mode: bool = False) -> Roster:
    if "\x00" in csv_text:
        raise MalformedTableError("roster contains NUL bytes; not a text CSV")
    try:
        raw_rows = list(csv.reader(io.StringIO(csv_text)))
    except csv.Error as exc:
        raise MalformedTableError(f"roster is not parseable CSV: {exc}") from exc
    if not raw_rows:
        raise MalformedTableError("roster file is empty")

    columns = tuple(cell.strip() for cell in raw_rows[0])
    issues: list[ValidationIssue] = []
    if len(set(columns)) != len(columns):
        raise MalformedTableError("roster header repeats a column name")
    if ID_COLUMN not in columns:
        issues.append(ValidationIssue(f"roster has no {ID_COLUMN!r} column", row=1))
    if team_mode and TEAM_COLUMN not in columns:
        issues.append(
            ValidationIssue(f"team grading needs a {TEAM_COLUMN!r} column", row=1)
        )
    if issues:
        raise ValidationError(issues)

    rows: list[dict[str, str]] = []
    seen: dict[str, int] = {}
    for offset, raw in enumerate(raw_rows[1:], start=2):
        if not raw:
            continue
        if len(raw) != len(columns):
            raise MalformedTableError(
                f"roster row {offset} has {len(raw)} fields, expected {len(columns)}"
            )
        record = dict(zip(columns, raw))
        identifier = record[ID_COLUMN].strip()
        record[ID_COLUMN] = identifier
        if not identifier:
            issues.append(ValidationIssue("empty student_identifier", offset))
        elif identifier in seen:
            issues.append(
                ValidationIssue(
                    f"duplicate student_identifier {identifier!r} "
                    f"(first seen on row {seen[identifier]})",
                    offset,
                )
            )
        else:
            seen[identifier] = offset
        if team_mode:
            team = record[TEAM_COLUMN].strip()
            record[TEAM_COLUMN] = team
            if not team:
                issues.append(ValidationIssue("empty team_identifier", offset))
        rows.append(record)

    if issues:
        raise ValidationError(issues)
    return Roster(columns=columns, rows=tuple(rows))


def gradees(roster: Roster, team_mode: bool = False) -> list[Gradee]:
    """Grading order: roster row order; teams by first appearance.

    Identifier comparison is exact byte equality — identifiers feed path
    substitution, where exactness is mandatory.
    """
    if not team_mode:
        return [Gradee(identifier=i, members=(i,)) for i in roster.identifiers]
    grouped: dict[str, list[str]] = {}
    order: list[str] = []
    for row in roster.rows:
        team = row[TEAM_COLUMN]
        if team not in grouped:
            grouped[team] = []
            order.append(team)
        grouped[team].append(row[ID_COLUMN])
    return [Gradee(identifier=t, members=tuple(grouped[t])) for t in order]
