"""Shared fixtures: a small course on disk, mirroring the documented examples."""

from __future__ import annotations

from pathlib import Path

import pytest

STUDENTS = ["BaronPoisson", "sergent-gamma", "student_T"]

RUBRIC_NEGATIVE = """\
name,total_points,prompt_code,prompt_message,feedback,points_to_remove
Q1,10,1a,no inline R code,"Remember to use inline R code, as instructed.",0.75
Q1,10,1b,missing interpretation,Interpret the slope in units of measurement.,2
Q2,5,2a,no source cited,The source of the data utilized in your analysis was not specified.,1
all_questions,,1,tidyverse code style,"Please adhere to the Tidyverse style guide, as discussed in Lecture 1.",0.5
general,,g1,great job,Great job on this assignment!,0
"""

RUBRIC_NO_GENERAL = """\
name,total_points,prompt_code,prompt_message,feedback,points_to_remove
Q1,10,1a,no inline R code,"Remember to use inline R code, as instructed.",0.75
Q2,5,2a,no source cited,The source of the data utilized in your analysis was not specified.,1
all_questions,,1,tidyverse code style,"Please adhere to the Tidyverse style guide, as discussed in Lecture 1.",0.5
"""

ROSTER = """\
student_identifier,moodle_id
BaronPoisson,1001
sergent-gamma,1002
student_T,1003
"""

ROSTER_TEAMS = """\
student_identifier,team_identifier,moodle_id
BaronPoisson,team-alpha,1001
sergent-gamma,team-alpha,1002
student_T,team-beta,1003
"""


def make_course(
    root: Path,
    rubric: str = RUBRIC_NEGATIVE,
    roster: str = ROSTER,
    submissions: list[str] | None = None,
) -> dict[str, str]:
    """Lay out rubric, roster, and submissions; return the standard CLI flags."""
    (root / "rubric.csv").write_text(rubric, encoding="utf-8")
    (root / "roster.csv").write_text(roster, encoding="utf-8")
    (root / "hws").mkdir(exist_ok=True)
    for student in submissions if submissions is not None else STUDENTS:
        (root / "hws" / f"hw01-{student}.Rmd").write_text(
            f"# Homework of {student}\n\nSome answer text.\n", encoding="utf-8"
        )
    return {
        "rubric": "rubric.csv",
        "roster": "roster.csv",
        "example_id": "BaronPoisson",
        "example_sub": "hws/hw01-BaronPoisson.Rmd",
        "example_feedback": "fb/hw01-BaronPoisson-feedback.md",
        "log": "log.csv",
        "grades": "grades.csv",
    }


def course_args(flags: dict[str, str], *extra: str) -> list[str]:
    return [
        "--rubric", flags["rubric"],
        "--roster", flags["roster"],
        "--example-id", flags["example_id"],
        "--example-sub", flags["example_sub"],
        "--example-feedback", flags["example_feedback"],
        "--log", flags["log"],
        "--grades", flags["grades"],
        "--open-hook", "none",
        "--close-hook", "none",
        *extra,
    ]


@pytest.fixture
def course(tmp_path, monkeypatch) -> dict[str, str]:
    monkeypatch.chdir(tmp_path)
    return make_course(tmp_path)


@pytest.fixture
def team_course(tmp_path, monkeypatch) -> dict[str, str]:
    monkeypatch.chdir(tmp_path)
    flags = make_course(
        tmp_path,
        roster=ROSTER_TEAMS,
        submissions=["team-alpha", "team-beta"],
    )
    flags["example_id"] = "team-alpha"
    flags["example_sub"] = "hws/hw01-team-alpha.Rmd"
    flags["example_feedback"] = "fb/hw01-team-alpha-feedback.md"
    return flags


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    print(f"\nACCEPTANCE {name}: {report.outcome.upper()}")
