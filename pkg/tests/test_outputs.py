"""Grade sheet and feedback derivation."""

import csv
import io
from decimal import Decimal

import pytest

from gradekit.errors import (
    AxesMismatchError,
    UnknownCodeError,
    UnknownQuestionError,
    ValidationError,
)
from gradekit.outputs import (
    STATUS_COMPLETE,
    STATUS_MISSING,
    STATUS_PARTIAL,
    build_grade_sheet,
    compute_cell_grade,
    compute_general_adjustment,
    format_points,
    render_feedback,
    write_outputs,
)
from gradekit.progress import CellRecord, LogMeta, ProgressLog
from gradekit.roster import parse_roster
from gradekit.rubric import GradingMode, parse_rubric

from conftest import ROSTER, ROSTER_TEAMS, RUBRIC_NEGATIVE

RUBRIC_POSITIVE = """\
name,total_points,prompt_code,prompt_message,feedback,points_to_add
Q1,10,1a,data described,Good description of the data.,4
Q1,10,1b,model fit,Model fitted correctly.,6
Q2,5,2a,plot labeled,Axes are labeled.,5
general,,g1,extra credit,Bonus for the appendix.,1
"""

GRADEES = ["BaronPoisson", "sergent-gamma", "student_T"]


def _rubric(text=RUBRIC_NEGATIVE, mode=GradingMode.NEGATIVE):
    return parse_rubric(text, mode)


def _log(tmp_path, rubric, gradee_ids=GRADEES):
    return ProgressLog.create(
        tmp_path / "log.csv",
        gradee_ids,
        list(rubric.question_order),
        rubric.has_general,
        LogMeta.now("rubric.csv", rubric.mode, team_mode=False),
    )


def _grade_all(log, cells: dict):
    for (gradee, question), codes in cells.items():
        log.commit_cell(gradee, question, CellRecord(gradee, question, tuple(codes)))


# -- compute_cell_grade --------------------------------------------------------


def test_negative_full_credit():
    grade, warnings = compute_cell_grade(_rubric(), "Q1", ())
    assert grade == Decimal("10")
    assert warnings == []


def test_negative_single_deduction():
    grade, warnings = compute_cell_grade(_rubric(), "Q1", ("1a",))
    assert grade == Decimal("9.25")
    assert warnings == []


def test_negative_below_zero_warns():
    text = (
        "name,total_points,prompt_code,prompt_message,feedback,points_to_remove\n"
        "Q1,1,x,m,f,0.5\nQ1,1,y,m,f,0.75\n"
    )
    grade, warnings = compute_cell_grade(
        _rubric(text), "Q1", ("x", "y")
    )
    assert grade == Decimal("-0.25")
    assert warnings and "below zero" in warnings[0]


def test_positive_sums_applied_points():
    rubric = _rubric(RUBRIC_POSITIVE, GradingMode.POSITIVE)
    assert compute_cell_grade(rubric, "Q1", ())[0] == Decimal("0")
    assert compute_cell_grade(rubric, "Q1", ("1a", "1b"))[0] == Decimal("10")


def test_unknown_code_and_question():
    with pytest.raises(UnknownCodeError):
        compute_cell_grade(_rubric(), "Q1", ("nope",))
    with pytest.raises(UnknownQuestionError):
        compute_cell_grade(_rubric(), "Q9", ())


def test_general_adjustment_sign_follows_mode():
    negative = _rubric()  # g1 exists with 0 points; use a custom one for signs
    assert compute_general_adjustment(negative, ("g1",)) == Decimal("0")
    positive = _rubric(RUBRIC_POSITIVE, GradingMode.POSITIVE)
    assert compute_general_adjustment(positive, ("g1",)) == Decimal("1")


# -- format_points --------------------------------------------------------------


@pytest.mark.parametrize(
    "value,expected",
    [
        (Decimal("9.25"), "9.25"),
        (Decimal("10"), "10"),
        (Decimal("10.000"), "10"),
        (Decimal("0"), "0"),
        (Decimal("-0.25"), "-0.25"),
        (Decimal("0.12345"), "0.1234"),
        (Decimal("0.123450001"), "0.1235"),
        (Decimal("-0.00001"), "0"),
    ],
)
def test_format_points(value, expected):
    assert format_points(value) == expected


# -- build_grade_sheet -----------------------------------------------------------


def test_sheet_full_credit_totals(tmp_path):
    rubric = _rubric()
    log = _log(tmp_path, rubric)
    _grade_all(log, {(g, q): () for g in GRADEES for q in ["Q1", "Q2", "general"]})
    sheet = build_grade_sheet(parse_roster(ROSTER), log, rubric)
    assert sheet.columns == [
        "student_identifier",
        "moodle_id",
        "grade_Q1",
        "grade_Q2",
        "grade_general",
        "assignment_total",
        "status",
        "warnings",
    ]
    for row in sheet.rows:
        assert row["assignment_total"] == "15"
        assert row["status"] == STATUS_COMPLETE
        assert row["grade_general"] == "0"


def test_sheet_roster_columns_verbatim(tmp_path):
    rubric = _rubric()
    log = _log(tmp_path, rubric)
    _grade_all(log, {(g, q): () for g in GRADEES for q in ["Q1", "Q2", "general"]})
    roster = parse_roster(ROSTER)
    sheet = build_grade_sheet(roster, log, rubric)
    assert set(roster.columns) <= set(sheet.columns)
    for roster_row, sheet_row in zip(roster.rows, sheet.rows):
        for column in roster.columns:
            assert sheet_row[column] == roster_row[column]


def test_sheet_missing_submission_blank(tmp_path):
    rubric = _rubric()
    log = _log(tmp_path, rubric)
    _grade_all(
        log,
        {(g, q): () for g in ["BaronPoisson", "sergent-gamma"] for q in ["Q1", "Q2", "general"]},
    )
    sheet = build_grade_sheet(
        parse_roster(ROSTER), log, rubric, missing={"student_T"}
    )
    row = sheet.rows[2]
    assert row["status"] == STATUS_MISSING
    assert row["grade_Q1"] == "" and row["assignment_total"] == ""


def test_sheet_partial_has_no_total(tmp_path):
    rubric = _rubric()
    log = _log(tmp_path, rubric)
    log.commit_cell("BaronPoisson", "Q1", CellRecord("BaronPoisson", "Q1", ("1a",)))
    sheet = build_grade_sheet(parse_roster(ROSTER), log, rubric)
    row = sheet.rows[0]
    assert row["status"] == STATUS_PARTIAL
    assert row["grade_Q1"] == "9.25"
    assert row["grade_Q2"] == ""
    assert row["assignment_total"] == ""


def test_ungraded_general_does_not_make_partial(tmp_path):
    rubric = _rubric()
    log = _log(tmp_path, rubric)
    for q in ["Q1", "Q2"]:
        log.commit_cell("BaronPoisson", q, CellRecord("BaronPoisson", q, ()))
        log.commit_cell("sergent-gamma", q, CellRecord("sergent-gamma", q, ()))
        log.commit_cell("student_T", q, CellRecord("student_T", q, ()))
    sheet = build_grade_sheet(parse_roster(ROSTER), log, rubric)
    row = sheet.rows[0]
    assert row["status"] == STATUS_COMPLETE
    assert row["grade_general"] == ""
    assert row["assignment_total"] == "15"


def test_team_members_share_grades(tmp_path):
    rubric = _rubric()
    log = _log(tmp_path, rubric, gradee_ids=["team-alpha", "team-beta"])
    _grade_all(
        log,
        {
            ("team-alpha", "Q1"): ("1a",),
            ("team-alpha", "Q2"): (),
            ("team-alpha", "general"): ("g1",),
            ("team-beta", "Q1"): (),
            ("team-beta", "Q2"): ("2a",),
            ("team-beta", "general"): (),
        },
    )
    sheet = build_grade_sheet(
        parse_roster(ROSTER_TEAMS, team_mode=True), log, rubric, team_mode=True
    )
    alpha_rows = [r for r in sheet.rows if r["team_identifier"] == "team-alpha"]
    assert len(alpha_rows) == 2
    for column in ["grade_Q1", "grade_Q2", "grade_general", "assignment_total"]:
        assert alpha_rows[0][column] == alpha_rows[1][column]
    assert alpha_rows[0]["grade_Q1"] == "9.25"


def test_warnings_column_carries_cell_warnings(tmp_path):
    text = (
        "name,total_points,prompt_code,prompt_message,feedback,points_to_remove\n"
        "Q1,1,x,m,f,0.5\nQ1,1,y,m,f,0.75\n"
    )
    rubric = _rubric(text)
    log = ProgressLog.create(
        tmp_path / "log.csv", ["a"], ["Q1"], False,
        LogMeta.now("r", GradingMode.NEGATIVE, False),
    )
    log.commit_cell("a", "Q1", CellRecord("a", "Q1", ("x", "y")))
    roster = parse_roster("student_identifier\na\n")
    sheet = build_grade_sheet(roster, log, rubric)
    assert "Q1:" in sheet.rows[0]["warnings"]
    assert sheet.rows[0]["assignment_total"] == "-0.25"


def test_axes_mismatch_detected(tmp_path):
    rubric = _rubric()
    log = _log(tmp_path, rubric, gradee_ids=["somebody-else"])
    with pytest.raises(AxesMismatchError):
        build_grade_sheet(parse_roster(ROSTER), log, rubric)


def test_roster_column_collision_rejected(tmp_path):
    rubric = _rubric()
    log = _log(tmp_path, rubric)
    roster = parse_roster(
        "student_identifier,status\nBaronPoisson,x\nsergent-gamma,y\nstudent_T,z\n"
    )
    with pytest.raises(ValidationError):
        build_grade_sheet(roster, log, rubric)


# -- render_feedback -------------------------------------------------------------


def test_feedback_golden(tmp_path):
    rubric = _rubric()
    log = _log(tmp_path, rubric)
    log.commit_cell("BaronPoisson", "Q1", CellRecord("BaronPoisson", "Q1", ("1a",)))
    log.commit_cell("BaronPoisson", "Q2", CellRecord("BaronPoisson", "Q2", ()))
    log.commit_cell(
        "BaronPoisson",
        "general",
        CellRecord(
            "BaronPoisson",
            "general",
            ("g1",),
            personalized_message=(
                "Thank you for your note, Menglin. "
                "I am glad you had fun doing the assignment."
            ),
        ),
    )
    text = render_feedback("BaronPoisson", log, rubric)
    assert text == (
        "# Feedback for BaronPoisson\n"
        "\n"
        "## Q1 — 9.25/10\n"
        "\n"
        "- Remember to use inline R code, as instructed.\n"
        "\n"
        "## Q2 — 5/5\n"
        "\n"
        "## Overall\n"
        "\n"
        "- Great job on this assignment!\n"
        "\n"
        "*Thank you for your note, Menglin. "
        "I am glad you had fun doing the assignment.*\n"
    )


def test_feedback_not_graded_sections(tmp_path):
    rubric = _rubric()
    log = _log(tmp_path, rubric)
    text = render_feedback("student_T", log, rubric)
    assert "## Q1 — (not graded)" in text
    assert "## Q2 — (not graded)" in text
    assert "## Overall" not in text  # nothing recorded there


def test_feedback_no_unapplied_items(tmp_path):
    rubric = _rubric()
    log = _log(tmp_path, rubric)
    log.commit_cell("student_T", "Q1", CellRecord("student_T", "Q1", ("1",)))
    text = render_feedback("student_T", log, rubric)
    assert text.count("Tidyverse style guide") == 1
    assert "inline R code" not in text


def test_feedback_message_shown_per_question(tmp_path):
    rubric = _rubric()
    log = _log(tmp_path, rubric)
    log.commit_cell(
        "student_T",
        "Q2",
        CellRecord("student_T", "Q2", (), personalized_message="Nice recovery."),
    )
    text = render_feedback("student_T", log, rubric)
    assert "*Nice recovery.*" in text


# -- write_outputs ---------------------------------------------------------------


def test_write_outputs_creates_files(tmp_path):
    rubric = _rubric()
    log = _log(tmp_path, rubric)
    _grade_all(log, {(g, q): () for g in GRADEES for q in ["Q1", "Q2", "general"]})
    sheet = build_grade_sheet(parse_roster(ROSTER), log, rubric)
    docs = {g: render_feedback(g, log, rubric) for g in GRADEES}
    paths = {g: f"fb/hw01-{g}-feedback.md" for g in GRADEES}
    report = write_outputs(sheet, docs, paths, "grades.csv", root=tmp_path)
    assert report.grade_sheet_path.exists()
    assert len(report.feedback_files) == 3
    parsed = list(csv.reader(io.StringIO(report.grade_sheet_path.read_text())))
    assert parsed[0][0] == "student_identifier"
    assert (tmp_path / "fb" / "hw01-student_T-feedback.md").read_text().startswith(
        "# Feedback for student_T"
    )
