"""Exception types shared across gradekit modules."""

from __future__ import annotations

from dataclasses import dataclass


class GradekitError(Exception):
    """Base class for all gradekit errors."""


class MalformedTableError(GradekitError):
    """The delimited text could not be parsed as a table at all."""


@dataclass(frozen=True)
class ValidationIssue:
    """One semantic violation found while validating an input file."""

    message: str
    row: int | None = None  # 1-based line in the source file, when known

    def __str__(self) -> str:
        if self.row is None:
            return self.message
        return f"row {self.row}: {self.message}"


class ValidationError(GradekitError):
    """Collects every semantic violation found in an input; nothing partial is returned."""

    def __init__(self, issues: list[ValidationIssue]):
        self.issues = list(issues)
        super().__init__("; ".join(str(issue) for issue in self.issues))


class UnknownQuestionError(GradekitError):
    """A question name that does not exist in the rubric."""


class UnknownCodeError(GradekitError):
    """A prompt code that is not visible for the given scope."""


class UnknownCellError(GradekitError):
    """A (gradee, question) pair outside the progress log's axes."""


class UnknownGradeeError(GradekitError):
    """A gradee identifier not present in the progress log."""


class AxesMismatchError(GradekitError):
    """Persisted log axes disagree with the current rubric/roster; needs operator action."""


class MalformedLogError(GradekitError):
    """The progress log file exists but cannot be interpreted."""


class IdentifierNotInPathError(GradekitError):
    """The example identifier does not occur in the example path."""


class PathCollisionError(GradekitError):
    """Two gradees resolved to the same path."""


class PathEscapeError(GradekitError):
    """A substituted path climbs out of the course root."""


class MissingFeedbackFileError(GradekitError):
    """A feedback file expected by the push plan does not exist."""


class LockHeldError(GradekitError):
    """Another grading session already holds the progress-log lock."""


class InputError(GradekitError):
    """Grader input that cannot be turned into an action; the prompt is repeated."""


class AllGradedError(GradekitError):
    """Nothing is pending within the session's scope."""


class SessionBusyError(GradekitError):
    """Another action is already in flight on the engine actor."""


class SessionEndedError(GradekitError):
    """The session has already quit; no further actions are accepted."""
