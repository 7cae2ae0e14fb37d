"""Distribute feedback files and create noted issues on per-gradee repositories.

Execution is always split in two: a deterministic plan you can inspect
(dry-run), then an explicit execute step. Issues live in the progress log
until then, so a grader can still change their mind.
"""

from __future__ import annotations

import shutil
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from .errors import MissingFeedbackFileError
from .paths import PathTemplate, instantiate
from .progress import GRADED, ProgressLog
from .rubric import GENERAL_NAME


@dataclass(frozen=True)
class PushFile:
    repo: str
    local_path: str
    destination_path: str
    commit_message: str


@dataclass(frozen=True)
class CreateIssue:
    repo: str
    title: str
    body: str


Operation = PushFile | CreateIssue


@dataclass
class PushPlan:
    operations: list[Operation]
    warnings: list[str] = field(default_factory=list)

    @property
    def push_files(self) -> list[PushFile]:
        return [op for op in self.operations if isinstance(op, PushFile)]

    @property
    def create_issues(self) -> list[CreateIssue]:
        return [op for op in self.operations if isinstance(op, CreateIssue)]


def plan_push(
    log: ProgressLog,
    feedback_paths: dict[str, str],
    repo_template: PathTemplate,
    commit_message: str,
    root: Path | str = ".",
) -> PushPlan:
    """One PUSH_FILE per gradee with a feedback file, one CREATE_ISSUE per noted issue.

    Pure function of its inputs: same log, same paths, same plan. Operations
    are grouped per gradee in grading order so per-repo operations keep their
    relative order.
    """
    root = Path(root)
    operations: list[Operation] = []
    warnings: list[str] = []
    for gradee in log.gradee_order:
        repo = instantiate(repo_template, gradee)
        feedback = feedback_paths.get(gradee)
        graded_anything = any(
            cell.status == GRADED
            for (g, _), cell in log.cells.items()
            if g == gradee
        )
        if feedback is not None and (root / feedback).exists():
            operations.append(
                PushFile(
                    repo=repo,
                    local_path=str(root / feedback),
                    destination_path=Path(feedback).name,
                    commit_message=commit_message,
                )
            )
        elif graded_anything:
            raise MissingFeedbackFileError(
                f"feedback file for {gradee!r} does not exist; run finalize first"
            )
        else:
            warnings.append(f"{gradee}: nothing graded, no feedback file to push")
        for question in list(log.question_order) + (
            [GENERAL_NAME] if log.has_general else []
        ):
            cell = log.cells.get((gradee, question))
            if cell is None:
                continue
            if cell.issue_title.strip():
                operations.append(
                    CreateIssue(repo=repo, title=cell.issue_title, body=cell.issue_body)
                )
            elif cell.issue_body.strip():
                warnings.append(
                    f"{gradee}/{question}: issue has a body but no title; skipped"
                )
    return PushPlan(operations=operations, warnings=warnings)


@dataclass
class OperationResult:
    operation: Operation
    ok: bool
    performed: bool  # False when idempotency made it a no-op
    detail: str = ""


@dataclass
class ExecutionReport:
    results: list[OperationResult]

    @property
    def failures(self) -> list[OperationResult]:
        return [r for r in self.results if not r.ok]


class DryRunTransport:
    """Records what would happen; touches nothing."""

    def __init__(self) -> None:
        self.recorded: list[Operation] = []

    def push_file(self, op: PushFile) -> OperationResult:
        self.recorded.append(op)
        return OperationResult(op, ok=True, performed=False, detail="dry-run")

    def create_issue(self, op: CreateIssue) -> OperationResult:
        self.recorded.append(op)
        return OperationResult(op, ok=True, performed=False, detail="dry-run")


class LiveTransport:
    """Pushes via the git command-line client; creates issues over the REST API.

    ``clone_base`` may be an HTTPS prefix or a local directory of bare repos,
    which is how the tests exercise real pushes without a network.
    """

    def __init__(
        self,
        token: str,
        api_base: str = "https://api.github.com",
        clone_base: str = "https://github.com",
        committer_name: str = "gradekit",
        committer_email: str = "gradekit@localhost",
    ):
        self.token = token
        self.api_base = api_base.rstrip("/")
        self.clone_base = clone_base.rstrip("/")
        self.committer_name = committer_name
        self.committer_email = committer_email

    def _clone_url(self, repo: str) -> str:
        if self.clone_base.startswith(("http://", "https://")):
            scheme, rest = self.clone_base.split("://", 1)
            return f"{scheme}://x-access-token:{self.token}@{rest}/{repo}.git"
        return f"{self.clone_base}/{repo}.git"

    def _git(self, args: list[str], cwd: Path) -> subprocess.CompletedProcess:
        return subprocess.run(
            ["git", "-c", f"user.name={self.committer_name}",
             "-c", f"user.email={self.committer_email}", *args],
            cwd=cwd,
            capture_output=True,
            text=True,
        )

    def push_file(self, op: PushFile) -> OperationResult:
        workdir = Path(tempfile.mkdtemp(prefix="gradekit-push-"))
        try:
            clone = self._git(
                ["clone", "--depth", "1", self._clone_url(op.repo), "checkout"], workdir
            )
            if clone.returncode != 0:
                return OperationResult(
                    op, ok=False, performed=False,
                    detail=f"clone failed: {clone.stderr.strip()}",
                )
            checkout = workdir / "checkout"
            destination = checkout / op.destination_path
            destination.parent.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(op.local_path, destination)
            status = self._git(["status", "--porcelain"], checkout)
            if not status.stdout.strip():
                return OperationResult(
                    op, ok=True, performed=False, detail="content unchanged; no commit"
                )
            for step in (
                ["add", op.destination_path],
                ["commit", "-m", op.commit_message],
                ["push"],
            ):
                result = self._git(step, checkout)
                if result.returncode != 0:
                    return OperationResult(
                        op, ok=False, performed=False,
                        detail=f"git {step[0]} failed: {result.stderr.strip()}",
                    )
            return OperationResult(op, ok=True, performed=True, detail="pushed")
        finally:
            shutil.rmtree(workdir, ignore_errors=True)

    def create_issue(self, op: CreateIssue) -> OperationResult:
        url = f"{self.api_base}/repos/{op.repo}/issues"
        try:
            response = httpx.post(
                url,
                json={"title": op.title, "body": op.body},
                headers={
                    "Authorization": f"Bearer {self.token}",
                    "Accept": "application/vnd.github+json",
                },
                timeout=30,
            )
        except httpx.HTTPError as exc:
            return OperationResult(op, ok=False, performed=False, detail=str(exc))
        if response.status_code not in (200, 201):
            return OperationResult(
                op, ok=False, performed=False,
                detail=f"HTTP {response.status_code}: {response.text[:200]}",
            )
        return OperationResult(op, ok=True, performed=True, detail="issue created")


def execute(plan: PushPlan, transport) -> ExecutionReport:
    """Run the plan, collecting per-operation outcomes; failures do not stop it."""
    results: list[OperationResult] = []
    for op in plan.operations:
        if isinstance(op, PushFile):
            results.append(transport.push_file(op))
        else:
            results.append(transport.create_issue(op))
    return ExecutionReport(results=results)
