"""Path templates inferred from a single example.

One (identifier, path) example defines the rule: every occurrence of the
identifier in the path becomes a placeholder, and other gradees' paths are
obtained by substituting their identifier into those spots.
"""

from __future__ import annotations

import posixpath
from dataclasses import dataclass
from pathlib import Path

from .errors import IdentifierNotInPathError, PathCollisionError, PathEscapeError
from .roster import Gradee


@dataclass(frozen=True)
class PathTemplate:
    """Literal pieces around placeholders; n literals means n-1 placeholders.

    ``str.split`` already gives left-to-right, non-overlapping occurrence
    matching, so the literals are exactly ``example_path.split(identifier)``.
    """

    example_identifier: str
    example_path: str
    literals: tuple[str, ...]

    @property
    def placeholder_count(self) -> int:
        return len(self.literals) - 1


def compile_template(example_identifier: str, example_path: str) -> PathTemplate:
    if not example_identifier:
        raise ValueError("example identifier must be non-empty")
    if not example_path:
        raise ValueError("example path must be non-empty")
    literals = tuple(example_path.split(example_identifier))
    if len(literals) == 1:
        raise IdentifierNotInPathError(
            f"identifier {example_identifier!r} does not occur in {example_path!r}"
        )
    return PathTemplate(
        example_identifier=example_identifier,
        example_path=example_path,
        literals=literals,
    )


def instantiate(template: PathTemplate, identifier: str) -> str:
    if not identifier:
        raise ValueError("identifier must be non-empty")
    return identifier.join(template.literals)


def _escapes_root(path: str) -> bool:
    normalized = posixpath.normpath(path)
    return normalized == ".." or normalized.startswith("../")


def resolve_all(template: PathTemplate, the_gradees: list[Gradee]) -> dict[str, str]:
    """One path per gradee, with explicit safety checks.

    Substitution is plain text, so pathological identifiers could collide
    (``a`` vs ``a/a``-style interactions) or climb out of the course root;
    both are rejected rather than assumed away.
    """
    paths: dict[str, str] = {}
    first_owner: dict[str, str] = {}
    for gradee in the_gradees:
        path = instantiate(template, gradee.identifier)
        if _escapes_root(path):
            raise PathEscapeError(
                f"path {path!r} for {gradee.identifier!r} escapes the course root"
            )
        if path in first_owner:
            raise PathCollisionError(
                f"gradees {first_owner[path]!r} and {gradee.identifier!r} "
                f"both resolve to {path!r}"
            )
        first_owner[path] = gradee.identifier
        paths[gradee.identifier] = path
    return paths


def check_presence(
    paths: dict[str, str], root: Path | str = "."
) -> tuple[list[str], list[str]]:
    """Partition gradees by whether their submission exists on disk.

    A directory counts as present: multi-file submissions live in per-gradee
    folders. Feedback paths never go through this check — those files are
    created by us.
    """
    base = Path(root)
    present: list[str] = []
    missing: list[str] = []
    for gradee_id, path in paths.items():
        target = base / Path(path)
        (present if target.exists() else missing).append(gradee_id)
    return present, missing
