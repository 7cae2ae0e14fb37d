"""Crash-safe file writes and the single-writer session lock."""

from __future__ import annotations

import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path

from .errors import LockHeldError


def atomic_write_text(path: Path | str, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file in the same directory + rename.

    A crash mid-write leaves either the old file or the new one, never a
    truncated mix. Parent directories are created as needed.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_name, target)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


class SessionLock:
    """Lock file beside the progress log; exactly one writer per log.

    The file holds the acquiring process's start timestamp so a human can judge
    staleness. Use as a context manager; release removes the file.
    """

    def __init__(self, locked_path: Path | str):
        self.lock_path = Path(f"{locked_path}.lock")
        self._held = False

    def acquire(self) -> None:
        self.lock_path.parent.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self.lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise LockHeldError(
                f"another grading session holds {self.lock_path}; "
                "close it, or delete the lock file if that session crashed"
            ) from None
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(datetime.now(timezone.utc).isoformat())
        self._held = True

    def release(self) -> None:
        if self._held:
            try:
                self.lock_path.unlink()
            except FileNotFoundError:
                pass
            self._held = False

    def __enter__(self) -> "SessionLock":
        self.acquire()
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.release()
