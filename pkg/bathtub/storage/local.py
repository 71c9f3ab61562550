"""
Local filesystem storage backend.
Reads inputs and writes CSV outputs under a base directory.
"""

import sys
from pathlib import Path

from bathtub.config import get_settings
from bathtub.core.exceptions import StorageException
from bathtub.storage.base import STDIO, StorageBackend


class LocalStorageBackend(StorageBackend):
    """
    Local filesystem storage implementation.

    Relative paths resolve against the configured STORAGE_PATH; absolute paths
    are used as given.
    """

    def __init__(self, base_path: str | None = None):
        """
        Initialize local storage backend.

        Args:
            base_path: Base directory. Defaults to settings.STORAGE_PATH
        """
        self.base_path = Path(base_path or get_settings().STORAGE_PATH)

    def _get_full_path(self, path: str) -> Path:
        return self.base_path / path

    def read_text(self, path: str) -> str:
        if path == STDIO:
            return sys.stdin.read()
        full_path = self._get_full_path(path)
        if not full_path.is_file():
            raise StorageException(message=f"File not found: {path}", details={"path": path})
        try:
            return full_path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise StorageException(
                message=f"Failed to read file: {e}",
                details={"path": path},
            ) from e

    def write_text(self, path: str, text: str) -> str:
        if path == STDIO:
            sys.stdout.write(text)
            sys.stdout.flush()
            return path
        full_path = self._get_full_path(path)
        try:
            full_path.parent.mkdir(parents=True, exist_ok=True)
            with open(full_path, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
        except OSError as e:
            raise StorageException(
                message=f"Failed to write file: {e}",
                details={"path": path},
            ) from e
        return path

    def exists(self, path: str) -> bool:
        return path == STDIO or self._get_full_path(path).is_file()
