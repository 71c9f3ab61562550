"""
Abstract storage backend interface.
Defines the contract the CSV codec reads and writes through.
"""

from abc import ABC, abstractmethod

# Path that stands for standard input / standard output
STDIO = "-"


class StorageBackend(ABC):
    """
    Abstract base class for flat-file storage.

    Paths are plain strings; "-" means stdin for reads and stdout for writes.
    """

    @abstractmethod
    def read_text(self, path: str) -> str:
        """
        Read a UTF-8 text file.

        Args:
            path: Path relative to the backend root, or "-"

        Returns:
            File contents

        Raises:
            StorageException: If the file is missing or unreadable
        """

    @abstractmethod
    def write_text(self, path: str, text: str) -> str:
        """
        Write UTF-8 text with LF line endings, creating parent directories.

        Args:
            path: Destination relative to the backend root, or "-"
            text: Content to write

        Returns:
            The path written

        Raises:
            StorageException: If writing fails
        """

    @abstractmethod
    def exists(self, path: str) -> bool:
        """Check whether a file exists."""
