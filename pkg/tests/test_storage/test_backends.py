"""
Tests for storage backends.
"""

import io

import pytest

from bathtub.core.exceptions import StorageException
from bathtub.storage.factory import get_storage
from bathtub.storage.local import LocalStorageBackend


class TestLocalStorageBackend:
    """Tests for local filesystem storage."""

    def test_write_and_read(self, test_storage: LocalStorageBackend):
        """Text written is read back unchanged."""
        path = "runs/fit.csv"
        result = test_storage.write_text(path, "t,value\n0.0,1.0\n")

        assert result == path
        assert test_storage.exists(path)
        assert test_storage.read_text(path) == "t,value\n0.0,1.0\n"

    def test_line_endings_are_lf(self, test_storage: LocalStorageBackend):
        """Files are written with LF line endings."""
        test_storage.write_text("out.csv", "a\nb\n")
        raw = (test_storage.base_path / "out.csv").read_bytes()
        assert b"\r\n" not in raw

    def test_exists(self, test_storage: LocalStorageBackend):
        """Missing files are reported as such; '-' always exists."""
        assert not test_storage.exists("missing.csv")
        assert test_storage.exists("-")

    def test_read_missing(self, test_storage: LocalStorageBackend):
        """Reading a missing file raises a storage error naming the path."""
        with pytest.raises(StorageException) as exc_info:
            test_storage.read_text("missing.csv")
        assert exc_info.value.details["path"] == "missing.csv"
        assert exc_info.value.exit_code == 1

    def test_write_into_a_file_path(self, test_storage: LocalStorageBackend):
        """A parent that is a file cannot hold a directory."""
        test_storage.write_text("blocker", "x")
        with pytest.raises(StorageException):
            test_storage.write_text("blocker/inner.csv", "y")

    def test_stdio(self, test_storage: LocalStorageBackend, monkeypatch, capsys):
        """'-' reads stdin and writes stdout."""
        monkeypatch.setattr("sys.stdin", io.StringIO("x\n0.5\n"))
        assert test_storage.read_text("-") == "x\n0.5\n"
        test_storage.write_text("-", "metric,value\n")
        assert capsys.readouterr().out == "metric,value\n"

    def test_absolute_paths(self, test_storage: LocalStorageBackend, tmp_path):
        """Absolute paths ignore the base directory."""
        target = tmp_path / "elsewhere.csv"
        test_storage.write_text(str(target), "x\n")
        assert target.read_text() == "x\n"


def test_get_storage_with_base_path(tmp_path):
    """An explicit base path gives a fresh backend rooted there."""
    storage = get_storage(str(tmp_path))
    assert isinstance(storage, LocalStorageBackend)
    assert storage.base_path == tmp_path
