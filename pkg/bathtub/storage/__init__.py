"""
Flat-file storage: a local backend plus the CSV codec for data, estimates and reports.
"""

from bathtub.storage.base import STDIO, StorageBackend
from bathtub.storage.csv_codec import (
    dump_data,
    dump_function,
    emit,
    emit_estimate,
    emit_report,
    ingest,
    parse_data,
    parse_function,
    read_function,
)
from bathtub.storage.factory import get_storage, get_storage_backend
from bathtub.storage.local import LocalStorageBackend

__all__ = [
    "STDIO",
    "StorageBackend",
    "LocalStorageBackend",
    "get_storage_backend",
    "get_storage",
    "dump_data",
    "dump_function",
    "emit",
    "emit_estimate",
    "emit_report",
    "ingest",
    "parse_data",
    "parse_function",
    "read_function",
]
