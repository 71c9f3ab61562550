"""
Storage backend factory.
"""

from functools import lru_cache

from bathtub.storage.base import StorageBackend
from bathtub.storage.local import LocalStorageBackend


@lru_cache
def get_storage_backend() -> StorageBackend:
    """
    Get the configured storage backend.

    Uses LRU cache to ensure only one instance is created.
    """
    return LocalStorageBackend()


def get_storage(base_path: str | None = None) -> StorageBackend:
    """Backend rooted at `base_path`, or the shared configured one."""
    if base_path is not None:
        return LocalStorageBackend(base_path)
    return get_storage_backend()
