"""HTTP service wrapping the pipeline-building flow."""

from .app import create_app
from .store import BlobStore, SessionStore, UnknownSessionError

__all__ = ["BlobStore", "SessionStore", "UnknownSessionError", "create_app"]
