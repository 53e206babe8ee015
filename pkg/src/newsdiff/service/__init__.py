"""HTTP service wrapping the diff engine."""

from .app import create_app

__all__ = ["create_app"]
