"""HTTP service exposing experiment running and verification."""

from .app import create_app

__all__ = ["create_app"]
