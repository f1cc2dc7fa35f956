"""HTTP service exposing the inference pipeline."""

from .app import app, create_app

__all__ = ["app", "create_app"]
