"""HTTP service exposing the decision-assistant workflow."""

from .app import create_app
from .state import AppState

__all__ = ["AppState", "create_app"]
