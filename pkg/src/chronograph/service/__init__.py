"""Read-only analyst API over a precomputed graph + model snapshot."""

from .app import ServiceState, build_state, create_app, serve
from .layout import LAYOUT_MODES, ProjectionLayout, build_layout

__all__ = [
    "LAYOUT_MODES",
    "ProjectionLayout",
    "ServiceState",
    "build_layout",
    "build_state",
    "create_app",
    "serve",
]
