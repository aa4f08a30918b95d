"""HTTP service: session hosting, event-sourced persistence, surveys, metrics."""

from .app import (
    ApiError,
    DOCTOR_DIMENSIONS,
    PATIENT_DIMENSIONS,
    ServiceConfig,
    ServiceRuntime,
    create_app,
)
from .store import EventStore

__all__ = [
    "ApiError",
    "DOCTOR_DIMENSIONS",
    "PATIENT_DIMENSIONS",
    "EventStore",
    "ServiceConfig",
    "ServiceRuntime",
    "create_app",
]
