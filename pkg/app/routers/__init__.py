# app/routers/__init__.py

from app.routers import health
from app.routers import scenarios
from app.routers import sweeps
from app.routers import oracle

__all__ = ["health", "scenarios", "sweeps", "oracle"]
