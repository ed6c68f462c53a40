# app/routers/health.py

from fastapi import APIRouter

from app.core.presets import PRESETS
from app.models import ScenarioConfig

router = APIRouter()


@router.get("/health")
async def health_check():
    """Health check endpoint for monitoring."""
    return {
        "status": "healthy",
        "service": "ocean-sim",
    }


@router.get("/ready")
async def readiness_check():
    """Readiness check: the default scenario and every preset must validate."""
    checks = {"default_scenario": "ok", "presets": "ok"}
    try:
        ScenarioConfig()
    except ValueError:
        checks["default_scenario"] = "invalid"
    try:
        for builder in PRESETS.values():
            builder()
    except ValueError:
        checks["presets"] = "invalid"

    ready = all(status == "ok" for status in checks.values())
    return {
        "status": "ready" if ready else "degraded",
        "checks": checks,
    }
