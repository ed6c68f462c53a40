# app/routers/sweeps.py

"""
Sweep routes.

Sweeps run inside the request, so each request is capped at
`api_max_sweep_runs` simulations.
"""

from typing import Optional

from fastapi import APIRouter, HTTPException
from fastapi.concurrency import run_in_threadpool
from pydantic import BaseModel, Field

from app.config import get_settings
from app.core.errors import ConfigError
from app.core.experiment import run_sweep
from app.core.presets import list_presets, preset
from app.models import SweepSpec

settings = get_settings()
router = APIRouter()


class PresetRequest(BaseModel):
    runs_per_point: Optional[int] = Field(default=None, ge=1)
    sim_duration: Optional[float] = Field(default=None, gt=0)
    seed_base: Optional[int] = Field(default=None, ge=0)


# ============================================
# Helpers
# ============================================

def enforce_run_cap(spec: SweepSpec) -> None:
    total = spec.total_runs()
    if total > settings.api_max_sweep_runs:
        raise HTTPException(
            status_code=413,
            detail=(
                f"sweep '{spec.name}' needs {total} runs; "
                f"this service runs at most {settings.api_max_sweep_runs} per request"
            ),
        )


async def _execute(spec: SweepSpec) -> dict:
    enforce_run_cap(spec)
    result = await run_in_threadpool(run_sweep, spec, 1)
    return {"success": result.failures == 0, **result.to_dict()}


# ============================================
# Endpoints
# ============================================

@router.post("")
async def run_posted_sweep(spec: SweepSpec):
    """Run a posted sweep and return its rows, aggregates and sign tests."""
    return await _execute(spec)


@router.get("/presets")
async def get_presets():
    """Built-in figure designs."""
    return {"presets": list_presets()}


@router.post("/presets/{name}")
async def run_preset(name: str, request: Optional[PresetRequest] = None):
    """Run a built-in design, usually with fewer runs or a shorter duration."""
    request = request or PresetRequest()
    try:
        spec = preset(
            name,
            runs_per_point=request.runs_per_point,
            sim_duration=request.sim_duration,
            seed_base=request.seed_base,
        )
    except ConfigError as exc:
        raise HTTPException(status_code=404, detail=str(exc))
    return await _execute(spec)
