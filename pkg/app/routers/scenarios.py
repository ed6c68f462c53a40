# app/routers/scenarios.py

"""
Single-scenario routes.
"""

from fastapi import APIRouter
from fastapi.concurrency import run_in_threadpool

from app.core.experiment import run_scenario
from app.models import RunMetrics, ScenarioConfig

router = APIRouter()


@router.post("/run", response_model=RunMetrics)
async def run_single_scenario(cfg: ScenarioConfig):
    """
    Run one simulation with the posted configuration.

    Omitted fields take their defaults; invalid fields are rejected with 422
    before anything runs.
    """
    return await run_in_threadpool(run_scenario, cfg)
