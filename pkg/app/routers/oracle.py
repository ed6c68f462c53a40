# app/routers/oracle.py

"""
Reference-oracle route.
"""

from fastapi import APIRouter, Query
from fastapi.concurrency import run_in_threadpool

from app.core.oracles import OracleReport, run_oracles

router = APIRouter()


@router.post("", response_model=OracleReport)
async def run_reference_oracles(
    seed: int = Query(0, ge=0),
    sequences: int = Query(200, ge=0, le=10_000),
    cases: int = Query(50, ge=0, le=500),
):
    """Cross-check the ranker and route discovery against independent computations."""
    return await run_in_threadpool(
        run_oracles, seed=seed, rating_sequences=sequences, discovery_cases=cases
    )
