# app/main.py

import logging

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from app import __version__
from app.config import get_settings
from app.core.errors import ConfigError
from app.routers import health, oracle, scenarios, sweeps

settings = get_settings()

logging.basicConfig(
    level=getattr(logging, settings.log_level.upper(), logging.INFO),
    format="%(asctime)s %(levelname)s %(name)s: %(message)s",
)

# ============================================
# Create FastAPI app
# ============================================

app = FastAPI(
    title=settings.app_name,
    description="Discrete-event simulator for OCEAN, SEC-HAND and chip-economy routing",
    version=__version__,
    docs_url="/docs" if settings.debug else None,
    redoc_url="/redoc" if settings.debug else None,
)

# ============================================
# CORS middleware
# ============================================

app.add_middleware(
    CORSMiddleware,
    allow_origins=["http://localhost:3000"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# ============================================
# Errors
# ============================================

@app.exception_handler(ConfigError)
async def config_error_handler(request: Request, exc: ConfigError):
    return JSONResponse(status_code=400, content={"detail": str(exc), "fields": exc.fields})

# ============================================
# Include routers
# ============================================

app.include_router(health.router, tags=["Health"])
app.include_router(scenarios.router, prefix="/scenarios", tags=["Scenarios"])
app.include_router(sweeps.router, prefix="/sweeps", tags=["Sweeps"])
app.include_router(oracle.router, prefix="/oracle", tags=["Oracles"])

# ============================================
# Root endpoint
# ============================================

@app.get("/")
async def root():
    return {
        "name": settings.app_name,
        "version": __version__,
        "status": "running",
        "docs": "/docs" if settings.debug else None,
    }
