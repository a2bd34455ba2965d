"""
FastAPI surface for the many-particle heat transfer solvers.

Runs one study per request in memory and returns its tables as JSON.
"""

import logging
import time

from fastapi import FastAPI, HTTPException, status

from . import __version__
from .config.settings import DEFAULT_THREADS, LOG_LEVEL
from .errors import NumericalError, SolverError
from .models import ErrorResponse, RunConfig, Study, StudyResponse
from .services.runner import execute

# Configure logging
logging.basicConfig(level=LOG_LEVEL)
logger = logging.getLogger(name=__name__)

# FastAPI App Configuration
app = FastAPI(
    title="Many-Particle Heat Transfer",
    description="Many-body and homogenized heat transfer solvers with verification studies",
    version=__version__,
    docs_url="/docs",
    redoc_url="/redoc",
)


# Health Check Endpoint
@app.get("/health", tags=["Health"])
async def health_check():
    """Health check endpoint."""
    return {"status": "healthy", "version": __version__}


# API Endpoints
@app.post(
    "/api/studies/{study}",
    response_model=StudyResponse,
    responses={
        400: {"model": ErrorResponse, "description": "Invalid configuration or precondition"},
        422: {"model": ErrorResponse, "description": "Malformed request body"},
    },
    tags=["API"],
    summary="Run a study",
    description="Run one study on the posted configuration and return its tables.",
)
def run_study(study: Study, config: RunConfig) -> StudyResponse:
    """
    Run a study via API endpoint.

    - **study**: One of the CLI subcommand names
    - **config**: A run configuration, same schema as the CLI config files

    Numerical failures (divergence, near-singular systems, infeasible packing)
    come back with `success=false` and the error message.
    """
    logger.info(f"API request for {study.value} (seed={config.seed})")
    start_time = time.time()
    try:
        outcome = execute(study, config, DEFAULT_THREADS)
    except NumericalError as e:
        logger.error(f"Numerical failure in {study.value}: {e}")
        return StudyResponse(
            success=False,
            study=study,
            error_message=str(e),
            processing_time=time.time() - start_time,
        )
    except (SolverError, ValueError) as e:
        logger.warning(f"Rejected {study.value} request: {e}")
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))

    processing_time = time.time() - start_time
    logger.info(f"API {study.value} completed in {processing_time:.2f}s")
    return StudyResponse(
        success=True,
        study=study,
        reports=outcome.reports,
        diagnostics=outcome.diagnostics,
        processing_time=processing_time,
    )
