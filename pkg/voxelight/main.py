"""FastAPI main application: materials, demo scenes, cloud inspection and rendering."""
import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from voxelight import __version__
from voxelight.errors import VoxelightError
from voxelight.routers import clouds, materials, renders, scenes

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Lifespan context manager for startup and shutdown events."""
    logger.info("Voxelight API %s starting", __version__)
    yield
    logger.info("Shutting down...")


async def voxelight_error_handler(request: Request, exc: VoxelightError) -> JSONResponse:
    """Domain errors become {"detail": ...} with the error's status code."""
    return JSONResponse(status_code=exc.status_code, content={"detail": exc.detail})


def create_app(app_lifespan=lifespan) -> FastAPI:
    """Assemble the application; tests pass their own lifespan."""
    application = FastAPI(
        title="Voxelight API",
        description="Model-centric volumetric point clouds rendered by a voxel ray tracer",
        version=__version__,
        lifespan=app_lifespan,
    )
    application.add_exception_handler(VoxelightError, voxelight_error_handler)

    application.include_router(materials.router)
    application.include_router(scenes.router)
    application.include_router(clouds.router)
    application.include_router(renders.router)

    @application.get("/")
    def root():
        """Root endpoint."""
        return {
            "message": "Welcome to the Voxelight API",
            "docs": "/docs",
            "openapi": "/openapi.json",
        }

    @application.get("/health")
    def health_check():
        """Health check endpoint."""
        return {"status": "healthy"}

    return application


app = create_app()
