"""Cloud router: inspection and validation of uploaded cloud files."""
from fastapi import APIRouter, File, UploadFile

from voxelight.schemas import CloudInfo, ValidationReport
from voxelight.services.cloud_service import CloudService

router = APIRouter(prefix="/api/clouds", tags=["clouds"])


@router.post("/info", response_model=CloudInfo)
def cloud_info(cloud: UploadFile = File(...)):
    """Summarize an uploaded cloud file."""
    grid = CloudService.parse_cloud(cloud.file.read())
    return CloudService.cloud_info(grid)


@router.post("/validate", response_model=ValidationReport)
def validate_cloud(cloud: UploadFile = File(...)):
    """List every violation in an uploaded cloud file."""
    return CloudService.validate_cloud(cloud.file.read())
