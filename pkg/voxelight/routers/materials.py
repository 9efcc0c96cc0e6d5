"""Material router with read-only preset endpoints."""
from typing import List

from fastapi import APIRouter

from voxelight.schemas import MaterialRead
from voxelight.services.material_service import MaterialService

router = APIRouter(prefix="/api/materials", tags=["materials"])


@router.get("", response_model=List[MaterialRead])
def get_all_materials():
    """Get all material presets."""
    return MaterialService.get_all()


@router.get("/{name}", response_model=MaterialRead)
def get_material(name: str):
    """Get a material preset by name."""
    return MaterialService.get_by_name(name)
