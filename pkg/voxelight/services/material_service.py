"""Material preset service."""
from typing import List

from voxelight.models import ATTRIBUTE_NAMES, MATERIAL_PRESETS, MaterialPreset, material_preset, normalize_material_name
from voxelight.schemas import MaterialRead


def _to_read(preset: MaterialPreset) -> MaterialRead:
    return MaterialRead(name=preset.name, **dict(zip(ATTRIBUTE_NAMES, preset.attrs.as_tuple())))


class MaterialService:
    """Service for material-preset lookups."""

    @staticmethod
    def get_all() -> List[MaterialRead]:
        """Get all presets in table order."""
        return [_to_read(p) for p in MATERIAL_PRESETS.values()]

    @staticmethod
    def get_by_name(name: str) -> MaterialRead:
        """Get a preset by (case-insensitive) name."""
        attrs = material_preset(name)
        return _to_read(MaterialPreset(normalize_material_name(name), attrs))
