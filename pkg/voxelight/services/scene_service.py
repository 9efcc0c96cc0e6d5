"""Scene file service: strict JSON parsing, canonical serialization, scene assembly."""
import json
import logging
from typing import Any, Dict, Optional, Union

from pydantic import ValidationError

from voxelight.errors import SchemaError
from voxelight.models import VoxelGrid
from voxelight.schemas import SceneConfig
from voxelight.shading import Scene

logger = logging.getLogger(__name__)


def _loc_path(loc) -> str:
    return ".".join(str(part) for part in loc)


class SceneService:
    """Service for scene-configuration operations."""

    @staticmethod
    def parse_scene(data: Union[bytes, str, Dict[str, Any]]) -> SceneConfig:
        """Parse a scene document; unknown keys and bad values raise SchemaError."""
        if isinstance(data, (bytes, bytearray)):
            try:
                data = data.decode("utf-8")
            except UnicodeDecodeError:
                raise SchemaError("", "scene file is not UTF-8")
        if isinstance(data, str):
            try:
                data = json.loads(data)
            except json.JSONDecodeError as exc:
                raise SchemaError("", f"invalid JSON at line {exc.lineno}: {exc.msg}")
        if not isinstance(data, dict):
            raise SchemaError("", "scene document must be a JSON object")
        try:
            cfg = SceneConfig.model_validate(data)
        except ValidationError as exc:
            errors = [(_loc_path(e["loc"]), e["msg"]) for e in exc.errors()]
            path, reason = errors[0]
            raise SchemaError(path, reason, errors)
        logger.debug("parsed scene for cloud %s with %d lights", cfg.cloud, len(cfg.lights))
        return cfg

    @staticmethod
    def serialize_scene(cfg: SceneConfig) -> bytes:
        """Canonical bytes: sorted keys, two-space indent, trailing newline."""
        doc = cfg.model_dump(mode="json", exclude_none=True)
        return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")

    @staticmethod
    def apply_overrides(cfg: SceneConfig, spp: Optional[int] = None, max_depth: Optional[int] = None,
                        seed: Optional[int] = None, width: Optional[int] = None,
                        height: Optional[int] = None) -> SceneConfig:
        """Flags beat file values; None means keep the file value."""
        render = {k: v for k, v in (("spp", spp), ("max_depth", max_depth), ("seed", seed)) if v is not None}
        camera = {k: v for k, v in (("width", width), ("height", height)) if v is not None}
        if not render and not camera:
            return cfg
        doc = cfg.model_dump()
        doc["render"].update(render)
        doc["camera"].update(camera)
        return SceneService.parse_scene(doc)

    @staticmethod
    def build_scene(cfg: SceneConfig, grid: VoxelGrid) -> Scene:
        """Combine a cloud with the illumination and viewpoint it does not carry."""
        return Scene(grid=grid, camera=cfg.camera, lights=tuple(cfg.lights),
                     background=cfg.background, params=cfg.render, mapping=cfg.optics)
