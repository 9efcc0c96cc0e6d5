"""Render router: cloud + scene upload in, image out."""
from typing import Optional

from fastapi import APIRouter, File, Query, Response, UploadFile

from voxelight.services.cloud_service import CloudService
from voxelight.services.render_service import ImageFormat, RenderService
from voxelight.services.scene_service import SceneService

router = APIRouter(prefix="/api/renders", tags=["renders"])

MEDIA_TYPES = {ImageFormat.PPM: "image/x-portable-pixmap", ImageFormat.PNG: "image/png"}


@router.post("")
def create_render(
    cloud: UploadFile = File(...),
    scene: UploadFile = File(...),
    fmt: ImageFormat = Query(ImageFormat.PNG, alias="format"),
    spp: Optional[int] = Query(None, ge=1),
    width: Optional[int] = Query(None, ge=1),
    height: Optional[int] = Query(None, ge=1),
    seed: Optional[int] = Query(None, ge=0),
):
    """Render an uploaded cloud under an uploaded scene config.

    The scene's ``cloud`` path is ignored; the uploaded cloud is used.
    """
    cfg = SceneService.parse_scene(scene.file.read())
    cfg = SceneService.apply_overrides(cfg, spp=spp, seed=seed, width=width, height=height)
    grid = CloudService.parse_cloud(cloud.file.read())
    image = RenderService.render_image(SceneService.build_scene(cfg, grid), fmt)
    return Response(content=image, media_type=MEDIA_TYPES[fmt])
