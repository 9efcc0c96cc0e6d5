"""Scene router: demo scene listing, configs and generated clouds."""
from typing import List

from fastapi import APIRouter, Response

from voxelight.models import Encoding, Quantization
from voxelight.schemas import DemoSceneRead
from voxelight.services.cloud_service import CloudService
from voxelight.services.scenegen_service import ScenegenService

router = APIRouter(prefix="/api/scenes", tags=["scenes"])


@router.get("", response_model=List[str])
def get_all_scenes():
    """List demo scene names."""
    return ScenegenService.list_scenes()


@router.get("/{name}", response_model=DemoSceneRead)
def get_scene(name: str):
    """Get a demo scene summary with every lighting variant."""
    demo = ScenegenService.demo_scene(name)
    return DemoSceneRead(name=demo.name, dims=demo.grid.dims, voxel_size=demo.grid.voxel_size,
                         occupied=len(demo.grid), variants=demo.variants)


@router.get("/{name}/cloud")
def get_scene_cloud(name: str, encoding: Encoding = Encoding.BINARY,
                    quantization: Quantization = Quantization.FLOAT32):
    """Download the demo scene's cloud file."""
    demo = ScenegenService.demo_scene(name)
    content = CloudService.serialize_cloud(demo.grid, encoding, quantization)
    return Response(content=content, media_type="application/octet-stream",
                    headers={"Content-Disposition": f'attachment; filename="{name}.ply"'})
