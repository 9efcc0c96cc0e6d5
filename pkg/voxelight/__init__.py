"""Voxelight: model-centric volumetric point clouds and a voxel ray tracer."""

__version__ = "1.0.0"
