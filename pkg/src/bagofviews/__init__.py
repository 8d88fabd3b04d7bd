"""Concept-window sampling, view switching, attention masks and FLOPs audits
for bag-of-views open-vocabulary detection."""

from .config import PipelineConfig, profile
from .geometry import BBox, ImageDims, ScoredBox
from .pipeline import SampleOutput, run_pipeline
from .scene import SceneInput

__all__ = [
    "BBox",
    "ImageDims",
    "PipelineConfig",
    "SampleOutput",
    "SceneInput",
    "ScoredBox",
    "profile",
    "run_pipeline",
]

__version__ = "0.1.0"
