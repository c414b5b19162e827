"""Stable initial data for inviscid Burgers: sampling, Hopf-Cole geometry and persistence."""

__version__ = "0.1.0"

from .stable import StableParams, sample_stable, sample_path, two_sided_data
from .rng import SplitStream

__all__ = ["__version__", "StableParams", "SplitStream", "sample_stable", "sample_path", "two_sided_data"]
