"""Biased preferential attachment with colored vertices, its urn shadow,
the limiting red share, and the homophily game built on top of it."""
from .model import Color, DomainError, MixingMatrix, ModelParams, Profile

__version__ = "0.1.0"

__all__ = ["Color", "DomainError", "MixingMatrix", "ModelParams", "Profile", "__version__"]
