"""Test factories for building validated parameter sets."""
from .base_factory import BaseFactory
from .params_factory import ParamsFactory

__all__ = [
    "BaseFactory",
    "ParamsFactory",
]
