"""Synthesis and verification of escaping orbits of transcendental maps."""

from .maps import catalog, iter_maxmod, max_modulus, parse_map
from .numeric_tower import LevelIndex
from .regions import parse_region

__all__ = ["LevelIndex", "catalog", "iter_maxmod", "max_modulus", "parse_map", "parse_region"]
__version__ = "0.1.0"
