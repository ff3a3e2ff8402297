"""Exact and certified tools for fault-potential lattice models and their ground states."""
__version__ = "0.1.0"

from .lattice import Alphabet, ForbiddenSet, Pattern, PeriodicPoint, Window, weak_star_distance
from .tiledsl import TilesetError, compile_tileset, format_tileset, load_corpus, parse_tileset

__all__ = ["Alphabet", "ForbiddenSet", "Pattern", "PeriodicPoint", "Window", "weak_star_distance",
           "TilesetError", "compile_tileset", "format_tileset", "load_corpus", "parse_tileset", "__version__"]
