"""Chaotic cot^2 byte generator with dynamics and statistics tooling."""

from .bytegen import GeneratorState, extract_bytes, fill, hex_mantissa, seed_from_time, seed_from_value, step
from .map_core import EvalResult, MapId, PeriodicMap, Status, get_map

__version__ = "0.1.0"
