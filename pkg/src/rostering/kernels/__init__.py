"""Hot kernels with a numba path and a pure-numpy path.

The active path is chosen once at import from ``ROSTERING_DISABLE_NUMBA``;
both remain importable (``loops`` / ``vector``) so they can be compared.
"""
from .._accel import USE_NUMBA, backend_name
from . import _loops as loops
from . import _vector as vector
from ._loops import N_COUNTS

_active = loops if USE_NUMBA else vector

count_batch = _active.count_batch
construct_colony = _active.construct_colony
decode_positions = _active.decode_positions

__all__ = ["N_COUNTS", "backend_name", "count_batch", "construct_colony",
           "decode_positions", "loops", "vector"]
