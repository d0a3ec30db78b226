"""QoS competition: consumer congestion games, producer games, dynamics."""
from .measure import Measure
from .consumer import (
    NOCONSUME,
    LoadVector,
    add_water,
    compute_loads,
    purify,
    symmetric_equilibrium,
    verify_equilibrium,
)

__all__ = [
    "Measure",
    "NOCONSUME",
    "LoadVector",
    "add_water",
    "compute_loads",
    "purify",
    "symmetric_equilibrium",
    "verify_equilibrium",
]
