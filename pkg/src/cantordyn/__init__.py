"""Cantor-set dynamics through towers of finite dynamical systems."""

from .findyn import (
    CycleDecomposition,
    DynamicsError,
    EquivariantMap,
    FiniteSystem,
    ResourceLimitError,
    cycle_decomposition,
    find_equivariant_maps,
    is_equivariant,
    phi_k_holds,
    product,
)
from .odometer import (
    OdometerSpec,
    SupernaturalNumber,
    conjugate,
    odometer_tower,
    phi_k_odometer,
    supernatural,
    swap_sentence_holds,
    truncation,
)
from .spiral import SpiralLevel, SpiralPoint, build_level, build_spiral, xi, xi_step
from .tower import ClopenSet, LevelPartition, PreconditionError, Tower

__version__ = "0.1.0"
