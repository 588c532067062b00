"""Ergodic averages and Khintchine-type recurrence for finite-dimensional
*-dynamical systems driven by discrete groups."""
from __future__ import annotations

__version__ = "0.1.0"

from .algebra import AlgebraDescriptor, AlgebraElement, State
from .dynamics import DynMap, StarDynamicalSystem, validate_system
from .ergodic import (
    convergence_profile,
    ergodic_avg,
    fixed_projection,
    is_ergodic,
    khintchine_recurrence,
    khintchine_window,
)
from .exceptions import InconsistentDynamicsError, NetExhaustedError, PreconditionError
from .gns import gns_build, gns_lift, iota
from .multirec import multiple_recurrence_search
from .semigroup import FolnerNet, GroupElement, SemigroupModel, Side, box_folner_net

__all__ = [
    "AlgebraDescriptor",
    "AlgebraElement",
    "DynMap",
    "FolnerNet",
    "GroupElement",
    "InconsistentDynamicsError",
    "NetExhaustedError",
    "PreconditionError",
    "SemigroupModel",
    "Side",
    "StarDynamicalSystem",
    "State",
    "box_folner_net",
    "convergence_profile",
    "ergodic_avg",
    "fixed_projection",
    "gns_build",
    "gns_lift",
    "iota",
    "is_ergodic",
    "khintchine_recurrence",
    "khintchine_window",
    "multiple_recurrence_search",
    "validate_system",
]
