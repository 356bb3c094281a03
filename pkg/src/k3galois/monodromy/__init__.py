"""Numerical monodromy of a linear projection restricted over a line."""

from .loops import Arc, MonodromyResult, Segment, compute_monodromy, monodromy_group, track_loop
from .pencil import BranchPoint, PencilCover, build_pencil, discriminant_points
from .perm import GaloisVerdict, PermGroup, cycle_type, genus_from_cycles, is_galois

__all__ = ["Arc", "BranchPoint", "GaloisVerdict", "MonodromyResult", "PencilCover", "PermGroup",
           "Segment", "build_pencil", "compute_monodromy", "cycle_type", "discriminant_points",
           "genus_from_cycles", "is_galois", "monodromy_group", "track_loop"]
