"""Built-in covering towers exercised by the command line and the tests.

Each builder takes a horizon and returns a fully populated tower whose
pattern continues the same way at every deeper level, so all of them
declare stationarity.  The expected connectivity verdicts double as the
regression table for the acceptance suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from . import words
from .abtower import Lattice, identity_matrix
from .towers import (AbelianKernel, BaseMode, CoveringTower, FreeGens,
                     GridCocycle, LatticeSub, LevelSpec, deletion_matrix)


def torus_universal(horizon: int) -> CoveringTower:
    """Coordinate-wise unwrapping of finite tori: simply connected covers."""
    levels = []
    for i in range(1, horizon + 1):
        bond = None if i == 1 else deletion_matrix(i, i - 1)
        levels.append(LevelSpec(i, "abelian", LatticeSub(Lattice.zero(i)), bond))
    return CoveringTower(BaseMode.TOWER_COMPLETE, tuple(levels), stationary=True,
                         name="torus-universal")


def cw_torus(horizon: int) -> CoveringTower:
    """Covers of the weak infinite torus unwrapping one more circle per level."""
    ambient = horizon + 1
    levels = []
    for i in range(1, horizon + 1):
        vectors = [tuple(1 if j == k else 0 for j in range(ambient))
                   for k in range(i - 1, ambient)]
        bond = None if i == 1 else identity_matrix(ambient)
        levels.append(LevelSpec(ambient, "abelian",
                                LatticeSub(Lattice.from_vectors(ambient, vectors)), bond))
    return CoveringTower(BaseMode.COUNTABLE_PI1, tuple(levels), stationary=True,
                         name="cw-torus")


def squaring(horizon: int) -> CoveringTower:
    """Coordinate-squaring covers of finite wedges: index 2^i at level i."""
    levels = []
    for i in range(1, horizon + 1):
        bond = None if i == 1 else words.deletion(i, i - 1)
        levels.append(LevelSpec(i, "free", AbelianKernel(identity_matrix(i), modulus=2), bond))
    return CoveringTower(BaseMode.WEDGE, tuple(levels), stationary=True, name="squaring")


def solenoid_twist(horizon: int) -> CoveringTower:
    """Cyclic twisted covers of finite tori; the limit picks up a dyadic solenoid."""
    levels = []
    for i in range(1, horizon + 1):
        vector = tuple(2 ** (i - k) for k in range(i + 1))
        lat = Lattice.from_vectors(i + 1, [vector])
        bond = None if i == 1 else deletion_matrix(i + 1, i)
        levels.append(LevelSpec(i + 1, "abelian", LatticeSub(lat), bond))
    return CoveringTower(BaseMode.TOWER_COMPLETE, tuple(levels), stationary=True,
                         name="solenoid-twist")


def grid(horizon: int) -> CoveringTower:
    """Integer-grid covers of finite wedges: the commutator-subgroup covers."""
    levels = []
    for i in range(1, horizon + 1):
        bond = None if i == 1 else words.deletion(i, i - 1)
        levels.append(LevelSpec(i, "free", AbelianKernel(identity_matrix(i), modulus=0), bond))
    return CoveringTower(BaseMode.WEDGE, tuple(levels), stationary=True, name="grid")


def second_derived(horizon: int) -> CoveringTower:
    """Strictly finer cyclic covers of the rank-2 grid, shrinking toward the
    second derived cover."""
    levels = []
    for i in range(1, horizon + 1):
        bond = None if i == 1 else words.identity_hom(2)
        levels.append(LevelSpec(2, "free", GridCocycle(i), bond))
    return CoveringTower(BaseMode.COUNTABLE_PI1, tuple(levels), stationary=True,
                         name="second-derived")


def universal_cover(horizon: int) -> CoveringTower:
    """Universal covers of finite wedges of circles."""
    levels = []
    for i in range(1, horizon + 1):
        bond = None if i == 1 else words.deletion(i, i - 1)
        levels.append(LevelSpec(i, "free", FreeGens(()), bond))
    return CoveringTower(BaseMode.WEDGE, tuple(levels), stationary=True,
                         name="universal-cover")


@dataclass(frozen=True)
class BuiltinTower:
    name: str
    build: Callable[[int], CoveringTower]
    description: str
    expected: str  # regression verdict at any horizon >= 2


BUILTINS: tuple[BuiltinTower, ...] = (
    BuiltinTower("torus-universal", torus_universal,
                 "unwrap one circle of an infinite torus per level (simply connected covers)",
                 "Connected"),
    BuiltinTower("cw-torus", cw_torus,
                 "covers of the weak infinite torus killing one more coordinate per level",
                 "Disconnected"),
    BuiltinTower("squaring", squaring,
                 "coordinate-squaring covers of finite wedges of circles",
                 "Connected"),
    BuiltinTower("solenoid-twist", solenoid_twist,
                 "twisted cyclic covers of finite tori with a dyadic solenoid in the limit",
                 "Disconnected"),
    BuiltinTower("grid", grid,
                 "commutator-subgroup covers of finite wedges: integer grids",
                 "Connected"),
    BuiltinTower("second-derived", second_derived,
                 "strictly decreasing cyclic covers of the rank-2 grid toward the second derived cover",
                 "Disconnected"),
    BuiltinTower("universal-cover", universal_cover,
                 "universal covers of finite wedges of circles",
                 "Unknown"),
)


def builtin_names() -> tuple[str, ...]:
    return tuple(b.name for b in BUILTINS)


def get_builtin(name: str) -> BuiltinTower:
    for b in BUILTINS:
        if b.name == name:
            return b
    raise KeyError(f"no builtin tower named {name!r}")
