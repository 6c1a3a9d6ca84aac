"""Connectivity verdicts for inverse limits of covering towers.

A tower lists, level by level, the ambient group of a polyhedral
approximation (free or free abelian), the covering subgroup inside it,
and the bonding map down to the previous level.  The base mode states
what the fundamental group of the limit base is:

* ``wedge``: the shrinking wedge of circles; its loop group injects into
  the inverse limit of free groups and is dense there, and the ambient
  bonds are the generator-deleting projections.
* ``tower-complete``: the base group IS the inverse limit of the level
  groups (an infinite product of circles, for instance).
* ``countable-pi1``: a fixed base with countable fundamental group; all
  levels live in the same ambient group with identity bonds.

The verdict engine decides path-connectivity of the inverse limit of the
covers where that is certifiable at a finite horizon: the limit is
path-connected exactly when the subgroup tower has stabilizing images
(Mittag-Leffler) and the base group maps onto the inverse limit of the
level quotients.  Over a countable-pi1 base the second condition can
never hold for a non-constant tower, so those towers disconnect; over a
tower-complete base it follows from stabilization; over the wedge a
sufficient tail-generation test is applied and failure is reported as
Unknown, never Disconnected.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum

from . import abtower, stallings, words
from .abtower import (AbelianTower, Lattice, Mat, MLStatus, MLVerdict,
                      classify_image_chains, identity_matrix, image_lattice,
                      invariant_factors, kernel_mod_lattice, mat_mul,
                      preimage_lattice, quotient_order, stable_image_lattice)
from .stallings import CoreGraph, CoveringGraph
from .words import FreeHom, Word

DEFAULT_HORIZON = 8


class BaseMode(Enum):
    WEDGE = "wedge"
    TOWER_COMPLETE = "tower-complete"
    COUNTABLE_PI1 = "countable-pi1"


# --- subgroup descriptors ----------------------------------------------------


@dataclass(frozen=True)
class FreeGens:
    """Finitely generated subgroup of a free level, by generating words."""

    generators: tuple[Word, ...]


@dataclass(frozen=True)
class AbelianKernel:
    """Kernel of the map from a free level to Z^k or (Z/m)^k.

    ``images`` is the k x rank integer matrix whose column j is the image
    of generator j+1; ``modulus`` 0 means the free target Z^k.  The
    subgroup always contains the commutator subgroup, so all image and
    quotient computations reduce to its abelianized kernel lattice.
    """

    images: Mat
    modulus: int = 0

    def target_description(self) -> str:
        k = len(self.images)
        return f"Z^{k}" if self.modulus == 0 else f"(Z/{self.modulus})^{k}"


@dataclass(frozen=True)
class LatticeSub:
    """Subgroup of an abelian level, as a lattice."""

    lattice: Lattice


@dataclass(frozen=True)
class GridCocycle:
    """Subgroup of F_2 cut out by the first ``vanish`` crossing functionals.

    The commutator-subgroup cover of the rank-2 wedge is the unit grid in
    the plane; with the comb spanning tree (the horizontal axis plus all
    vertical lines) each remaining horizontal edge gives a crossing-count
    homomorphism from the commutator subgroup to Z.  The subgroup is the
    commutator subgroup intersected with the kernels of the first
    ``vanish`` of them, in a fixed enumeration; their intersection over
    all indices is the second derived subgroup.
    """

    vanish: int


Subgroup = FreeGens | AbelianKernel | LatticeSub | GridCocycle


@dataclass(frozen=True)
class LevelSpec:
    rank: int
    kind: str  # 'free' or 'abelian'
    subgroup: Subgroup
    bond: FreeHom | Mat | None = None  # map to the previous level; None at level 1


@dataclass(frozen=True)
class CoveringTower:
    base: BaseMode
    levels: tuple[LevelSpec, ...]
    stationary: bool = False
    name: str = ""

    @property
    def horizon(self) -> int:
        return len(self.levels)


def truncate(tower: CoveringTower, horizon: int) -> CoveringTower:
    h = min(horizon, len(tower.levels))
    return dataclasses.replace(tower, levels=tower.levels[:h])


# --- grid cocycle functionals -------------------------------------------------


def cocycle_edges(count: int) -> list[words.GridEdge]:
    """The first ``count`` non-tree horizontal grid edges, canonically ordered.

    Non-tree means off the horizontal axis; edges are ordered by taxicab
    distance of the tail, then by (height, offset).
    """
    edges: list[words.GridEdge] = []
    radius = 1
    while len(edges) < count:
        layer = []
        for q in range(-radius, radius + 1):
            if q == 0:
                continue
            rem = radius - abs(q)
            for p in ([0] if rem == 0 else [-rem, rem]):
                layer.append((p, q))
        layer.sort(key=lambda t: (t[1], t[0]))
        edges.extend(((p, q), 0) for p, q in layer)
        radius += 1
    return edges[:count]


def cocycle_witness(index: int) -> Word:
    """A loop crossing the ``index``-th non-tree edge once and no other."""
    (p, q), _ = cocycle_edges(index + 1)[index]
    letters: list[words.Letter] = []
    letters += [(1, 1 if p > 0 else -1)] * abs(p)
    letters += [(2, 1 if q > 0 else -1)] * abs(q)
    letters += [(1, 1)]
    letters += [(2, -1 if q > 0 else 1)] * abs(q)
    letters += [(1, -1 if p + 1 > 0 else 1)] * abs(p + 1)
    return words.reduce(letters, 2)


def grid_cocycle_member(w: Word, vanish: int) -> bool:
    if w.rank != 2:
        raise ValueError("grid cocycle subgroups live in rank 2")
    if not words.in_first_derived(w):
        return False
    return not any(words.grid_edge_crossings(w, cocycle_edges(vanish)))


# --- validation ----------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    level: int  # 1-based
    code: str
    message: str
    fatal: bool = True


def _ab_matrix(hom: FreeHom) -> Mat:
    cols = [words.exponent_vector(im) for im in hom.images]
    return tuple(tuple(col[r] for col in cols) for r in range(hom.target_rank))


def deletion_matrix(source_rank: int, target_rank: int) -> Mat:
    return tuple(tuple(1 if i == j else 0 for j in range(source_rank))
                 for i in range(target_rank))


def _kernel_lattice(sub: AbelianKernel) -> Lattice:
    return kernel_mod_lattice(sub.images, sub.modulus)


def _subgroup_lattice(level: LevelSpec) -> Lattice:
    if isinstance(level.subgroup, LatticeSub):
        return level.subgroup.lattice
    if isinstance(level.subgroup, AbelianKernel):
        return _kernel_lattice(level.subgroup)
    raise TypeError("level subgroup has no lattice reduction")


def _bond_matrix(level: LevelSpec) -> Mat:
    if isinstance(level.bond, FreeHom):
        return _ab_matrix(level.bond)
    if level.bond is None:
        raise ValueError("first level has no bond")
    return level.bond


def _core_of(level: LevelSpec) -> CoreGraph:
    assert isinstance(level.subgroup, FreeGens)
    return stallings.core_from_generators(level.subgroup.generators, level.rank)


def _is_identity_bond(level: LevelSpec, prev_rank: int) -> bool:
    if isinstance(level.bond, FreeHom):
        return level.bond == words.identity_hom(prev_rank)
    return level.bond == identity_matrix(prev_rank)


def validate_tower(tower: CoveringTower) -> list[Violation]:
    """Structural, compatibility, and regularity checks; empty means valid."""
    out: list[Violation] = []
    levels = tower.levels
    for idx, lv in enumerate(levels):
        n = idx + 1
        if lv.rank < 1:
            out.append(Violation(n, "rank", f"level {n}: rank must be positive"))
            continue
        if lv.kind not in ("free", "abelian"):
            out.append(Violation(n, "kind", f"level {n}: unknown kind {lv.kind!r}"))
            continue
        sub = lv.subgroup
        if lv.kind == "abelian":
            if not isinstance(sub, LatticeSub):
                out.append(Violation(n, "subgroup", f"level {n}: abelian levels take lattice subgroups"))
                continue
            if sub.lattice.ambient != lv.rank:
                out.append(Violation(n, "subgroup", f"level {n}: lattice ambient {sub.lattice.ambient} != rank {lv.rank}"))
        else:
            if isinstance(sub, LatticeSub):
                out.append(Violation(n, "subgroup", f"level {n}: free levels do not take lattice subgroups"))
                continue
            if isinstance(sub, FreeGens):
                for g in sub.generators:
                    if g.rank != lv.rank:
                        out.append(Violation(n, "subgroup", f"level {n}: generator rank {g.rank} != level rank {lv.rank}"))
            elif isinstance(sub, AbelianKernel):
                if sub.images and len(sub.images[0]) != lv.rank:
                    out.append(Violation(n, "subgroup", f"level {n}: kernel images have {len(sub.images[0])} columns, rank is {lv.rank}"))
                if sub.modulus < 0:
                    out.append(Violation(n, "subgroup", f"level {n}: negative modulus"))
            elif isinstance(sub, GridCocycle):
                if lv.rank != 2:
                    out.append(Violation(n, "subgroup", f"level {n}: grid cocycle subgroups require rank 2"))
                if sub.vanish < 0:
                    out.append(Violation(n, "subgroup", f"level {n}: negative vanish count"))
    if any(v.fatal for v in out):
        return out

    for idx in range(1, len(levels)):
        n = idx + 1
        lv, prev = levels[idx], levels[idx - 1]
        if lv.kind != prev.kind:
            out.append(Violation(n, "bond", f"level {n}: kind changes across the bond"))
            continue
        bond = lv.bond
        if bond is None:
            out.append(Violation(n, "bond", f"level {n}: missing bond"))
            continue
        if lv.kind == "free":
            if not isinstance(bond, FreeHom):
                out.append(Violation(n, "bond", f"level {n}: free levels need word bonds"))
                continue
            if bond.source_rank != lv.rank or bond.target_rank != prev.rank:
                out.append(Violation(n, "bond", f"level {n}: bond maps rank {bond.source_rank} to {bond.target_rank}, expected {lv.rank} to {prev.rank}"))
                continue
        else:
            if isinstance(bond, FreeHom):
                out.append(Violation(n, "bond", f"level {n}: abelian levels need matrix bonds"))
                continue
            rows = len(bond)
            cols = len(bond[0]) if bond else 0
            if rows != prev.rank or cols != lv.rank:
                out.append(Violation(n, "bond", f"level {n}: bond is {rows}x{cols}, expected {prev.rank}x{lv.rank}"))
                continue

        if tower.base is BaseMode.WEDGE:
            expected = words.deletion(lv.rank, prev.rank) if lv.rank >= prev.rank else None
            if expected is None or bond != expected:
                out.append(Violation(n, "base", f"level {n}: wedge towers require the deletion projection as bond"))
                continue
        if tower.base is BaseMode.COUNTABLE_PI1:
            if lv.rank != prev.rank or not _is_identity_bond(lv, prev.rank):
                out.append(Violation(n, "base", f"level {n}: fixed-base towers require identity bonds between equal ranks"))
                continue

        out.extend(_check_containment(tower, idx))

    if any(v.fatal for v in out):
        return out

    for idx, lv in enumerate(levels):
        n = idx + 1
        if isinstance(lv.subgroup, FreeGens) and lv.subgroup.generators:
            core = _core_of(lv)
            cov = stallings.complete_to_covering(core)
            if cov is None:
                out.append(Violation(n, "regularity",
                                     f"level {n}: infinite-index subgroup, normality not finitely checkable",
                                     fatal=False))
            elif not cov.is_normal():
                out.append(Violation(n, "regularity", f"level {n}: covering subgroup is not normal"))
    return out


def _check_containment(tower: CoveringTower, idx: int) -> list[Violation]:
    """Image of level idx's subgroup under its bond must land in level idx-1's."""
    n = idx + 1
    lv, prev = tower.levels[idx], tower.levels[idx - 1]
    sub, psub = lv.subgroup, prev.subgroup
    if isinstance(sub, GridCocycle) and isinstance(psub, GridCocycle):
        if sub.vanish < psub.vanish:
            return [Violation(n, "containment", f"level {n}: vanishing conditions decrease")]
        return []
    if isinstance(sub, FreeGens) and isinstance(psub, FreeGens):
        assert isinstance(lv.bond, FreeHom)
        pcore = _core_of(prev)
        core = _core_of(lv)
        for g in core.subgroup_generators():
            img = lv.bond.apply(g)
            if not pcore.contains(img):
                return [Violation(n, "containment",
                                  f"level {n}: image generator {img} escapes the level-{n - 1} subgroup")]
        return []
    if isinstance(sub, FreeGens) and isinstance(psub, AbelianKernel):
        assert isinstance(lv.bond, FreeHom)
        plat = _kernel_lattice(psub)
        core = _core_of(lv)
        for g in core.subgroup_generators():
            v = words.exponent_vector(lv.bond.apply(g))
            if not plat.contains_vector(v):
                return [Violation(n, "containment",
                                  f"level {n}: image of a generator escapes the level-{n - 1} kernel subgroup")]
        return []
    if isinstance(sub, (AbelianKernel, LatticeSub)) and isinstance(psub, (AbelianKernel, LatticeSub)):
        lat = _subgroup_lattice(lv)
        plat = _subgroup_lattice(prev)
        d = _bond_matrix(lv)
        mapped = image_lattice(mat_mul(d, lat.basis_columns))
        if not plat.contains(mapped):
            return [Violation(n, "containment",
                              f"level {n}: bond image of the subgroup lattice escapes level {n - 1}")]
        if isinstance(sub, AbelianKernel):
            # image reductions for kernel subgroups assume the ambient bond is onto
            if isinstance(lv.bond, FreeHom):
                img = stallings.core_from_generators(lv.bond.images, lv.bond.target_rank)
                onto = img.index() == 1
            else:
                onto = image_lattice(_bond_matrix(lv)).is_full
            if not onto:
                return [Violation(n, "containment",
                                  f"level {n}: kernel-described subgroup over a non-surjective bond",
                                  fatal=True)]
        return []
    return [Violation(n, "containment",
                      f"level {n}: containment across mixed subgroup descriptions is not supported")]


# --- image chains and Mittag-Leffler ------------------------------------------


def tower_mode(tower: CoveringTower) -> str:
    kinds = {type(lv.subgroup) for lv in tower.levels}
    if kinds <= {AbelianKernel, LatticeSub}:
        return "lattice"
    if kinds == {FreeGens}:
        return "gens"
    if kinds == {GridCocycle}:
        return "cocycle"
    return "mixed"


def subgroup_image_chain(tower: CoveringTower, level: int, horizon: int | None = None):
    """Images of the deeper subgroups in the given level (0-based index).

    Lattice-reducible towers return lattices (for kernel-described
    subgroups these are the abelianized kernels; the subgroups themselves
    are their preimages, which compare identically).  Generator towers
    return core graphs.
    """
    h = len(tower.levels) if horizon is None else min(horizon, len(tower.levels))
    mode = tower_mode(tower)
    lv = tower.levels[level]
    if mode == "lattice":
        chain = [_subgroup_lattice(lv)]
        comp = identity_matrix(lv.rank)
        for j in range(level + 1, h):
            comp = mat_mul(comp, _bond_matrix(tower.levels[j]))
            nxt = image_lattice(mat_mul(comp, _subgroup_lattice(tower.levels[j]).basis_columns))
            if not chain[-1].contains(nxt):
                raise AssertionError("subgroup image chain is not decreasing")
            chain.append(nxt)
        return chain
    if mode == "gens":
        chain = [_core_of(lv)]
        comp = words.identity_hom(lv.rank)
        for j in range(level + 1, h):
            bond = tower.levels[j].bond
            assert isinstance(bond, FreeHom)
            comp = words.compose(comp, bond)
            img = stallings.image_under_hom(_core_of(tower.levels[j]), comp)
            for g in img.subgroup_generators():
                if not chain[-1].contains(g):
                    raise AssertionError("subgroup image chain is not decreasing")
            chain.append(img)
        return chain
    if mode == "cocycle":
        return [tower.levels[j].subgroup for j in range(level, h)]
    raise ValueError("mixed subgroup descriptions have no common chain computation")


def coordinate_tower(tower: CoveringTower, horizon: int | None = None) -> AbelianTower:
    """The subgroup tower rewritten in each level's lattice basis.

    Level i becomes Z^{rank of the subgroup lattice}; the bond is the
    restriction of the ambient bond, whose image chains then match the
    actual lattice chains coordinate for coordinate.
    """
    h = len(tower.levels) if horizon is None else min(horizon, len(tower.levels))
    lats = [_subgroup_lattice(lv) for lv in tower.levels[:h]]
    ranks = tuple(l.rank for l in lats)
    bonds = []
    for i in range(h - 1):
        d = _bond_matrix(tower.levels[i + 1])
        mapped = mat_mul(d, lats[i + 1].basis_columns)
        bonds.append(abtower.coordinates_in_lattice(lats[i], mapped))
    return AbelianTower(ranks, tuple(bonds), stationary=tower.stationary)


def subgroup_ml_verdict(tower: CoveringTower, horizon: int | None = None) -> MLVerdict:
    """Mittag-Leffler verdict for the tower of covering subgroups."""
    h = len(tower.levels) if horizon is None else min(horizon, len(tower.levels))
    mode = tower_mode(tower)
    if mode == "lattice":
        return abtower.ml_observe(coordinate_tower(tower, h), h)
    if mode == "gens":
        chains = [subgroup_image_chain(tower, i, h) for i in range(h)]
        return classify_image_chains(chains, tower.stationary, h)
    return MLVerdict(MLStatus.UNDETERMINED, "unsupported-representation", h,
                     witness="no image computation for this subgroup description")


# --- quotients and the tail-generation criterion -------------------------------


@dataclass(frozen=True)
class QuotientData:
    kind: str  # 'abelian' | 'finite' | 'free' | 'unsupported'
    invariants: tuple[int, ...] | None = None
    order: int | None = None
    covering: CoveringGraph | None = None
    detail: str = ""


def quotient_data(tower: CoveringTower, level: int) -> QuotientData:
    """Description of ambient/subgroup at the given level (0-based)."""
    lv = tower.levels[level]
    sub = lv.subgroup
    if isinstance(sub, (AbelianKernel, LatticeSub)):
        lat = _subgroup_lattice(lv)
        return QuotientData("abelian", invariants=invariant_factors(lat),
                            order=quotient_order(lat))
    if isinstance(sub, FreeGens):
        if not sub.generators:
            return QuotientData("free", detail=f"free of rank {lv.rank}")
        core = _core_of(lv)
        cov = stallings.complete_to_covering(core)
        if cov is not None:
            return QuotientData("finite", order=cov.covering_index, covering=cov)
        return QuotientData("unsupported",
                            detail="infinite-index nonabelian quotient")
    return QuotientData("unsupported", detail="no quotient model for this subgroup description")


@dataclass(frozen=True)
class TailResult:
    outcome: str  # 'holds' | 'fails' | 'unsupported'
    level: int | None = None  # 1-based lower level of the offending pair
    detail: str = ""


def _tail_step_kernel(tower: CoveringTower, i: int) -> bool:
    lo, hi = tower.levels[i], tower.levels[i + 1]
    d = deletion_matrix(hi.rank, lo.rank)
    pre = preimage_lattice(d, _subgroup_lattice(lo))
    new_axes = [tuple(1 if k == j else 0 for k in range(hi.rank))
                for j in range(lo.rank, hi.rank)]
    gen = _subgroup_lattice(hi).sum(Lattice.from_vectors(hi.rank, new_axes))
    return pre == gen


def _tail_step_finite(cov_lo: CoveringGraph, cov_hi: CoveringGraph,
                      lo_rank: int, hi_rank: int) -> bool:
    proj = words.deletion(hi_rank, lo_rank)
    kernel = set()
    for v, w in enumerate(cov_hi.vertex_words()):
        if cov_lo.trace_from(0, proj.apply(w)) == 0:
            kernel.add(v)
    reached = {0}
    frontier = [0]
    while frontier:
        u = frontier.pop()
        for g in range(lo_rank + 1, hi_rank + 1):
            for w in (words.generator(g, hi_rank), words.generator(g, hi_rank).inverse()):
                v = cov_hi.trace_from(u, w)
                assert v is not None
                if v not in reached:
                    reached.add(v)
                    frontier.append(v)
    return kernel == reached


def tail_generation_criterion(tower: CoveringTower, horizon: int | None = None) -> TailResult:
    """Sufficient test that every coherent quotient sequence lifts to a loop.

    Checks, between consecutive levels, that the kernel of the quotient
    bond is generated by the images of the new generators: then any
    coherent sequence of quotient elements is realized by an ordered
    product of blocks in ever-smaller circles, which is a genuine loop of
    the wedge.  Failure only means this particular certificate is
    unavailable, so callers must treat it as inconclusive.
    """
    if tower.base is not BaseMode.WEDGE:
        return TailResult("unsupported", None, "criterion applies to wedge towers only")
    h = len(tower.levels) if horizon is None else min(horizon, len(tower.levels))
    for i in range(h - 1):
        lo, hi = tower.levels[i], tower.levels[i + 1]
        pair = (lo.subgroup, hi.subgroup)
        if isinstance(pair[0], (AbelianKernel, LatticeSub)) and isinstance(pair[1], (AbelianKernel, LatticeSub)):
            if not _tail_step_kernel(tower, i):
                return TailResult("fails", i + 1,
                                  f"levels {i + 1}->{i + 2}: quotient-bond kernel exceeds the "
                                  f"subgroup generated by new-generator images")
            continue
        if isinstance(pair[0], FreeGens) and isinstance(pair[1], FreeGens):
            if not pair[0].generators and not pair[1].generators:
                if hi.rank == lo.rank:
                    continue
                witness = (words.generator(1, hi.rank)
                           * words.generator(lo.rank + 1, hi.rank)
                           * words.generator(1, hi.rank).inverse())
                gen_core = stallings.core_from_generators(
                    [words.generator(g, hi.rank) for g in range(lo.rank + 1, hi.rank + 1)], hi.rank)
                assert words.deletion(hi.rank, lo.rank).apply(witness).is_identity
                assert not gen_core.contains(witness)
                return TailResult("fails", i + 1,
                                  f"levels {i + 1}->{i + 2}: conjugate {witness} lies in the "
                                  f"quotient-bond kernel but not in the span of new generators")
            cov_lo = stallings.complete_to_covering(_core_of(lo))
            cov_hi = stallings.complete_to_covering(_core_of(hi))
            if cov_lo is None or cov_hi is None:
                return TailResult("unsupported", i + 1,
                                  f"levels {i + 1}->{i + 2}: infinite-index nonabelian quotient")
            if not _tail_step_finite(cov_lo, cov_hi, lo.rank, hi.rank):
                return TailResult("fails", i + 1,
                                  f"levels {i + 1}->{i + 2}: coset search found kernel cosets "
                                  f"outside the span of new-generator images")
            continue
        return TailResult("unsupported", i + 1,
                          f"levels {i + 1}->{i + 2}: mixed subgroup descriptions")
    return TailResult("holds")


# --- the verdict engine ---------------------------------------------------------


class Connectivity(Enum):
    CONNECTED = "Connected"
    DISCONNECTED = "Disconnected"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Verdict:
    status: Connectivity
    rules: tuple[tuple[str, str], ...]  # (tag, detail)
    witnesses: tuple[str, ...]
    horizon: int


def _fixed_base_steps(tower: CoveringTower) -> list[str]:
    """Per-step comparison of consecutive subgroups over a fixed base."""
    steps = []
    for i in range(len(tower.levels) - 1):
        a, b = tower.levels[i].subgroup, tower.levels[i + 1].subgroup
        if isinstance(a, (LatticeSub, AbelianKernel)) and isinstance(b, (LatticeSub, AbelianKernel)):
            la, lb = _subgroup_lattice(tower.levels[i]), _subgroup_lattice(tower.levels[i + 1])
            steps.append("equal" if la == lb else "strict")
        elif isinstance(a, FreeGens) and isinstance(b, FreeGens):
            ca, cb = _core_of(tower.levels[i]), _core_of(tower.levels[i + 1])
            steps.append("equal" if ca == cb else "strict")
        elif isinstance(a, GridCocycle) and isinstance(b, GridCocycle):
            if a.vanish == b.vanish:
                steps.append("equal")
            else:
                w = cocycle_witness(a.vanish)
                if grid_cocycle_member(w, a.vanish) and not grid_cocycle_member(w, b.vanish):
                    steps.append("strict")
                else:
                    steps.append("unknown")
        else:
            steps.append("unknown")
    return steps


def connectivity_verdict(tower: CoveringTower, horizon: int | None = None) -> Verdict:
    """Path-connectivity of the inverse limit of the covering tower.

    Connected and Disconnected are only ever returned with a certificate;
    everything not certified at the horizon is Unknown.  Raising the
    horizon can resolve Unknown but never flips a certified verdict.
    """
    violations = [v for v in validate_tower(tower) if v.fatal]
    if violations:
        raise ValueError("invalid tower: " + "; ".join(v.message for v in violations))
    h = len(tower.levels) if horizon is None else min(horizon, len(tower.levels))
    tt = truncate(tower, h)

    if tower.base is BaseMode.COUNTABLE_PI1:
        steps = _fixed_base_steps(tt)
        if tower.stationary and all(s == "equal" for s in steps):
            return Verdict(Connectivity.CONNECTED, (
                ("eventually-constant",
                 "covering subgroups are constant and declared persistent: the limit is a covering space"),
            ), (), h)
        if tower.stationary and steps and all(s == "strict" for s in steps):
            return Verdict(Connectivity.DISCONNECTED, (
                ("countable-base-descent",
                 "base group is countable and the covering subgroups descend strictly at every "
                 "level with the pattern declared persistent: the limit is not a covering, so it disconnects"),
            ), (f"strict descent at all {len(steps)} observed steps",), h)
        return Verdict(Connectivity.UNKNOWN, (
            ("countable-base-undetermined",
             "no certified stabilization or persistent descent of the subgroup sequence at this horizon"),
        ), (), h)

    mlv = subgroup_ml_verdict(tt, h)
    ml_rule = (f"ml-{mlv.status.value}", f"{mlv.tag}: {mlv.witness}")
    if mlv.status is MLStatus.NOT_ML:
        return Verdict(Connectivity.DISCONNECTED,
                       (("ml-fail", f"subgroup images do not stabilize ({mlv.tag})"),),
                       (mlv.witness,), h)
    if mlv.status is not MLStatus.ML:
        return Verdict(Connectivity.UNKNOWN,
                       (("ml-undetermined", f"image stabilization not certified ({mlv.tag})"),),
                       (mlv.witness,), h)

    if tower.base is BaseMode.TOWER_COMPLETE:
        return Verdict(Connectivity.CONNECTED, (
            ("ml-ok", f"subgroup images stabilize ({mlv.tag})"),
            ("surjectivity-exactness",
             "the base group is the full inverse limit, and stabilization makes it map onto "
             "the limit of the level quotients"),
        ), (mlv.witness,), h)

    tail = tail_generation_criterion(tt, h)
    if tail.outcome == "holds":
        return Verdict(Connectivity.CONNECTED, (
            ("ml-ok", f"subgroup images stabilize ({mlv.tag})"),
            ("tail-generation-holds",
             "each quotient-bond kernel is generated by new-generator images, so every coherent "
             "quotient sequence is realized by a wedge loop"),
        ), (mlv.witness,), h)
    if tail.outcome == "fails":
        return Verdict(Connectivity.UNKNOWN, (
            ("ml-ok", f"subgroup images stabilize ({mlv.tag})"),
            ("tail-generation-fails",
             "the sufficient surjectivity certificate is unavailable; the criterion failing does "
             "not disconnect the limit"),
        ), (tail.detail,), h)
    return Verdict(Connectivity.UNKNOWN, (
        ("ml-ok", f"subgroup images stabilize ({mlv.tag})"),
        ("tail-generation-unsupported", tail.detail),
    ), (), h)


# --- fundamental group of the limit ---------------------------------------------


@dataclass(frozen=True)
class Pi1Report:
    kind: str
    text: str
    level_lines: tuple[str, ...] = ()
    exact_images: tuple[Lattice, ...] | None = None


def pi1_of_limit(tower: CoveringTower, horizon: int | None = None) -> Pi1Report:
    """The fundamental group of the limit space, exact where possible.

    The limit's group is the inverse limit of the covering subgroups.
    For abelian towers this is computed exactly when the image chains
    stabilize, and exactly as the invertible core when the tower is
    stationary; otherwise the report stays symbolic.
    """
    h = len(tower.levels) if horizon is None else min(horizon, len(tower.levels))
    tt = truncate(tower, h)
    levels = tt.levels

    if all(isinstance(lv.subgroup, FreeGens) and not lv.subgroup.generators for lv in levels):
        return Pi1Report("trivial", "trivial: every level cover is simply connected")

    if all(isinstance(lv.subgroup, LatticeSub) for lv in levels):
        coord = coordinate_tower(tt, h)
        lats = [_subgroup_lattice(lv) for lv in levels]

        def to_ambient(i: int, coords: Lattice) -> Lattice:
            prod = mat_mul(lats[i].basis_columns, coords.basis_columns)
            return Lattice.from_vectors(levels[i].rank, abtower.transpose(prod))

        if (tt.stationary and h >= 2 and len(set(coord.ranks)) == 1
                and len(set(coord.bonds)) == 1):
            core = stable_image_lattice(coord.bonds[0])
            images = tuple(to_ambient(i, core) for i in range(h))
            if all(l.rank == 0 for l in images):
                return Pi1Report("trivial-limit",
                                 "trivial: no nonzero coherent sequence survives the bonds",
                                 exact_images=images)
            lines = tuple(f"level {i + 1}: image {list(l.rows)}" for i, l in enumerate(images))
            return Pi1Report("exact", "inverse limit with the stated exact images per level",
                             lines, images)
        mlv = abtower.ml_observe(coord, h)
        chains = abtower.tower_image_chains(coord, h)
        if mlv.status is MLStatus.ML:
            images = tuple(to_ambient(i, chains[i][-1]) for i in range(h))
            lines = tuple(f"level {i + 1}: image {list(l.rows)}" for i, l in enumerate(images))
            return Pi1Report("exact", "images stabilize; the limit maps onto the stated lattices",
                             lines, images)
        lines = tuple(f"level {i + 1}: image contained in {list(to_ambient(i, chains[i][-1]).rows)}"
                      for i in range(h))
        return Pi1Report("bounded",
                         "image chains do not stabilize at this horizon; the lines are upper bounds",
                         lines)

    if all(isinstance(lv.subgroup, AbelianKernel) for lv in levels):
        lines = tuple(
            f"level {i + 1}: kernel of F_{lv.rank} -> {lv.subgroup.target_description()}"
            for i, lv in enumerate(levels))
        return Pi1Report("kernel-limit",
                         "inverse limit of the level kernels; for these abelian targets it equals "
                         "the matching kernel of the full inverse limit group", lines)

    if all(isinstance(lv.subgroup, GridCocycle) for lv in levels):
        lines = tuple(f"level {i + 1}: first {lv.subgroup.vanish} crossing functionals vanish"
                      for i, lv in enumerate(levels))
        return Pi1Report("kernel-chain",
                         "strictly decreasing kernels of crossing functionals; their full "
                         "intersection is the second derived subgroup of the rank-2 free group",
                         lines)

    lines = []
    for i, lv in enumerate(levels):
        if isinstance(lv.subgroup, FreeGens):
            core = _core_of(lv)
            idx = core.index()
            lines.append(f"level {i + 1}: free subgroup of rank {core.subgroup_rank()}, "
                         f"index {'infinite' if idx is None else idx}")
        else:
            lines.append(f"level {i + 1}: {type(lv.subgroup).__name__}")
    return Pi1Report("subgroup-limit",
                     "inverse limit of the listed subgroups under the restricted bonds",
                     tuple(lines))
