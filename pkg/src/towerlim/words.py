"""Reduced words in finite-rank free groups.

Generators are numbered from 1.  The text form writes generator 3 as
``x3`` and its inverse as ``X3``; ``x3^-2`` is shorthand for ``X3 X3``,
``[u,v]`` for the commutator ``u v u^-1 v^-1``, and ``1`` for the empty
word.  Every :class:`Word` is freely reduced, so value equality is
equality in the group.

Beyond the group operations this module knows how to abelianize words,
lift them to edge paths on the unit grid of ``Z^n``, read off the
homology class of a lifted loop, and decide membership in the first and
second derived subgroups (the latter two ways: through the grid lift and
through abelianized free differential calculus, which are independent
computations).
"""

from __future__ import annotations

import re
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Iterable, Sequence

Letter = tuple[int, int]  # (generator index >= 1, sign +1 or -1)


def _free_reduce(letters: Iterable[Letter]) -> tuple[Letter, ...]:
    stack: list[Letter] = []
    for gen, sign in letters:
        if stack and stack[-1][0] == gen and stack[-1][1] == -sign:
            stack.pop()
        else:
            stack.append((gen, sign))
    return tuple(stack)


@dataclass(frozen=True)
class Word:
    """A freely reduced word; ``letters`` is empty for the identity."""

    letters: tuple[Letter, ...]
    rank: int

    def __post_init__(self) -> None:
        if self.rank < 0:
            raise ValueError("rank must be nonnegative")
        prev: Letter | None = None
        for gen, sign in self.letters:
            if not 1 <= gen <= self.rank:
                raise ValueError(f"generator index {gen} out of range for rank {self.rank}")
            if sign not in (1, -1):
                raise ValueError(f"invalid sign {sign}")
            if prev is not None and prev[0] == gen and prev[1] == -sign:
                raise ValueError("word is not freely reduced")
            prev = (gen, sign)

    @property
    def is_identity(self) -> bool:
        return not self.letters

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        if self.rank != other.rank:
            raise ValueError(f"rank mismatch: {self.rank} != {other.rank}")
        return Word(_free_reduce(self.letters + other.letters), self.rank)

    def inverse(self) -> "Word":
        return Word(tuple((g, -s) for g, s in reversed(self.letters)), self.rank)

    def __pow__(self, n: int) -> "Word":
        base = self if n >= 0 else self.inverse()
        out = identity(self.rank)
        for _ in range(abs(n)):
            out = out * base
        return out

    def __str__(self) -> str:
        if not self.letters:
            return "1"
        parts = []
        i = 0
        while i < len(self.letters):
            gen, sign = self.letters[i]
            j = i
            while j < len(self.letters) and self.letters[j] == (gen, sign):
                j += 1
            run = j - i
            tok = f"x{gen}" if sign > 0 else f"X{gen}"
            parts.append(tok if run == 1 else f"{tok}^{run}")
            i = j
        return " ".join(parts)


def identity(rank: int) -> Word:
    return Word((), rank)


def generator(i: int, rank: int) -> Word:
    return Word(((i, 1),), rank)


def reduce(raw: Sequence[Letter], rank: int) -> Word:
    """Freely reduce a raw letter sequence into a :class:`Word`."""
    for gen, sign in raw:
        if not 1 <= gen <= rank:
            raise ValueError(f"generator index {gen} out of range for rank {rank}")
        if sign not in (1, -1):
            raise ValueError(f"invalid sign {sign}")
    return Word(_free_reduce(raw), rank)


def commutator(a: Word, b: Word) -> Word:
    return a * b * a.inverse() * b.inverse()


_TOKEN_RE = re.compile(r"([xX])(\d+)(?:\^(-?\d+))?")


def _tokenize(text: str) -> list[str]:
    spaced = text.replace("[", " [ ").replace("]", " ] ").replace(",", " , ")
    return spaced.split()


def _parse_tokens(tokens: list[str], pos: int, stop: set[str]) -> tuple[list[Letter], int]:
    letters: list[Letter] = []
    while pos < len(tokens) and tokens[pos] not in stop:
        tok = tokens[pos]
        if tok == "[":
            left, pos = _parse_tokens(tokens, pos + 1, {","})
            if pos >= len(tokens) or tokens[pos] != ",":
                raise ValueError("unterminated commutator: expected ','")
            right, pos = _parse_tokens(tokens, pos + 1, {"]"})
            if pos >= len(tokens) or tokens[pos] != "]":
                raise ValueError("unterminated commutator: expected ']'")
            pos += 1
            letters += left + right
            letters += [(g, -s) for g, s in reversed(left)]
            letters += [(g, -s) for g, s in reversed(right)]
            continue
        if tok == "1":
            pos += 1
            continue
        m = _TOKEN_RE.fullmatch(tok)
        if m is None:
            raise ValueError(f"bad word token: {tok!r}")
        gen = int(m.group(2))
        sign = 1 if m.group(1) == "x" else -1
        exp = 1 if m.group(3) is None else int(m.group(3))
        total = sign * exp
        letters += [(gen, 1 if total > 0 else -1)] * abs(total)
        pos += 1
    return letters, pos


def word(text: str, rank: int | None = None) -> Word:
    """Parse the text form of a word.

    With ``rank=None`` the rank is taken to be the largest generator
    index that occurs (1 for the empty word).
    """
    letters, pos = _parse_tokens(_tokenize(text), 0, set())
    if pos != len(_tokenize(text)):
        raise ValueError(f"trailing tokens in word: {text!r}")
    if rank is None:
        rank = max((g for g, _ in letters), default=1)
    return reduce(letters, rank)


@dataclass(frozen=True)
class FreeHom:
    """Homomorphism between free groups, given by generator images."""

    source_rank: int
    target_rank: int
    images: tuple[Word, ...]

    def __post_init__(self) -> None:
        if len(self.images) != self.source_rank:
            raise ValueError("need one image per source generator")
        for im in self.images:
            if im.rank != self.target_rank:
                raise ValueError("image rank does not match target rank")

    def apply(self, w: Word) -> Word:
        if w.rank != self.source_rank:
            raise ValueError(f"rank mismatch: word has rank {w.rank}, hom expects {self.source_rank}")
        out: list[Letter] = []
        for gen, sign in w.letters:
            img = self.images[gen - 1]
            if sign > 0:
                out.extend(img.letters)
            else:
                out.extend((g, -s) for g, s in reversed(img.letters))
        return Word(_free_reduce(out), self.target_rank)


def identity_hom(rank: int) -> FreeHom:
    return FreeHom(rank, rank, tuple(generator(i, rank) for i in range(1, rank + 1)))


def deletion(source_rank: int, target_rank: int) -> FreeHom:
    """The projection killing generators above ``target_rank``."""
    if target_rank > source_rank:
        raise ValueError("deletion cannot raise the rank")
    images = tuple(
        generator(i, target_rank) if i <= target_rank else identity(target_rank)
        for i in range(1, source_rank + 1)
    )
    return FreeHom(source_rank, target_rank, images)


def compose(outer: FreeHom, inner: FreeHom) -> FreeHom:
    """The homomorphism ``outer o inner``."""
    if inner.target_rank != outer.source_rank:
        raise ValueError("ranks do not chain")
    return FreeHom(inner.source_rank, outer.target_rank,
                   tuple(outer.apply(im) for im in inner.images))


def exponent_vector(w: Word) -> tuple[int, ...]:
    """Image of ``w`` under abelianization onto Z^rank."""
    v = [0] * w.rank
    for gen, sign in w.letters:
        v[gen - 1] += sign
    return tuple(v)


def in_first_derived(w: Word) -> bool:
    """Whether all exponent sums vanish, i.e. w lies in the commutator subgroup."""
    return all(e == 0 for e in exponent_vector(w))


# --- grid lifts ------------------------------------------------------------
#
# The cover of the rank-n wedge attached to the commutator subgroup is the
# 1-skeleton of the unit cubical lattice in R^n.  A word lifts to the edge
# path that starts at the origin and moves one unit along axis g-1 for each
# letter (g, +-1); the endpoint is the exponent vector, so the lift closes
# up exactly on commutator-subgroup words.

GridEdge = tuple[tuple[int, ...], int]  # (endpoint with smaller coordinate, 0-based axis)


@dataclass(frozen=True)
class GridPath:
    dimension: int
    vertices: tuple[tuple[int, ...], ...]
    steps: tuple[tuple[int, int], ...]  # (0-based axis, +1/-1)

    @property
    def endpoint(self) -> tuple[int, ...]:
        return self.vertices[-1]

    @property
    def is_loop(self) -> bool:
        return self.vertices[0] == self.vertices[-1]


def lift_to_grid(w: Word) -> GridPath:
    cur = tuple([0] * w.rank)
    vertices = [cur]
    steps = []
    for gen, sign in w.letters:
        axis = gen - 1
        nxt = list(cur)
        nxt[axis] += sign
        cur = tuple(nxt)
        vertices.append(cur)
        steps.append((axis, sign))
    return GridPath(w.rank, tuple(vertices), tuple(steps))


def _step_edge(u: tuple[int, ...], axis: int, sign: int) -> tuple[GridEdge, int]:
    """Canonical edge id of one step and the orientation it is crossed with."""
    if sign > 0:
        return (u, axis), 1
    tail = list(u)
    tail[axis] -= 1
    return (tuple(tail), axis), -1


def grid_homology_class(path: GridPath) -> dict[GridEdge, int]:
    """Cycle-space coordinates of a closed grid path.

    The class is taken in the subgraph the path visits, with respect to
    the breadth-first spanning tree rooted at the origin (children in
    axis order, positive direction first).  It is zero exactly when the
    loop is null-homologous in the whole grid graph, because a spanning
    tree of the subgraph extends to one of the grid, so the subgraph's
    cycle space includes coordinate-wise into the grid's.
    """
    if not path.is_loop:
        raise ValueError("path is not closed")
    edges: set[GridEdge] = set()
    cur = path.vertices[0]
    for k, (axis, sign) in enumerate(path.steps):
        edge, _ = _step_edge(path.vertices[k], axis, sign)
        edges.add(edge)
        cur = path.vertices[k + 1]

    origin = path.vertices[0]
    seen = {origin}
    tree: set[GridEdge] = set()
    queue = deque([origin])
    while queue:
        u = queue.popleft()
        for axis in range(path.dimension):
            for sign in (1, -1):
                edge, _ = _step_edge(u, axis, sign)
                if edge not in edges:
                    continue
                v = list(u)
                v[axis] += sign
                vt = tuple(v)
                if vt not in seen:
                    seen.add(vt)
                    tree.add(edge)
                    queue.append(vt)

    coeffs: dict[GridEdge, int] = defaultdict(int)
    for k, (axis, sign) in enumerate(path.steps):
        edge, orient = _step_edge(path.vertices[k], axis, sign)
        if edge not in tree:
            coeffs[edge] += orient
    return {e: c for e, c in sorted(coeffs.items()) if c != 0}


def grid_edge_crossings(w: Word, edges: Sequence[GridEdge]) -> list[int]:
    """Signed number of times the lift of ``w`` crosses each given edge."""
    wanted = {e: i for i, e in enumerate(edges)}
    counts = [0] * len(edges)
    path = lift_to_grid(w)
    for k, (axis, sign) in enumerate(path.steps):
        edge, orient = _step_edge(path.vertices[k], axis, sign)
        i = wanted.get(edge)
        if i is not None:
            counts[i] += orient
    return counts


def in_second_derived(w: Word) -> bool:
    """Membership in the second derived subgroup, via the grid lift.

    A word lies in the second derived subgroup iff it lies in the
    commutator subgroup and its lifted loop is null-homologous in the
    grid cover (whose first homology is the abelianization of the
    commutator subgroup).
    """
    if not in_first_derived(w):
        return False
    return not grid_homology_class(lift_to_grid(w))


# --- free differential calculus --------------------------------------------


def abelianized_fox_derivatives(w: Word) -> tuple[dict[tuple[int, ...], int], ...]:
    """Fox derivatives of ``w`` pushed into the group ring of Z^rank.

    Entry ``g-1`` maps Laurent monomial exponents to their integer
    coefficients in the abelianized derivative with respect to generator
    ``g``; zero coefficients are dropped.  Arithmetic is exact.
    """
    derivs: list[dict[tuple[int, ...], int]] = [defaultdict(int) for _ in range(w.rank)]
    pos = [0] * w.rank
    for gen, sign in w.letters:
        a = gen - 1
        if sign > 0:
            derivs[a][tuple(pos)] += 1
            pos[a] += 1
        else:
            pos[a] -= 1
            derivs[a][tuple(pos)] -= 1
    return tuple({m: c for m, c in sorted(d.items()) if c != 0} for d in derivs)


def fox_second_derived(w: Word) -> bool:
    """Second-derived membership through the free metabelian quotient.

    The map sending a word to its exponent vector together with its
    abelianized Fox derivatives is injective on the quotient by the
    second derived subgroup, so membership is equivalent to everything
    vanishing.  Independent of the grid computation by construction.
    """
    if not in_first_derived(w):
        return False
    return all(not d for d in abelianized_fox_derivatives(w))
