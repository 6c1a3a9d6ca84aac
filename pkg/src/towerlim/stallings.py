"""Folded core graphs for finitely generated subgroups of free groups.

A subgroup of F_n generated by finitely many words is stored as a
basepointed digraph with edges labeled 1..n, folded (no vertex has two
equal-label edges pointing out, or two pointing in) and core (away from
the basepoint every vertex has degree at least two).  Reduced words that
read as basepoint loops are exactly the subgroup elements.

Graphs are canonicalized on construction by breadth-first relabeling
from the basepoint, with edges scanned in (label, out-before-in) order,
so two graphs describe the same subgroup iff their vertex/edge data are
equal.  The canonical text encoding doubles as a cache key and value for
callers that want to persist folded graphs.
"""

from __future__ import annotations

from collections import deque
from typing import Callable, Iterable, Protocol, Sequence

from . import words
from .words import FreeHom, Word

Edge = tuple[int, int, int]  # (source, label, target)


class GraphCache(Protocol):
    def load(self, key: str) -> str | None: ...
    def store(self, key: str, value: str) -> None: ...


_active_cache: GraphCache | None = None


def install_cache(cache: GraphCache | None) -> None:
    """Install (or clear, with None) the process-wide folding cache."""
    global _active_cache
    _active_cache = cache


class CoreGraph:
    """Canonical folded basepointed graph; the basepoint is vertex 0."""

    __slots__ = ("rank", "num_vertices", "edges", "_out", "_in")

    def __init__(self, rank: int, num_vertices: int, edges: tuple[Edge, ...]):
        self.rank = rank
        self.num_vertices = num_vertices
        self.edges = edges
        self._out: list[dict[int, int]] = [{} for _ in range(num_vertices)]
        self._in: list[dict[int, int]] = [{} for _ in range(num_vertices)]
        for s, l, t in edges:
            if l in self._out[s] or l in self._in[t]:
                raise ValueError("graph is not folded")
            self._out[s][l] = t
            self._in[t][l] = s

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CoreGraph):
            return NotImplemented
        return (self.rank, self.num_vertices, self.edges) == (
            other.rank, other.num_vertices, other.edges)

    def __hash__(self) -> int:
        return hash((self.rank, self.num_vertices, self.edges))

    def __repr__(self) -> str:
        return f"CoreGraph(rank={self.rank}, vertices={self.num_vertices}, edges={len(self.edges)})"

    # -- serialization ------------------------------------------------

    def encode(self) -> str:
        body = ";".join(f"{s},{l},{t}" for s, l, t in self.edges)
        return f"coregraph/1 rank={self.rank} vertices={self.num_vertices} edges={body}"

    @classmethod
    def from_encoding(cls, text: str) -> "CoreGraph":
        head, rank_part, vert_part, edge_part = text.split(" ", 3)
        if head != "coregraph/1":
            raise ValueError(f"unknown encoding header {head!r}")
        rank = int(rank_part.removeprefix("rank="))
        num = int(vert_part.removeprefix("vertices="))
        body = edge_part.removeprefix("edges=")
        edges: list[Edge] = []
        if body:
            for item in body.split(";"):
                s, l, t = item.split(",")
                edges.append((int(s), int(l), int(t)))
        return cls(rank, num, tuple(edges))

    # -- basic queries -------------------------------------------------

    def trace_from(self, start: int, w: Word) -> int | None:
        """Vertex reached by reading ``w`` from ``start``; None if stuck."""
        if w.rank != self.rank:
            raise ValueError(f"rank mismatch: word has rank {w.rank}, graph has rank {self.rank}")
        cur = start
        for gen, sign in w.letters:
            nxt = self._out[cur].get(gen) if sign > 0 else self._in[cur].get(gen)
            if nxt is None:
                return None
            cur = nxt
        return cur

    def contains(self, w: Word) -> bool:
        """Whether the reduced word reads as a basepoint loop."""
        return self.trace_from(0, w) == 0

    def subgroup_rank(self) -> int:
        return len(self.edges) - self.num_vertices + 1

    @property
    def is_complete(self) -> bool:
        return all(
            len(self._out[v]) == self.rank and len(self._in[v]) == self.rank
            for v in range(self.num_vertices))

    def index(self) -> int | None:
        """Index in the ambient free group; None means infinite."""
        return self.num_vertices if self.is_complete else None

    # -- structure ------------------------------------------------------

    def _tree_paths(self) -> tuple[list[Edge], list[tuple[words.Letter, ...]]]:
        """BFS tree edges plus the letter path from the basepoint to each vertex."""
        paths: list[tuple[words.Letter, ...] | None] = [None] * self.num_vertices
        paths[0] = ()
        tree: list[Edge] = []
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for label in range(1, self.rank + 1):
                t = self._out[u].get(label)
                if t is not None and paths[t] is None:
                    paths[t] = paths[u] + ((label, 1),)
                    tree.append((u, label, t))
                    queue.append(t)
                s = self._in[u].get(label)
                if s is not None and paths[s] is None:
                    paths[s] = paths[u] + ((label, -1),)
                    tree.append((s, label, u))
                    queue.append(s)
        assert all(p is not None for p in paths)
        return tree, paths  # type: ignore[return-value]

    def vertex_words(self) -> tuple[Word, ...]:
        """For each vertex, the spanning-tree word reading to it from the base."""
        _, paths = self._tree_paths()
        return tuple(words.reduce(p, self.rank) for p in paths)

    def subgroup_generators(self) -> tuple[Word, ...]:
        """A free basis read off the non-tree edges, in canonical order."""
        tree, paths = self._tree_paths()
        tree_set = set(tree)
        gens = []
        for s, l, t in self.edges:
            if (s, l, t) in tree_set:
                continue
            letters = paths[s] + ((l, 1),) + tuple((g, -sg) for g, sg in reversed(paths[t]))
            gens.append(words.reduce(letters, self.rank))
        return tuple(gens)

    def canonical_from(self, base: int) -> tuple[int, tuple[Edge, ...]]:
        """Canonical (num_vertices, edges) after rebasing at ``base``."""
        return _canonical_order(self.rank, self.edges, base)


class CoveringGraph(CoreGraph):
    """A complete core graph: a connected cover of the rank-n wedge."""

    @property
    def covering_index(self) -> int:
        return self.num_vertices

    def is_normal(self) -> bool:
        """Whether the basepoint loops form a normal subgroup.

        True iff the graph reads the same subgroup from every vertex,
        i.e. all rebasings are isomorphic as based labeled graphs.
        """
        reference = (self.num_vertices, self.edges)
        return all(self.canonical_from(v) == reference for v in range(1, self.num_vertices))


def _canonical_order(rank: int, edges: Iterable[Edge], base: int) -> tuple[int, tuple[Edge, ...]]:
    out: dict[tuple[int, int], int] = {}
    inc: dict[tuple[int, int], int] = {}
    vertices = {base}
    for s, l, t in edges:
        out[(s, l)] = t
        inc[(t, l)] = s
        vertices.add(s)
        vertices.add(t)
    order = {base: 0}
    queue = deque([base])
    while queue:
        u = queue.popleft()
        for label in range(1, rank + 1):
            for v in (out.get((u, label)), inc.get((u, label))):
                if v is not None and v not in order:
                    order[v] = len(order)
                    queue.append(v)
    if len(order) != len(vertices):
        raise ValueError("graph is not connected")
    relabeled = tuple(sorted((order[s], l, order[t]) for s, l, t in edges))
    return len(order), relabeled


def fold_graph(rank: int, num_vertices: int, edges: Sequence[Edge], basepoint: int = 0) -> CoreGraph:
    """Fold an arbitrary labeled graph and trim it to a core graph.

    The result is independent of the order the edges are given in, up to
    nothing at all: canonicalization makes equal subgroups compare equal.
    """
    for s, l, t in edges:
        if not (0 <= s < num_vertices and 0 <= t < num_vertices):
            raise ValueError("edge endpoint out of range")
        if not 1 <= l <= rank:
            raise ValueError(f"edge label {l} out of range for rank {rank}")

    parent = list(range(num_vertices))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    out: list[dict[int, int]] = [{} for _ in range(num_vertices)]
    inc: list[dict[int, int]] = [{} for _ in range(num_vertices)]
    pending: deque[tuple[int, int]] = deque()

    def add_edge(s: int, l: int, t: int) -> None:
        s, t = find(s), find(t)
        cur = out[s].get(l)
        if cur is not None and find(cur) != t:
            pending.append((cur, t))
        out[s][l] = t
        cur = inc[t].get(l)
        if cur is not None and find(cur) != s:
            pending.append((cur, s))
        inc[t][l] = s

    for e in edges:
        add_edge(*e)

    while pending:
        a, b = pending.popleft()
        a, b = find(a), find(b)
        if a == b:
            continue
        # keep the vertex with more incident structure as the representative
        if len(out[a]) + len(inc[a]) < len(out[b]) + len(inc[b]):
            a, b = b, a
        parent[b] = a
        for l, t in out[b].items():
            cur = out[a].get(l)
            if cur is not None and find(cur) != find(t):
                pending.append((cur, t))
            else:
                out[a][l] = t
        for l, s in inc[b].items():
            cur = inc[a].get(l)
            if cur is not None and find(cur) != find(s):
                pending.append((cur, s))
            else:
                inc[a][l] = s

    folded: set[Edge] = set()
    for v in range(num_vertices):
        if find(v) != v:
            continue
        for l, t in out[v].items():
            folded.add((v, l, find(t)))
    base = find(basepoint)

    # trim hanging trees: non-basepoint vertices of degree <= 1
    degree: dict[int, int] = {}
    incident: dict[int, set[Edge]] = {}
    for e in folded:
        s, _, t = e
        for v in (s, t):
            degree[v] = degree.get(v, 0) + 1
            incident.setdefault(v, set()).add(e)
    degree.setdefault(base, 0)
    peel = deque(v for v, d in degree.items() if v != base and d <= 1)
    removed: set[Edge] = set()
    dead: set[int] = set()
    while peel:
        v = peel.popleft()
        if v in dead or v == base or degree.get(v, 0) > 1:
            continue
        dead.add(v)
        for e in incident.get(v, set()) - removed:
            removed.add(e)
            s, _, t = e
            for u in (s, t):
                if u != v:
                    degree[u] -= 1
                    if u != base and degree[u] <= 1:
                        peel.append(u)
    folded -= removed

    num, canon = _canonical_order(rank, folded, base)
    return CoreGraph(rank, num, canon)


def core_from_generators(generators: Sequence[Word], rank: int) -> CoreGraph:
    """Stallings graph of the subgroup generated by the given words."""
    for g in generators:
        if g.rank != rank:
            raise ValueError(f"generator rank {g.rank} does not match rank {rank}")

    key = None
    if _active_cache is not None:
        key = f"rank={rank}|" + "|".join(str(g) for g in generators)
        cached = _active_cache.load(key)
        if cached is not None:
            return CoreGraph.from_encoding(cached)

    edges: list[Edge] = []
    fresh = 1
    for g in generators:
        cur = 0
        for i, (gen, sign) in enumerate(g.letters):
            nxt = 0 if i == len(g.letters) - 1 else fresh
            if i != len(g.letters) - 1:
                fresh += 1
            if sign > 0:
                edges.append((cur, gen, nxt))
            else:
                edges.append((nxt, gen, cur))
            cur = nxt
    graph = fold_graph(rank, max(fresh, 1), edges)

    if _active_cache is not None and key is not None:
        _active_cache.store(key, graph.encode())
    return graph


def equal_subgroups(a: CoreGraph, b: CoreGraph) -> bool:
    if a.rank != b.rank:
        raise ValueError("rank mismatch")
    return a == b


def image_under_hom(core: CoreGraph, hom: FreeHom) -> CoreGraph:
    """Core graph of the image subgroup under a free-group homomorphism."""
    if core.rank != hom.source_rank:
        raise ValueError("rank mismatch between graph and homomorphism")
    return core_from_generators([hom.apply(g) for g in core.subgroup_generators()],
                                hom.target_rank)


def complete_to_covering(core: CoreGraph) -> CoveringGraph | None:
    """The covering graph when the subgroup has finite index, else None.

    A folded core graph is itself the covering of the wedge exactly when
    it is complete; a missing transition anywhere certifies infinite
    index.  Infinite index is an ordinary outcome, not an error.
    """
    if not core.is_complete:
        return None
    return CoveringGraph(core.rank, core.num_vertices, core.edges)
