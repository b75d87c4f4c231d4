"""Small connected pattern graphs with exact canonical labeling.

Patterns are capped at PATTERN_CAP vertices so that canonical forms,
isomorphism orbits and edge-outcome enumerations stay exhaustive.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations

PATTERN_CAP = 6


class PatternError(ValueError):
    """Raised on malformed or oversized pattern graphs."""


@lru_cache(maxsize=None)
def pair_list(order: int) -> tuple:
    """Fixed enumeration of the unordered vertex pairs of [0, order)."""
    return tuple(combinations(range(order), 2))


@lru_cache(maxsize=None)
def _pair_index_map(order: int) -> dict:
    return {pair: k for k, pair in enumerate(pair_list(order))}


def edges_to_mask(order: int, edges) -> int:
    index = _pair_index_map(order)
    mask = 0
    for a, b in edges:
        a, b = (int(a), int(b)) if a < b else (int(b), int(a))
        if a == b or not (0 <= a < order and 0 <= b < order):
            raise PatternError(f"bad edge ({a}, {b}) for order {order}")
        mask |= 1 << index[(a, b)]
    return mask


def mask_to_edges(order: int, mask: int) -> frozenset:
    pairs = pair_list(order)
    return frozenset(pairs[k] for k in range(len(pairs)) if (mask >> k) & 1)


def permute_mask(order: int, mask: int, perm: tuple) -> int:
    """Edge mask of the graph with vertex i relabeled to perm[i]."""
    index = _pair_index_map(order)
    out = 0
    for k, (a, b) in enumerate(pair_list(order)):
        if (mask >> k) & 1:
            pa, pb = perm[a], perm[b]
            out |= 1 << index[(pa, pb) if pa < pb else (pb, pa)]
    return out


@lru_cache(maxsize=None)
def canonical_mask(order: int, mask: int) -> int:
    """Minimum edge mask over all vertex relabelings (exhaustive, order <= cap)."""
    if order > PATTERN_CAP + 1:
        raise PatternError(f"canonical labeling capped at {PATTERN_CAP + 1} vertices")
    return min(permute_mask(order, mask, perm) for perm in permutations(range(order)))


@lru_cache(maxsize=None)
def isomorphism_orbit(order: int, mask: int) -> tuple:
    """All distinct labeled edge masks isomorphic to the given one."""
    return tuple(sorted({permute_mask(order, mask, perm)
                         for perm in permutations(range(order))}))


def _mask_connected(order: int, mask: int) -> bool:
    if order == 1:
        return True
    adj = [0] * order
    for k, (a, b) in enumerate(pair_list(order)):
        if (mask >> k) & 1:
            adj[a] |= 1 << b
            adj[b] |= 1 << a
    seen = 1
    frontier = [0]
    while frontier:
        v = frontier.pop()
        nxt = adj[v] & ~seen
        while nxt:
            w = (nxt & -nxt).bit_length() - 1
            seen |= 1 << w
            frontier.append(w)
            nxt &= nxt - 1
    return seen == (1 << order) - 1


@dataclass(frozen=True)
class PatternGraph:
    """Graph on vertices 0..order-1 used as a counting pattern.

    Counting and limit operations require connected patterns; the class
    itself also admits disconnected graphs (the k = 0 cross-polytope graph
    is two isolated vertices) and exposes :attr:`is_connected`.
    """

    order: int
    edges: frozenset
    name: str = ""

    def __post_init__(self):
        if not (1 <= self.order <= PATTERN_CAP):
            raise PatternError(f"pattern order must be in [1, {PATTERN_CAP}]")
        edges = frozenset(tuple(sorted((int(a), int(b)))) for a, b in self.edges)
        for a, b in edges:
            if a == b or not (0 <= a < self.order and 0 <= b < self.order):
                raise PatternError(f"bad edge ({a}, {b}) for order {self.order}")
        object.__setattr__(self, "edges", edges)

    @property
    def is_connected(self) -> bool:
        return _mask_connected(self.order, self.edge_mask)

    def require_connected(self) -> "PatternGraph":
        if not self.is_connected:
            raise PatternError(f"pattern {self.name or self.edges} must be connected")
        return self

    @property
    def edge_mask(self) -> int:
        return edges_to_mask(self.order, self.edges)

    @property
    def canonical_form(self) -> bytes:
        mask = canonical_mask(self.order, self.edge_mask)
        return bytes([self.order]) + mask.to_bytes(4, "big")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def orbit_masks(self) -> tuple:
        """Labeled edge masks of every graph on [0, order) isomorphic to this one."""
        return isomorphism_orbit(self.order, self.edge_mask)

    def spanning_tree_of_mask(self, mask: int) -> tuple:
        """BFS spanning tree (parent, child) pairs of a labeled copy, rooted at 0."""
        adj = {v: [] for v in range(self.order)}
        for a, b in mask_to_edges(self.order, mask):
            adj[a].append(b)
            adj[b].append(a)
        seen = {0}
        tree = []
        frontier = [0]
        while frontier:
            v = frontier.pop(0)
            for w in sorted(adj[v]):
                if w not in seen:
                    seen.add(w)
                    tree.append((v, w))
                    frontier.append(w)
        if len(seen) != self.order:
            raise PatternError("labeled copy is not connected")
        return tuple(tree)

    def is_isomorphic_mask(self, order: int, mask: int) -> bool:
        if order != self.order:
            return False
        return canonical_mask(order, mask) == canonical_mask(self.order, self.edge_mask)


def single_vertex() -> PatternGraph:
    return PatternGraph(order=1, edges=frozenset(), name="Vertex")


def complete_graph(n: int) -> PatternGraph:
    return PatternGraph(order=n, edges=frozenset(combinations(range(n), 2)), name=f"K{n}")


def path_graph(n: int) -> PatternGraph:
    return PatternGraph(order=n, edges=frozenset((i, i + 1) for i in range(n - 1)),
                        name=f"P{n}")


def cycle_graph(n: int) -> PatternGraph:
    if n < 3:
        raise PatternError("cycles need at least 3 vertices")
    edges = frozenset((i, (i + 1) % n) for i in range(n))
    return PatternGraph(order=n, edges=edges, name=f"C{n}")


def from_edge_list(order: int, edges, name: str = "") -> PatternGraph:
    return PatternGraph(order=order, edges=frozenset(tuple(e) for e in edges),
                        name=name or f"custom{order}")


def builtin_pattern(name: str) -> PatternGraph:
    """Patterns addressable by name: K2, K3, ..., P3, ..., C4, ..., Vertex, O_k."""
    name = name.strip()
    if name.lower() in ("vertex", "k1"):
        return single_vertex()
    if name.startswith("K") and name[1:].isdigit():
        return complete_graph(int(name[1:]))
    if name.startswith("P") and name[1:].isdigit():
        return path_graph(int(name[1:]))
    if name.startswith("C") and name[1:].isdigit():
        return cycle_graph(int(name[1:]))
    if name.startswith("O_") and name[2:].isdigit():
        from .topology import cross_polytope_graph
        return cross_polytope_graph(int(name[2:]))
    raise PatternError(f"unknown builtin pattern {name!r}")
