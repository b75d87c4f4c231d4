"""Graph functionals: components, isomorphic counts, add-one costs, traces.

The string-keyed functional registry lets the replication harness and the
CLI bind any functional uniformly; all functionals are pure functions of
an immutable graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .connection import Graph, build_with_origin
from .patterns import PATTERN_CAP, PatternGraph, builtin_pattern, canonical_mask, pair_list
from .points import ORIGIN_ID, Configuration, Window, centered_cube, sample_poisson


class FunctionalError(ValueError):
    """Raised on unknown functional names or invalid counting requests."""


# ---------------------------------------------------------------------------
# connected components


class _UnionFind:
    __slots__ = ("parent", "size", "n_components")

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.n_components = n

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:  # path compression
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.n_components -= 1


@dataclass(frozen=True)
class ComponentLabeling:
    """Partition of the vertex set; representative is the smallest vertex id."""

    component_of: dict          # id -> representative id
    components: dict            # representative id -> tuple of member ids
    sizes: dict                 # representative id -> size

    @property
    def n_components(self) -> int:
        return len(self.components)


def connected_components(graph: Graph) -> ComponentLabeling:
    """Union-find component labeling of the graph."""
    ids = [int(i) for i in graph.vertex_ids]
    index = {i: k for k, i in enumerate(ids)}
    uf = _UnionFind(len(ids))
    for a, nbrs in graph.neighbors.items():
        ka = index[int(a)]
        for b in nbrs.tolist():
            if int(a) < b:
                uf.union(ka, index[b])
    groups: dict = {}
    for i in ids:
        groups.setdefault(uf.find(index[i]), []).append(i)
    components = {min(members): tuple(sorted(members)) for members in groups.values()}
    component_of = {i: rep for rep, members in components.items() for i in members}
    sizes = {rep: len(members) for rep, members in components.items()}
    return ComponentLabeling(component_of=component_of, components=components, sizes=sizes)


def component_count(graph: Graph) -> int:
    return connected_components(graph).n_components


def biggest_component(graph: Graph) -> tuple[frozenset, int]:
    """Largest component; ties broken by the lexicographically smallest position.

    Returns the empty set with size 0 on an empty graph.
    """
    if graph.n_vertices == 0:
        return frozenset(), 0
    labeling = connected_components(graph)
    best_size = max(labeling.sizes.values())
    candidates = [rep for rep, s in labeling.sizes.items() if s == best_size]
    if len(candidates) == 1:
        members = labeling.components[candidates[0]]
        return frozenset(members), best_size
    index = {int(i): k for k, i in enumerate(graph.vertex_ids)}

    def min_position(rep: int) -> tuple:
        rows = [tuple(graph.config.positions[index[i]]) for i in labeling.components[rep]]
        return min(rows)

    winner = min(candidates, key=min_position)
    return frozenset(labeling.components[winner]), best_size


# ---------------------------------------------------------------------------
# isomorphic counting


def _index_adjacency(graph: Graph) -> list:
    """Adjacency by vertex index (sorted index lists)."""
    index = {int(i): k for k, i in enumerate(graph.vertex_ids)}
    adj = [[] for _ in range(graph.n_vertices)]
    for a, nbrs in graph.neighbors.items():
        adj[index[int(a)]] = sorted(index[b] for b in nbrs.tolist())
    return adj


def _connected_subsets(adj: list, size: int):
    """Yield every connected vertex-index subset of the given size once (ESU).

    ``neighborhood`` tracks all neighbors of the current subgraph so the
    exclusive-neighborhood rule counts each subset exactly once.
    """
    n = len(adj)
    if size == 1:
        for v in range(n):
            yield (v,)
        return

    def extend(subgraph: list, extension: set, neighborhood: set, root: int):
        if len(subgraph) == size:
            yield tuple(subgraph)
            return
        ext = sorted(extension)
        for k, w in enumerate(ext):
            exclusive = {u for u in adj[w]
                         if u > root and u not in subgraph and u not in neighborhood}
            yield from extend(subgraph + [w], set(ext[k + 1:]) | exclusive,
                              neighborhood | set(adj[w]), root)

    for v in range(n):
        yield from extend([v], {u for u in adj[v] if u > v}, set(adj[v]), v)


def _induced_mask(adj_sets: list, subset: tuple) -> int:
    mask = 0
    for k, (a, b) in enumerate(pair_list(len(subset))):
        if subset[b] in adj_sets[subset[a]]:
            mask |= 1 << k
    return mask


def count_induced_subgraphs(graph: Graph, pattern: PatternGraph) -> int:
    """Exact number of vertex subsets inducing a copy of the (connected) pattern."""
    pattern.require_connected()
    if pattern.order > PATTERN_CAP:
        raise FunctionalError(f"pattern order exceeds cap {PATTERN_CAP}")
    if pattern.order == 1:
        return graph.n_vertices
    adj = _index_adjacency(graph)
    adj_sets = [set(a) for a in adj]
    target = canonical_mask(pattern.order, pattern.edge_mask)
    count = 0
    for subset in _connected_subsets(adj, pattern.order):
        mask = _induced_mask(adj_sets, subset)
        if canonical_mask(pattern.order, mask) == target:
            count += 1
    return count


def count_components_isomorphic(graph: Graph, pattern: PatternGraph) -> int:
    """Number of whole components isomorphic to the pattern."""
    pattern.require_connected()
    labeling = connected_components(graph)
    index = {int(i): k for k, i in enumerate(graph.vertex_ids)}
    adj_sets = [set(a) for a in _index_adjacency(graph)]
    target = canonical_mask(pattern.order, pattern.edge_mask)
    count = 0
    for rep, members in labeling.components.items():
        if len(members) != pattern.order:
            continue
        subset = tuple(index[i] for i in members)
        if canonical_mask(pattern.order, _induced_mask(adj_sets, subset)) == target:
            count += 1
    return count


# ---------------------------------------------------------------------------
# functional registry


@dataclass(frozen=True)
class Functional:
    """Named graph functional usable by the replication harness and the CLI."""

    name: str
    fn: Callable[[Graph], float]
    kind: str = "generic"

    def value(self, graph: Graph) -> float:
        return float(self.fn(graph))


def _betti_value(graph: Graph, k: int) -> int:
    from .topology import betti_numbers, clique_complex
    complex_ = clique_complex(graph, dim_cap=k + 1)
    return betti_numbers(complex_, k_max=k)[k]


def make_functional(name: str, pattern: PatternGraph | None = None,
                    k: int | None = None) -> Functional:
    """Build a functional from its registry name.

    Names: vertex_count, edge_count, component_count, biggest_component_size,
    subgraph_count (with pattern), component_iso_count (with pattern),
    betti (with k).
    """
    if name == "vertex_count":
        return Functional("vertex_count", lambda g: g.n_vertices)
    if name == "edge_count":
        return Functional("edge_count", lambda g: g.edge_count())
    if name == "component_count":
        return Functional("component_count", lambda g: component_count(g))
    if name == "biggest_component_size":
        return Functional("biggest_component_size", lambda g: biggest_component(g)[1],
                          kind="biggest_component")
    if name == "subgraph_count":
        if pattern is None:
            raise FunctionalError("subgraph_count needs a pattern")
        label = f"subgraph_count({pattern.name or 'custom'})"
        return Functional(label, lambda g: count_induced_subgraphs(g, pattern))
    if name == "component_iso_count":
        if pattern is None:
            raise FunctionalError("component_iso_count needs a pattern")
        label = f"component_iso_count({pattern.name or 'custom'})"
        return Functional(label, lambda g: count_components_isomorphic(g, pattern))
    if name == "betti":
        if k is None or k < 0:
            raise FunctionalError("betti needs a nonnegative k")
        return Functional(f"betti({k})", lambda g: _betti_value(g, k))
    raise FunctionalError(f"unknown functional {name!r}")


def parse_functional(spec: str) -> Functional:
    """Parse strings such as ``edge_count``, ``subgraph_count(K3)``, ``betti(1)``."""
    spec = spec.strip()
    if "(" not in spec:
        return make_functional(spec)
    if not spec.endswith(")"):
        raise FunctionalError(f"malformed functional spec {spec!r}")
    name, arg = spec[:-1].split("(", 1)
    name = name.strip()
    arg = arg.strip()
    if name == "betti":
        return make_functional("betti", k=int(arg))
    return make_functional(name, pattern=builtin_pattern(arg))


# ---------------------------------------------------------------------------
# add-one costs


@dataclass(frozen=True)
class AddOneCostRecord:
    """Value of D_0 f(W) for one coupled realization and window."""

    functional: str
    volume: float
    value: float
    case_tag: int | None = None  # biggest-component case, 1..3


def _classify_biggest(base: Graph, with_origin: Graph) -> tuple[float, int]:
    """Add-one cost of the biggest-component size with its case tag.

    Case 1: the origin attaches to the current biggest component.
    Case 2: it does not, but the origin's component becomes the biggest.
    Case 3: neither; the cost is zero.
    """
    big_set, big_size = biggest_component(base)
    labeling0 = connected_components(with_origin)
    rep0 = labeling0.component_of[ORIGIN_ID]
    comp0 = set(labeling0.components[rep0])
    new_set, new_size = biggest_component(with_origin)
    value = float(new_size - big_size)
    if big_set and comp0 & set(big_set):
        case = 1
    elif new_set == frozenset(comp0):
        case = 2
    else:
        case = 3
    return value, case


def add_one_cost(functional: Functional, config: Configuration, phi, edge_seed: int,
                 periodic: bool = False) -> AddOneCostRecord:
    """D_0 f(W) evaluated on the coupled pair from :func:`build_with_origin`."""
    base, with_origin = build_with_origin(config, phi, edge_seed, periodic=periodic)
    if functional.kind == "biggest_component":
        value, case = _classify_biggest(base, with_origin)
        return AddOneCostRecord(functional.name, config.window.volume(), value, case)
    value = functional.value(with_origin) - functional.value(base)
    return AddOneCostRecord(functional.name, config.window.volume(), value, None)


def stabilization_trace(functional: Functional, max_window: Window, volumes,
                        phi, intensity: float, points_seed: int,
                        edge_seed: int) -> list[AddOneCostRecord]:
    """D_0 f(W) along nested centered windows of one coupled realization.

    One point and edge realization is drawn on ``max_window``; every smaller
    window is an induced restriction of the same coupled pair, so the trace
    settling is exactly the weak-stabilization statement made empirical.
    """
    vols = [float(v) for v in volumes]
    if any(b <= a for a, b in zip(vols, vols[1:])):
        raise FunctionalError("trace volumes must be strictly increasing")
    windows = [centered_cube(max_window.dim, v) for v in vols]
    for w in windows:
        if not max_window.contains_window(w):
            raise FunctionalError("all trace windows must fit inside max_window")
    config = sample_poisson(max_window, intensity, points_seed)
    base, with_origin = build_with_origin(config, phi, edge_seed)
    records = []
    for window, vol in zip(windows, vols):
        base_w = base.restrict_to_window(window)
        keep0 = with_origin.config.ids[window.contains(with_origin.config.positions)]
        origin_w = with_origin.induced(keep0)
        if functional.kind == "biggest_component":
            value, case = _classify_biggest(base_w, origin_w)
            records.append(AddOneCostRecord(functional.name, vol, value, case))
        else:
            value = functional.value(origin_w) - functional.value(base_w)
            records.append(AddOneCostRecord(functional.name, vol, value, None))
    return records


def trace_records_to_csv(records: list[AddOneCostRecord]) -> str:
    lines = ["functional,volume,value,case_tag"]
    for r in records:
        tag = "" if r.case_tag is None else str(r.case_tag)
        lines.append(f"{r.functional},{r.volume!r},{r.value!r},{tag}")
    return "\n".join(lines) + "\n"
