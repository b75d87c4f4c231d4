"""Clique complexes and Betti numbers over GF(2).

Boundary matrices are stored column-wise as Python integers (bit masks
over the facet rows) and reduced left to right with per-pivot bookkeeping,
the standard persistent-homology style reduction without pairing output.
Coefficients are fixed to GF(2): boundary matrices need no orientation
signs, arithmetic is exact, and the acceptance fixtures (component counts,
cross-polytope spheres) are field independent.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .connection import Graph
from .patterns import PatternGraph


class TopologyError(ValueError):
    """Raised on invalid complex requests (bad caps, incomplete complexes)."""


@dataclass(frozen=True)
class SimplicialComplex:
    """Cliques of a graph grouped by dimension, downward closed by construction.

    ``simplices_by_dim[j]`` lists the j-simplices as sorted id tuples in
    lexicographic order.  ``saturated`` records whether enumeration
    exhausted all cliques (no clique of size dim_cap + 2 exists).
    """

    simplices_by_dim: tuple  # tuple of tuples of vertex-id tuples
    dim_cap: int
    saturated: bool

    @property
    def top_dim(self) -> int:
        for j in range(len(self.simplices_by_dim) - 1, -1, -1):
            if self.simplices_by_dim[j]:
                return j
        return -1

    def simplices(self, j: int) -> tuple:
        if 0 <= j < len(self.simplices_by_dim):
            return self.simplices_by_dim[j]
        return ()


def clique_complex(graph: Graph, dim_cap: int | None = 3) -> SimplicialComplex:
    """All cliques of the graph with at most ``dim_cap + 1`` vertices.

    ``dim_cap=None`` enumerates every clique (the full clique complex).
    """
    if dim_cap is not None and dim_cap < 0:
        raise TopologyError("dim_cap must be nonnegative")
    ids = sorted(int(i) for i in graph.vertex_ids)
    nbr_sets = {int(i): set(int(b) for b in graph.neighbors[int(i)].tolist())
                for i in graph.vertex_ids}
    levels = [tuple((i,) for i in ids)]
    j = 0
    while dim_cap is None or j < dim_cap:
        prev = levels[-1]
        if not prev:
            break
        nxt = []
        for simplex in prev:
            common = nbr_sets[simplex[0]]
            for v in simplex[1:]:
                common = common & nbr_sets[v]
            top = simplex[-1]
            for w in sorted(common):
                if w > top:
                    nxt.append(simplex + (w,))
        if not nxt:
            break
        levels.append(tuple(sorted(nxt)))
        j += 1
    # saturation: the next level up is provably empty
    if dim_cap is None:
        saturated = True
        cap = len(levels) - 1
    else:
        cap = dim_cap
        saturated = len(levels) - 1 < dim_cap or not levels[-1]
        if len(levels) - 1 == dim_cap and levels[-1]:
            # check one level further for an honest saturation flag
            probe = False
            for simplex in levels[-1]:
                common = nbr_sets[simplex[0]]
                for v in simplex[1:]:
                    common = common & nbr_sets[v]
                if any(w > simplex[-1] for w in common):
                    probe = True
                    break
            saturated = not probe
    while len(levels) <= (cap if dim_cap is not None else len(levels) - 1):
        levels.append(())
    return SimplicialComplex(simplices_by_dim=tuple(levels), dim_cap=cap,
                             saturated=saturated)


def simplex_counts(complex_: SimplicialComplex) -> list[int]:
    """Counts S_0 .. S_dim_cap."""
    return [len(complex_.simplices(j)) for j in range(complex_.dim_cap + 1)]


@dataclass(frozen=True)
class BoundaryMatrix:
    """GF(2) incidence of k-simplices (columns) to their facets (rows)."""

    k: int
    rows: tuple      # (k-1)-simplices
    cols: tuple      # k-simplices
    columns: tuple   # per column, an int bit mask over rows

    def rank(self) -> int:
        return gf2_rank(list(self.columns))

    def column_weight_ok(self) -> bool:
        return all(bin(c).count("1") == self.k + 1 for c in self.columns)


def boundary_matrix(complex_: SimplicialComplex, k: int) -> BoundaryMatrix:
    """The boundary operator from k-chains to (k-1)-chains (signs vanish mod 2)."""
    if k < 1:
        raise TopologyError("boundary_matrix is defined for k >= 1")
    rows = complex_.simplices(k - 1)
    cols = complex_.simplices(k)
    row_index = {s: i for i, s in enumerate(rows)}
    columns = []
    for simplex in cols:
        bits = 0
        for drop in range(len(simplex)):
            facet = simplex[:drop] + simplex[drop + 1:]
            bits |= 1 << row_index[facet]
        columns.append(bits)
    return BoundaryMatrix(k=k, rows=rows, cols=cols, columns=tuple(columns))


def gf2_rank(columns: list[int]) -> int:
    """Rank over GF(2) by left-to-right column reduction.

    Each column is reduced against the pivot column sharing its highest
    set bit until it vanishes or claims a fresh pivot.
    """
    pivots: dict[int, int] = {}
    rank = 0
    for col in columns:
        while col:
            low = col.bit_length() - 1
            other = pivots.get(low)
            if other is None:
                pivots[low] = col
                rank += 1
                break
            col ^= other
    return rank


def boundary_composition_is_zero(complex_: SimplicialComplex, k: int) -> bool:
    """Explicitly verify boundary(k) o boundary(k+1) = 0 over GF(2)."""
    bk = boundary_matrix(complex_, k)
    bk1 = boundary_matrix(complex_, k + 1)
    # rows of boundary(k+1) and columns of boundary(k) share the same
    # k-simplex ordering, so bit j of a column multiplies bk.columns[j]
    for col in bk1.columns:
        acc = 0
        bits = col
        while bits:
            j = (bits & -bits).bit_length() - 1
            acc ^= bk.columns[j]
            bits &= bits - 1
        if acc != 0:
            return False
    return True


def betti_numbers(complex_: SimplicialComplex, k_max: int) -> list[int]:
    """Betti numbers beta_0 .. beta_k_max via GF(2) boundary ranks.

    beta_k = S_k - rank(boundary_k) - rank(boundary_{k+1}); computing
    beta_k therefore needs the complex built with dim_cap >= k_max + 1.
    """
    if k_max < 0:
        raise TopologyError("k_max must be nonnegative")
    if complex_.dim_cap < k_max + 1 and not complex_.saturated:
        raise TopologyError(
            f"complex built with dim_cap {complex_.dim_cap} cannot resolve "
            f"beta_{k_max}; need dim_cap >= {k_max + 1}"
        )
    ranks = {0: 0}
    for k in range(1, k_max + 2):
        if complex_.simplices(k):
            ranks[k] = boundary_matrix(complex_, k).rank()
        else:
            ranks[k] = 0
    counts = [len(complex_.simplices(j)) for j in range(k_max + 1)]
    return [counts[k] - ranks[k] - ranks[k + 1] for k in range(k_max + 1)]


def euler_characteristic_check(complex_: SimplicialComplex) -> bool:
    """Does the alternating simplex-count sum equal the alternating Betti sum?

    Requires a complete (saturated) complex.
    """
    if not complex_.saturated:
        raise TopologyError("Euler check needs the full clique complex")
    top = complex_.top_dim
    chi_counts = sum((-1) ** j * len(complex_.simplices(j)) for j in range(top + 1))
    betti = betti_numbers(complex_, k_max=max(top, 0))
    chi_betti = sum((-1) ** j * b for j, b in enumerate(betti))
    return chi_counts == chi_betti


def cross_polytope_graph(k: int) -> PatternGraph:
    """Complete graph on 2k+2 vertices minus the perfect matching of consecutive pairs.

    Its clique complex is the boundary of the (k+1)-dimensional
    cross-polytope, a k-sphere, with beta_k = 1.
    """
    n = 2 * k + 2
    matching = {(2 * i, 2 * i + 1) for i in range(k + 1)}
    edges = {e for e in combinations(range(n), 2) if e not in matching}
    return PatternGraph(order=n, edges=frozenset(edges), name=f"O_{k}")


def pattern_to_graph(pattern: PatternGraph) -> Graph:
    """Materialize a pattern as a Graph (unit-square positions, ids 0..n-1)."""
    from .points import Configuration, Window

    n = pattern.order
    window = Window(corner=np.zeros(2), side=float(max(n, 1)))
    rng = np.random.default_rng(12345)
    config = Configuration(
        ids=np.arange(n, dtype=np.int64),
        positions=window.corner + rng.random((n, 2)) * window.side * 0.5,
        birth_times=np.linspace(0.1, 0.9, n),
        is_origin=np.zeros(n, dtype=bool),
        window=window,
        intensity=1.0,
    )
    nbrs = {i: [] for i in range(n)}
    for a, b in pattern.edges:
        nbrs[a].append(b)
        nbrs[b].append(a)
    neighbors = {i: np.asarray(sorted(v), dtype=np.int64) for i, v in nbrs.items()}
    return Graph(config=config, neighbors=neighbors)


def betti_results_to_csv(counts: list[int], betti: list[int]) -> str:
    lines = ["dim,S_j,beta_j"]
    for j, b in enumerate(betti):
        lines.append(f"{j},{counts[j] if j < len(counts) else 0},{b}")
    return "\n".join(lines) + "\n"


def complex_to_text(complex_: SimplicialComplex) -> str:
    """One simplex per line, vertices sorted and space separated."""
    lines = []
    for j in range(complex_.dim_cap + 1):
        for simplex in complex_.simplices(j):
            lines.append(" ".join(str(v) for v in simplex))
    return "\n".join(lines) + "\n"
