"""Tessellation coarsening and crossing/long-edge event estimators.

The delta-tessellation machinery (representative graph, coarsened
component containing the biggest representative cluster) supports the
biggest-component diagnostics; the event probabilities kappa, theta, beta
and nu are estimated as empirical frequencies over independent
realizations.  Infinite-volume objects are proxied by guard windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .connection import ConnectionFunction, Graph, build_graph
from .functionals import connected_components
from .limits import LimitEstimate
from .points import Configuration, Window, sample_poisson


class PercolationError(ValueError):
    """Raised on invalid tessellation or estimator parameters."""


# ---------------------------------------------------------------------------
# tessellation


@dataclass(frozen=True)
class Tessellation:
    """Cubes of size delta indexed by integer lattice coordinate.

    Open cubes are those containing at least one point; each open cube is
    represented by its lowest-id member (any deterministic rule works).
    """

    delta: float
    cube_of: dict          # point id -> lattice coordinate tuple
    open_cubes: frozenset  # lattice coordinates with >= 1 point
    representative: dict   # lattice coordinate -> point id

    @classmethod
    def build(cls, config: Configuration, delta: float) -> "Tessellation":
        if delta <= 0:
            raise PercolationError("delta must be positive")
        coords = np.floor(config.positions / delta).astype(np.int64)
        cube_of = {int(i): tuple(c) for i, c in zip(config.ids, coords.tolist())}
        representative: dict = {}
        for i in sorted(cube_of):
            key = cube_of[i]
            if key not in representative:
                representative[key] = i
        return cls(delta=float(delta), cube_of=cube_of,
                   open_cubes=frozenset(representative), representative=representative)


def _cubes_adjacent(a: tuple, b: tuple) -> bool:
    return all(abs(x - y) <= 1 for x, y in zip(a, b))


def coarsened_graph(graph: Graph, delta: float) -> Graph:
    """G_delta: drop every edge whose endpoints lie in non-adjacent cubes.

    Cube adjacency is sup-norm lattice distance <= 1 (same cube included).
    """
    tess = Tessellation.build(graph.config, delta)
    nbrs = {}
    for a, nb in graph.neighbors.items():
        ca = tess.cube_of[int(a)]
        keep = [b for b in nb.tolist() if _cubes_adjacent(ca, tess.cube_of[b])]
        nbrs[int(a)] = np.asarray(keep, dtype=np.int64)
    return Graph(config=graph.config, neighbors=nbrs, phi=graph.phi,
                 edge_seed=graph.edge_seed, periodic=graph.periodic)


def per_graph(graph: Graph, delta: float) -> Graph:
    """Per(delta): the coarsened graph induced on one representative per open cube."""
    tess = Tessellation.build(graph.config, delta)
    g_delta = coarsened_graph(graph, delta)
    return g_delta.induced(tess.representative.values())


def c_delta(graph: Graph, window: Window, delta: float) -> frozenset:
    """Component of the coarsened graph on the window containing its biggest
    representative cluster (ties by the lexicographic position rule).

    The representative graph is built globally and then restricted, so a
    cube straddling the window keeps its global representative only when
    that point lies inside.
    """
    from .functionals import biggest_component

    g_delta = coarsened_graph(graph, delta).restrict_to_window(window)
    per = per_graph(graph, delta).restrict_to_window(window)
    seed_set, size = biggest_component(per)
    if size == 0:
        return frozenset()
    labeling = connected_components(g_delta)
    rep = labeling.component_of[min(seed_set)]
    return frozenset(labeling.components[rep])


# ---------------------------------------------------------------------------
# annulus boxes


@dataclass(frozen=True)
class AnnulusBox:
    """Box x + prod_{j in J} [-r, r] x prod_{j not in J} [0, 2r]."""

    center: np.ndarray
    active: frozenset  # subset of coordinate indices
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.radius <= 0:
            raise PercolationError("annulus box radius must be positive")

    @property
    def dim(self) -> int:
        return self.center.size

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array([
            self.center[j] - self.radius if j in self.active else self.center[j]
            for j in range(self.dim)
        ])
        hi = np.array([
            self.center[j] + self.radius if j in self.active else self.center[j] + 2 * self.radius
            for j in range(self.dim)
        ])
        return lo, hi

    def contains(self, positions: np.ndarray) -> np.ndarray:
        pos = np.atleast_2d(np.asarray(positions, dtype=float))
        lo, hi = self.bounds()
        return np.all((pos >= lo) & (pos <= hi), axis=1)

    def enclosing_window(self) -> Window:
        lo, _ = self.bounds()
        return Window(corner=lo, side=2 * self.radius)


def sup_ball_window(center: np.ndarray, t: float) -> Window:
    """Half-open window version of the closed sup-norm ball of radius t."""
    center = np.asarray(center, dtype=float)
    return Window(corner=center - t, side=2 * t)


# ---------------------------------------------------------------------------
# estimators


def _frequency_estimate(hits: int, reps: int) -> LimitEstimate:
    p = hits / reps
    stderr = math.sqrt(max(p * (1 - p), 0.0) / reps)
    return LimitEstimate(value=p, stderr=stderr, n_samples=reps, method="importance-mc")


def _rep_seeds(seed: int, reps: int) -> np.ndarray:
    return np.random.SeedSequence(seed).generate_state(2 * reps, dtype=np.uint64)


def estimate_kappa(phi: ConnectionFunction, intensity: float, alpha: float, t: float,
                   reps: int = 200, seed: int = 0) -> LimitEstimate:
    """Frequency of a long edge near the origin: some x with |x|_inf <= 2t has a
    neighbor y at sup-distance >= alpha * t."""
    if alpha <= 0 or t <= 0:
        raise PercolationError("alpha and t must be positive")
    pad = phi.truncation_radius(1e-12)
    window = sup_ball_window(np.zeros(phi.dim), 2 * t + pad)
    seeds = _rep_seeds(seed, reps)
    hits = 0
    for r in range(reps):
        config = sample_poisson(window, intensity, int(seeds[2 * r]))
        graph = build_graph(config, phi, int(seeds[2 * r + 1]))
        edges = graph.edges()
        if edges.size == 0:
            continue
        index = {int(i): k for k, i in enumerate(config.ids)}
        pa = np.array([config.positions[index[a]] for a in edges[:, 0]])
        pb = np.array([config.positions[index[b]] for b in edges[:, 1]])
        near_a = np.abs(pa).max(axis=1) <= 2 * t
        near_b = np.abs(pb).max(axis=1) <= 2 * t
        long_edge = np.abs(pa - pb).max(axis=1) >= alpha * t
        if bool(np.any((near_a | near_b) & long_edge)):
            hits += 1
    return _frequency_estimate(hits, reps)


def estimate_crossing_theta(phi: ConnectionFunction, intensity: float, active,
                            s: float, t: float, reps: int = 200, seed: int = 0,
                            delta: float = 1.0) -> LimitEstimate:
    """Frequency of a crossing path avoiding the coarsened biggest cluster.

    The path must start in the inner box B^J(s), stay in B^J(t) outside
    C_delta(B^J(t)), and exit into the annulus B^J(2t) \\ B^J(t) on its
    last step.
    """
    if not t >= 2 * s > 0:
        raise PercolationError("need t >= 2s > 0")
    active = frozenset(int(j) for j in active)
    center = np.zeros(phi.dim)
    box_s = AnnulusBox(center, active, s)
    box_t = AnnulusBox(center, active, t)
    box_2t = AnnulusBox(center, active, 2 * t)
    window = box_2t.enclosing_window()
    seeds = _rep_seeds(seed, reps)
    hits = 0
    for r in range(reps):
        config = sample_poisson(window, intensity, int(seeds[2 * r]))
        graph = build_graph(config, phi, int(seeds[2 * r + 1]))
        if _crossing_event(graph, box_s, box_t, box_2t, delta):
            hits += 1
    return _frequency_estimate(hits, reps)


def _crossing_event(graph: Graph, box_s: AnnulusBox, box_t: AnnulusBox,
                    box_2t: AnnulusBox, delta: float) -> bool:
    config = graph.config
    if config.n_points == 0:
        return False
    in_t = box_t.contains(config.positions)
    in_s = box_s.contains(config.positions)
    in_2t = box_2t.contains(config.positions)
    cluster = c_delta(graph, box_t.enclosing_window(), delta)
    interior, seeds, annulus = set(), [], set()
    for k, i in enumerate(config.ids.tolist()):
        if in_t[k] and i not in cluster:
            interior.add(i)
            if in_s[k]:
                seeds.append(i)
        elif in_2t[k] and not in_t[k]:
            annulus.add(i)
    if not seeds:
        return False
    visited = set(seeds)
    frontier = list(seeds)
    while frontier:
        v = frontier.pop()
        for w in graph.neighbors[v].tolist():
            if w in annulus:
                return True  # terminal step exits into the annulus
            if w in interior and w not in visited:
                visited.add(w)
                frontier.append(w)
    return False


def estimate_beta_nu(phi: ConnectionFunction, intensity: float, delta: float,
                     s: float, t: float, reps: int = 200, seed: int = 0,
                     guard_factor: float = 3.0,
                     nu_grid_points: int = 3) -> tuple[LimitEstimate, LimitEstimate]:
    """Escape probabilities of the coarsened biggest cluster.

    beta: C_delta of the t-box is not contained in C_delta of a guard
    window (>= guard_factor * t per half-side), the documented proxy for
    the infinite-volume cluster.  nu: worst case over a deterministic grid
    of centers y with |y|_inf <= t - s of C_delta(B_y(s)) not contained in
    C_delta(B_o(t)).
    """
    if not t >= 2 * s > 0:
        raise PercolationError("need t >= 2s > 0")
    if guard_factor < 1.5:
        raise PercolationError("guard factor must be >= 1.5")
    d = phi.dim
    guard = sup_ball_window(np.zeros(d), guard_factor * t)
    box_t = sup_ball_window(np.zeros(d), t)
    axis = np.linspace(-(t - s), t - s, nu_grid_points)
    centers = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    seeds = _rep_seeds(seed, reps)
    beta_hits = 0
    nu_hits = np.zeros(len(centers), dtype=int)
    for r in range(reps):
        config = sample_poisson(guard, intensity, int(seeds[2 * r]))
        graph = build_graph(config, phi, int(seeds[2 * r + 1]))
        c_guard = c_delta(graph, guard, delta)
        c_t = c_delta(graph, box_t, delta)
        if c_t and not c_t <= c_guard:
            beta_hits += 1
        for j, y in enumerate(centers):
            c_y = c_delta(graph, sup_ball_window(y, s), delta)
            if c_y and not c_y <= c_t:
                nu_hits[j] += 1
    beta = _frequency_estimate(beta_hits, reps)
    nu = _frequency_estimate(int(nu_hits.max(initial=0)), reps)
    return beta, nu


def biggest_equals_c_delta_frequency(phi: ConnectionFunction, intensity: float,
                                     delta: float, window: Window, reps: int,
                                     seed: int) -> LimitEstimate:
    """Frequency of the event that C_delta swallows every vertex of the window."""
    seeds = _rep_seeds(seed, reps)
    hits = 0
    for r in range(reps):
        config = sample_poisson(window, intensity, int(seeds[2 * r]))
        graph = build_graph(config, phi, int(seeds[2 * r + 1]))
        cluster = c_delta(graph, window, delta)
        if len(cluster) == graph.n_vertices:
            hits += 1
    return _frequency_estimate(hits, reps)


def percolation_results_to_csv(rows: list[tuple]) -> str:
    """Rows of (quantity, delta, s, t, alpha, lambda, estimate)."""
    lines = ["quantity,delta,s,t,alpha,lambda,estimate,stderr,reps"]
    for quantity, delta, s, t, alpha, lam, est in rows:
        lines.append(
            f"{quantity},{delta!r},{s!r},{t!r},{alpha!r},{lam!r},"
            f"{est.value!r},{est.stderr!r},{est.n_samples}"
        )
    return "\n".join(lines) + "\n"
