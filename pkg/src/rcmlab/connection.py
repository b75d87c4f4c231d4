"""Connection functions and random connection model graphs.

Edges are decided by a counter-based keyed generator: the mark of a
potential edge is a pure function of (edge seed, id pair), so the edge set
of a graph built on a restricted configuration is exactly the induced
subgraph of the graph built on the full configuration.  A paper-style
edge-marking construction keyed on birth ranks within unit lattice cubes
is kept as a secondary mode for distributional cross-validation.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.spatial import cKDTree

from .points import ORIGIN_ID, Configuration, Window, add_origin

_U64 = np.uint64
_GAMMA = _U64(0x9E3779B97F4A7C15)
_M1 = _U64(0xBF58476D1CE4E5B9)
_M2 = _U64(0x94D049BB133111EB)
_INV_2_53 = float(2.0 ** -53)
_MARK_SALT = _U64(0x7D5F_3C2B_1A09_8877)


class ConnectionError_(ValueError):
    """Raised on invalid connection-function parameters or graph inputs."""


# ---------------------------------------------------------------------------
# keyed uniforms


def _mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer; uint64 in, uint64 out, wraps mod 2^64."""
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _U64(30))) * _M1
        z = (z ^ (z >> _U64(27))) * _M2
        return z ^ (z >> _U64(31))


def _absorb(h: np.ndarray, word: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return _mix64((h + _GAMMA) ^ word)


def _to_u64(x) -> np.ndarray:
    if isinstance(x, (int, np.integer)):
        return _U64(int(x) & 0xFFFFFFFFFFFFFFFF)
    return np.asarray(x).astype(np.int64).view(np.uint64)


def pair_uniform_array(edge_seed: int, ids_a: np.ndarray, ids_b: np.ndarray) -> np.ndarray:
    """Vectorized keyed uniforms in [0, 1), symmetric in the id pair."""
    a = _to_u64(ids_a)
    b = _to_u64(ids_b)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    h = _mix64(np.broadcast_to(_to_u64(edge_seed), lo.shape).copy())
    h = _absorb(h, lo)
    h = _absorb(h, hi)
    return (h >> _U64(11)).astype(np.float64) * _INV_2_53


def pair_uniform(edge_seed: int, id_a: int, id_b: int) -> float:
    """Deterministic uniform mark of the unordered vertex pair {id_a, id_b}."""
    if id_a == id_b:
        raise ConnectionError_("pair_uniform requires two distinct ids")
    return float(pair_uniform_array(edge_seed, np.asarray([id_a]), np.asarray([id_b]))[0])


def _keyed_uniform(words: list[int], seed: int) -> float:
    """Uniform in [0,1) from an arbitrary integer key sequence."""
    h = _mix64(_to_u64(seed) ^ _MARK_SALT)
    for w in words:
        h = _absorb(h, _to_u64(w))
    return float((h >> _U64(11)).astype(np.float64) * _INV_2_53)


# ---------------------------------------------------------------------------
# connection functions


def _sphere_surface(d: int) -> float:
    # surface area of the unit sphere in R^d
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def _ball_volume(d: int, r: float) -> float:
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0) * r ** d


@dataclass(frozen=True)
class ConnectionFunction:
    """Radial symmetric connection function phi: R^d -> [0, 1].

    Subclasses implement ``radial`` (vectorized in r >= 0); symmetry
    phi(x) = phi(-x) is automatic for radial functions but asserted in
    :func:`evaluate` anyway.
    """

    dim: int

    def radial(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ConnectionError_(f"expected a vector of dimension {self.dim}")
        v = float(self.radial(np.linalg.norm(x)))
        if not (0.0 <= v <= 1.0):
            raise ConnectionError_(f"phi value {v} outside [0, 1]")
        return v

    def m_phi(self) -> float:
        """Total mass integral of phi over R^d."""
        raise NotImplementedError

    def support_radius(self) -> float:
        """Radius beyond which phi is provably zero (inf when never zero)."""
        return math.inf

    def truncation_radius(self, tol: float = 1e-12) -> float:
        """Radius beyond which phi < tol; used to pad simulation windows."""
        raise NotImplementedError

    def sample_displacement(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw n displacement vectors with density phi / m_phi."""
        radii = self._sample_radius(rng, n)
        dirs = rng.normal(size=(n, self.dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        return radii[:, None] * dirs

    def _sample_radius(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def spec_string(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Indicator(ConnectionFunction):
    """phi(x) = 1 for |x| <= radius, else 0 (random geometric graph)."""

    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ConnectionError_("indicator radius must be positive")

    def radial(self, r):
        return (np.asarray(r, dtype=float) <= self.radius).astype(float)

    def m_phi(self) -> float:
        return _ball_volume(self.dim, self.radius)

    def support_radius(self) -> float:
        return self.radius

    def truncation_radius(self, tol: float = 1e-12) -> float:
        return self.radius

    def _sample_radius(self, rng, n):
        return self.radius * rng.random(n) ** (1.0 / self.dim)

    def spec_string(self) -> str:
        return f"indicator(r={self.radius:g},d={self.dim})"


@dataclass(frozen=True)
class Gaussian(ConnectionFunction):
    """phi(x) = exp(-scale * |x|^2)."""

    scale: float = 1.0

    def __post_init__(self):
        if self.scale <= 0:
            raise ConnectionError_("gaussian scale must be positive")

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        return np.exp(-self.scale * r * r)

    def m_phi(self) -> float:
        return (math.pi / self.scale) ** (self.dim / 2.0)

    def truncation_radius(self, tol: float = 1e-12) -> float:
        return math.sqrt(max(math.log(1.0 / tol), 1.0) / self.scale)

    def _sample_radius(self, rng, n):
        # phi/m is an isotropic normal with per-coordinate variance 1/(2 scale)
        x = rng.normal(scale=math.sqrt(0.5 / self.scale), size=(n, self.dim))
        return np.linalg.norm(x, axis=1)

    def sample_displacement(self, rng, n):
        return rng.normal(scale=math.sqrt(0.5 / self.scale), size=(n, self.dim))

    def spec_string(self) -> str:
        return f"gaussian(a={self.scale:g},d={self.dim})"


def _radial_mass(phi: ConnectionFunction, a: float, b: float) -> float:
    """Integral of phi(r) r^(d-1) surface-measure over radii [a, b]."""
    s = _sphere_surface(phi.dim)
    val, _ = integrate.quad(
        lambda r: float(phi.radial(r)) * r ** (phi.dim - 1), a, b,
        epsrel=1e-10, epsabs=1e-13, limit=400,
    )
    return s * val


@dataclass(frozen=True)
class PolyTail(ConnectionFunction):
    """phi = 1 below ``cutoff`` and min(1, c0 r^-(5d+eps0)) beyond.

    Satisfies the heavy-tail moment condition phi(r) <= C0 r^-(5d+eps0)
    used by the biggest-component analysis.
    """

    c0: float = 1.0
    epsilon0: float = 1.0
    cutoff: float = 1.0

    def __post_init__(self):
        if self.c0 <= 0 or self.epsilon0 <= 0 or self.cutoff <= 0:
            raise ConnectionError_("poly-tail parameters must be positive")

    @property
    def exponent(self) -> float:
        return 5.0 * self.dim + self.epsilon0

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        out = np.ones_like(r)
        tail = r >= self.cutoff
        rt = np.where(tail, r, 1.0)
        out = np.where(tail, np.minimum(1.0, self.c0 * rt ** (-self.exponent)), out)
        return out

    def m_phi(self) -> float:
        p = self.exponent
        d = self.dim
        s = _sphere_surface(d)
        r_star = max(self.cutoff, self.c0 ** (1.0 / p))
        head = s * r_star ** d / d  # phi == 1 on [0, r_star)
        # analytic tail: integral of c0 r^(d-1-p) from r_star to infinity
        tail = s * self.c0 * r_star ** (d - p) / (p - d)
        # cross-check the head+crossover region by quadrature
        quad = _radial_mass(self, 0.0, r_star)
        if not math.isclose(head, quad, rel_tol=1e-8, abs_tol=1e-12):
            raise ConnectionError_("poly-tail mass quadrature disagrees with analytic head")
        return head + tail

    def truncation_radius(self, tol: float = 1e-12) -> float:
        return max(self.cutoff, (self.c0 / tol) ** (1.0 / self.exponent))

    def _sample_radius(self, rng, n):
        p = self.exponent
        d = self.dim
        s = _sphere_surface(d)
        r_star = max(self.cutoff, self.c0 ** (1.0 / p))
        mass_head = s * r_star ** d / d
        mass_tail = s * self.c0 * r_star ** (d - p) / (p - d)
        u = rng.random(n)
        take_head = u < mass_head / (mass_head + mass_tail)
        r = np.empty(n)
        # head: density proportional to r^(d-1)
        r[take_head] = r_star * rng.random(int(take_head.sum())) ** (1.0 / d)
        # tail: density proportional to r^(d-1-p); inverse-CDF power law
        m = int((~take_head).sum())
        v = rng.random(m)
        r[~take_head] = r_star * (1.0 - v) ** (1.0 / (d - p))
        return r

    def spec_string(self) -> str:
        return f"polytail(c0={self.c0:g},eps0={self.epsilon0:g},cutoff={self.cutoff:g},d={self.dim})"


@dataclass(frozen=True)
class Tabulated(ConnectionFunction):
    """Piecewise-linear radial profile; zero beyond the last grid point."""

    radii: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        values = tuple(float(v) for v in self.values)
        if len(radii) < 2 or len(radii) != len(values):
            raise ConnectionError_("tabulated phi needs matching grids of length >= 2")
        if any(b <= a for a, b in zip(radii, radii[1:])) or radii[0] < 0:
            raise ConnectionError_("tabulated radii must be increasing and nonnegative")
        if any(not 0.0 <= v <= 1.0 for v in values):
            raise ConnectionError_("tabulated values must lie in [0, 1]")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "values", values)

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        return np.interp(r, self.radii, self.values, left=self.values[0], right=0.0)

    def m_phi(self) -> float:
        # integrand phi(r) r^(d-1) is polynomial on each segment; integrate exactly
        d = self.dim
        total = 0.0
        rs = (0.0,) + self.radii if self.radii[0] > 0 else self.radii
        vs = (self.values[0],) + self.values if self.radii[0] > 0 else self.values
        for (r0, r1), (v0, v1) in zip(zip(rs, rs[1:]), zip(vs, vs[1:])):
            slope = (v1 - v0) / (r1 - r0)
            const = v0 - slope * r0
            total += const * (r1 ** d - r0 ** d) / d
            total += slope * (r1 ** (d + 1) - r0 ** (d + 1)) / (d + 1)
        m = _sphere_surface(d) * total
        if m <= 0:
            raise ConnectionError_("tabulated phi has zero mass")
        return m

    def support_radius(self) -> float:
        return self.radii[-1]

    def truncation_radius(self, tol: float = 1e-12) -> float:
        return self.radii[-1]

    def _sample_radius(self, rng, n):
        # inverse CDF on a fine radial grid (mass is exact per segment)
        grid = np.linspace(0.0, self.radii[-1], 2049)
        dens = np.asarray(self.radial(grid)) * grid ** (self.dim - 1)
        cdf = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2.0 * np.diff(grid))])
        cdf /= cdf[-1]
        return np.interp(rng.random(n), cdf, grid)

    def spec_string(self) -> str:
        return f"tabulated(n={len(self.radii)},rmax={self.radii[-1]:g},d={self.dim})"


def evaluate(phi: ConnectionFunction, x: np.ndarray) -> float:
    """Value of phi at displacement x."""
    return phi.evaluate(x)


def m_phi(phi: ConnectionFunction) -> float:
    """Total mass of phi; analytic where available, else exact/adaptive quadrature."""
    return phi.m_phi()


# ---------------------------------------------------------------------------
# graphs


@dataclass(frozen=True)
class Graph:
    """Undirected RCM graph over a configuration.

    ``neighbors`` maps point id to a sorted int64 array of neighbor ids.
    The edge set is a pure function of (config, phi, edge_seed, periodic);
    building on a restricted configuration yields the induced subgraph.
    """

    config: Configuration
    neighbors: dict
    phi: ConnectionFunction | None = None
    edge_seed: int | None = None
    periodic: bool = False

    @property
    def vertex_ids(self) -> np.ndarray:
        return self.config.ids

    @property
    def n_vertices(self) -> int:
        return self.config.n_points

    def degree(self, point_id: int) -> int:
        return int(self.neighbors[int(point_id)].size)

    def edge_count(self) -> int:
        return sum(v.size for v in self.neighbors.values()) // 2

    def edges(self) -> np.ndarray:
        """Edge list as an (m, 2) array with id_a < id_b, lexicographically sorted."""
        rows = [
            (a, b)
            for a, nb in self.neighbors.items()
            for b in nb.tolist()
            if a < b
        ]
        rows.sort()
        return np.asarray(rows, dtype=np.int64).reshape(len(rows), 2)

    def has_edge(self, a: int, b: int) -> bool:
        nb = self.neighbors.get(int(a))
        return nb is not None and bool(np.isin(int(b), nb))

    def induced(self, keep_ids) -> "Graph":
        """Induced subgraph on the given id set (vertices must exist)."""
        keep = frozenset(int(i) for i in keep_ids)
        mask = np.fromiter((int(i) in keep for i in self.config.ids),
                           count=self.config.n_points, dtype=bool)
        cfg = Configuration(
            ids=self.config.ids[mask],
            positions=self.config.positions[mask],
            birth_times=self.config.birth_times[mask],
            is_origin=self.config.is_origin[mask],
            window=self.config.window,
            intensity=self.config.intensity,
            seed=self.config.seed,
        )
        nbrs = {
            int(i): np.asarray([j for j in self.neighbors[int(i)].tolist() if j in keep],
                               dtype=np.int64)
            for i in cfg.ids
        }
        return Graph(config=cfg, neighbors=nbrs, phi=self.phi,
                     edge_seed=self.edge_seed, periodic=self.periodic)

    def restrict_to_window(self, sub: Window) -> "Graph":
        keep = self.config.ids[sub.contains(self.config.positions)] if self.n_vertices else []
        g = self.induced(keep)
        cfg = Configuration(
            ids=g.config.ids, positions=g.config.positions,
            birth_times=g.config.birth_times, is_origin=g.config.is_origin,
            window=sub, intensity=g.config.intensity, seed=g.config.seed,
        )
        return Graph(config=cfg, neighbors=g.neighbors, phi=g.phi,
                     edge_seed=g.edge_seed, periodic=g.periodic)


def _neighbor_dict(ids: np.ndarray, pairs_a: np.ndarray, pairs_b: np.ndarray) -> dict:
    nbrs = {int(i): [] for i in ids}
    for a, b in zip(pairs_a.tolist(), pairs_b.tolist()):
        nbrs[a].append(b)
        nbrs[b].append(a)
    return {i: np.asarray(sorted(v), dtype=np.int64) for i, v in nbrs.items()}


def _candidate_pairs(config: Configuration, phi: ConnectionFunction,
                     periodic: bool) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Index pairs (i, j) with i < j that can possibly carry an edge, plus distances.

    Pairs are pruned only where phi is provably zero (finite support);
    otherwise every pair is tested.
    """
    pos = config.positions
    n = config.n_points
    side = config.window.side
    support = phi.support_radius()
    if math.isfinite(support):
        if periodic:
            shifted = np.remainder(pos - config.window.corner, side)
            tree = cKDTree(shifted, boxsize=side)
        else:
            tree = cKDTree(pos)
        pairs = tree.query_pairs(r=support * (1 + 1e-12), output_type="ndarray")
        if pairs.size == 0:
            return (np.empty(0, dtype=np.int64),) * 2 + (np.empty(0),)
        ii, jj = pairs[:, 0], pairs[:, 1]
        delta = pos[jj] - pos[ii]
        if periodic:
            delta -= side * np.round(delta / side)
        return ii.astype(np.int64), jj.astype(np.int64), np.linalg.norm(delta, axis=1)
    # unbounded support: all pairs, in row blocks to bound memory
    if n < 2:
        return (np.empty(0, dtype=np.int64),) * 2 + (np.empty(0),)
    out_i, out_j, out_d = [], [], []
    block = max(1, int(4_000_000 // max(n, 1)))
    for start in range(0, n, block):
        stop = min(start + block, n)
        delta = pos[None, start:stop, :] - pos[:, None, :]  # (n, b, d)
        if periodic:
            delta -= side * np.round(delta / side)
        dist = np.linalg.norm(delta, axis=2)
        ii, jj = np.nonzero(np.triu(np.ones((n, stop - start), dtype=bool), k=1 - start))
        out_i.append(ii.astype(np.int64))
        out_j.append((jj + start).astype(np.int64))
        out_d.append(dist[ii, jj])
    return np.concatenate(out_i), np.concatenate(out_j), np.concatenate(out_d)


def build_graph(config: Configuration, phi: ConnectionFunction, edge_seed: int,
                periodic: bool = False) -> Graph:
    """Build the RCM graph: edge {x, y} present iff its keyed mark is < phi(x - y).

    With ``periodic`` the displacement is taken modulo the window (torus
    metric), under which the Mecke edge identities are exact.
    """
    if phi.dim != config.dim:
        raise ConnectionError_("phi dimension does not match the configuration")
    ii, jj, dist = _candidate_pairs(config, phi, periodic)
    if ii.size:
        ids_a = config.ids[ii]
        ids_b = config.ids[jj]
        u = pair_uniform_array(edge_seed, ids_a, ids_b)
        keep = u < phi.radial(dist)
        ids_a, ids_b = ids_a[keep], ids_b[keep]
    else:
        ids_a = ids_b = np.empty(0, dtype=np.int64)
    return Graph(config=config, neighbors=_neighbor_dict(config.ids, ids_a, ids_b),
                 phi=phi, edge_seed=int(edge_seed), periodic=periodic)


def build_with_origin(config: Configuration, phi: ConnectionFunction, edge_seed: int,
                      periodic: bool = False) -> tuple[Graph, Graph]:
    """Coupled pair (G(P)|_W, G(P + origin)|_W) sharing every non-origin edge."""
    if config.has_origin():
        raise ConnectionError_("configuration already contains an origin")
    base = build_graph(config, phi, edge_seed, periodic=periodic)
    config0 = add_origin(config)
    if config.n_points:
        delta = config.positions - 0.0
        if periodic:
            side = config.window.side
            delta = delta - side * np.round(delta / side)
        p = phi.radial(np.linalg.norm(delta, axis=1))
        u = pair_uniform_array(edge_seed, np.full(config.n_points, ORIGIN_ID, dtype=np.int64),
                               config.ids)
        linked = config.ids[u < p]
    else:
        linked = np.empty(0, dtype=np.int64)
    nbrs = {i: v.copy() for i, v in base.neighbors.items()}
    for i in linked.tolist():
        nbrs[i] = np.asarray(sorted(nbrs[i].tolist() + [ORIGIN_ID]), dtype=np.int64)
    nbrs[ORIGIN_ID] = np.sort(linked)
    with_origin = Graph(config=config0, neighbors=nbrs, phi=phi,
                        edge_seed=int(edge_seed), periodic=periodic)
    return base, with_origin


# ---------------------------------------------------------------------------
# paper-style edge marking


@dataclass(frozen=True)
class MarkedEdgeSet:
    """All unordered vertex pairs with their uniform edge marks."""

    entries: tuple  # of ((id_a, id_b), mark) with id_a < id_b


def edge_marking_T(config: Configuration, mark_seed: int) -> MarkedEdgeSet:
    """Edge marks via birth ranks in unit lattice cubes.

    Points are ordered by birth time within their unit cube of the integer
    lattice.  For a pair whose older point is the m-th oldest in its cube,
    the mark is the (m, cube) entry of the younger point's mark sequence,
    realized lazily by a keyed generator.  Thresholding the marks by phi
    reproduces the RCM law.
    """
    bt = config.birth_times
    if config.n_points > 1 and len(np.unique(bt)) != config.n_points:
        raise ConnectionError_("edge marking requires distinct birth times")
    cube = np.floor(config.positions).astype(np.int64)
    cube_key = [tuple(row) for row in cube.tolist()]
    # birth rank within each cube, 1-indexed ("m-th oldest")
    rank = np.zeros(config.n_points, dtype=np.int64)
    by_cube: dict = {}
    for idx, key in enumerate(cube_key):
        by_cube.setdefault(key, []).append(idx)
    for key, members in by_cube.items():
        order = sorted(members, key=lambda i: bt[i])
        for m, idx in enumerate(order, start=1):
            rank[idx] = m
    entries = []
    for i in range(config.n_points):
        for j in range(i + 1, config.n_points):
            older, younger = (i, j) if bt[i] < bt[j] else (j, i)
            key = [int(config.ids[younger]), int(rank[older]), *cube_key[older]]
            mark = _keyed_uniform(key, mark_seed)
            a, b = sorted((int(config.ids[i]), int(config.ids[j])))
            entries.append(((a, b), mark))
    entries.sort()
    return MarkedEdgeSet(entries=tuple(entries))


def threshold_marked_edges(marked: MarkedEdgeSet, config: Configuration,
                           phi: ConnectionFunction) -> Graph:
    """Graph with edge {x, y} iff the pair's mark is < phi(x - y)."""
    index = {int(i): k for k, i in enumerate(config.ids)}
    ids_a, ids_b = [], []
    for (a, b), mark in marked.entries:
        dx = config.positions[index[a]] - config.positions[index[b]]
        if mark < float(phi.radial(np.linalg.norm(dx))):
            ids_a.append(a)
            ids_b.append(b)
    return Graph(config=config,
                 neighbors=_neighbor_dict(config.ids,
                                          np.asarray(ids_a, dtype=np.int64),
                                          np.asarray(ids_b, dtype=np.int64)),
                 phi=phi, edge_seed=None, periodic=False)


# ---------------------------------------------------------------------------
# serialization


def graph_to_csv(graph: Graph) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id_a", "id_b"])
    for a, b in graph.edges().tolist():
        writer.writerow([a, b])
    return buf.getvalue()


def marked_edges_to_csv(marked: MarkedEdgeSet) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id_a", "id_b", "mark"])
    for (a, b), mark in marked.entries:
        writer.writerow([a, b, repr(mark)])
    return buf.getvalue()
