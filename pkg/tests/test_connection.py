"""Connection functions, keyed edge randomness and graph construction."""

import math

import numpy as np
import pytest
from scipy import stats as sps

from rcmlab.connection import (ConnectionError_, Gaussian, Indicator, PolyTail,
                               Tabulated, build_graph, build_with_origin,
                               edge_marking_T, evaluate, graph_to_csv,
                               m_phi, marked_edges_to_csv, pair_uniform,
                               pair_uniform_array, threshold_marked_edges)
from rcmlab.points import (ORIGIN_ID, Configuration, Window, centered_cube,
                           restrict, sample_poisson)


def fixed_config(positions, side=10.0, corner=None):
    positions = np.asarray(positions, dtype=float)
    n, d = positions.shape
    corner = np.full(d, -side / 2.0) if corner is None else np.asarray(corner, float)
    return Configuration(
        ids=np.arange(n, dtype=np.int64),
        positions=positions,
        birth_times=np.linspace(0.05, 0.95, n) if n else np.array([]),
        is_origin=np.zeros(n, dtype=bool),
        window=Window(corner=corner, side=side),
        intensity=1.0,
    )


# --- phi variants -----------------------------------------------------------

def test_evaluate_examples():
    ind = Indicator(dim=2, radius=1.0)
    assert evaluate(ind, np.array([0.5, 0.0])) == 1.0
    assert evaluate(ind, np.array([2.0, 0.0])) == 0.0
    gau = Gaussian(dim=2, scale=1.0)
    assert evaluate(gau, np.zeros(2)) == 1.0
    assert math.isclose(evaluate(gau, np.array([1.0, 0.0])), math.exp(-1.0))
    assert evaluate(gau, np.array([0.3, -0.4])) == evaluate(gau, np.array([-0.3, 0.4]))
    with pytest.raises(ConnectionError_):
        evaluate(gau, np.zeros(3))


def test_m_phi_analytic():
    assert math.isclose(m_phi(Indicator(dim=2, radius=1.0)), math.pi)
    assert math.isclose(m_phi(Indicator(dim=3, radius=2.0)), 4.0 / 3.0 * math.pi * 8.0)
    assert math.isclose(m_phi(Gaussian(dim=2, scale=1.0)), math.pi)
    assert math.isclose(m_phi(Gaussian(dim=1, scale=2.0)), math.sqrt(math.pi / 2.0))


def test_m_phi_polytail_quadrature():
    phi = PolyTail(dim=2, c0=1.0, epsilon0=1.0, cutoff=1.0)
    # exponent 11; mass = area of unit disk + tail integral 2 pi / 9
    expected = math.pi + 2 * math.pi / 9.0
    assert math.isclose(phi.m_phi(), expected, rel_tol=1e-8)


def test_m_phi_tabulated_exact_segments():
    # triangle profile phi(r) = 1 - r on [0, 1], d = 2:
    # integral = 2 pi * int_0^1 (1 - r) r dr = pi / 3
    phi = Tabulated(dim=2, radii=(0.0, 1.0), values=(1.0, 0.0))
    assert math.isclose(phi.m_phi(), math.pi / 3.0, rel_tol=1e-12)


def test_phi_range_validation():
    with pytest.raises(ConnectionError_):
        Tabulated(dim=2, radii=(0.0, 1.0), values=(1.5, 0.0))
    with pytest.raises(ConnectionError_):
        Indicator(dim=2, radius=-1.0)


def test_displacement_sampler_matches_phi_density():
    # radius distribution of phi/m for the indicator is r^(d-1)-weighted
    rng = np.random.default_rng(0)
    ind = Indicator(dim=2, radius=2.0)
    radii = np.linalg.norm(ind.sample_displacement(rng, 20000), axis=1)
    # CDF r^2 / 4 on [0, 2]
    d = sps.kstest(radii, lambda r: np.clip(r ** 2 / 4.0, 0, 1)).statistic
    assert d < 0.015
    gau = Gaussian(dim=2, scale=1.0)
    disp = gau.sample_displacement(rng, 20000)
    assert abs(disp.mean()) < 0.02
    assert abs(disp.var() - 0.5) < 0.02


# --- pair_uniform ------------------------------------------------------------

def test_pair_uniform_symmetry_and_determinism():
    assert pair_uniform(7, 3, 9) == pair_uniform(7, 9, 3)
    assert pair_uniform(7, 3, 9) == pair_uniform(7, 3, 9)
    assert pair_uniform(8, 3, 9) != pair_uniform(7, 3, 9)
    with pytest.raises(ConnectionError_):
        pair_uniform(7, 3, 3)


def test_pair_uniform_uniformity():
    ids_a = np.repeat(np.arange(400, dtype=np.int64), 250)
    ids_b = np.tile(np.arange(400, 650, dtype=np.int64), 400)
    u = pair_uniform_array(123, ids_a, ids_b)
    assert u.size == 100_000
    assert ((0.0 <= u) & (u < 1.0)).all()
    d = sps.kstest(u, "uniform").statistic
    assert d < 0.01


def test_pair_uniform_distinct_across_seeds_and_pairs():
    u1 = pair_uniform_array(1, np.arange(1000), np.arange(1000, 2000))
    u2 = pair_uniform_array(2, np.arange(1000), np.arange(1000, 2000))
    assert np.mean(np.abs(u1 - u2) < 1e-12) < 0.01


# --- graphs ------------------------------------------------------------------

def test_indicator_edges_by_distance():
    config = fixed_config([[0.0, 0.0], [0.5, 0.0], [3.0, 0.0]])
    g = build_graph(config, Indicator(dim=2, radius=1.0), edge_seed=1)
    assert g.has_edge(0, 1)
    assert not g.has_edge(0, 2)
    assert not g.has_edge(1, 2)
    assert g.edge_count() == 1


def test_adjacency_symmetric_no_self_loops():
    config = sample_poisson(centered_cube(2, 100.0), 1.0, seed=4)
    g = build_graph(config, Gaussian(dim=2, scale=1.0), edge_seed=9)
    for a, nbrs in g.neighbors.items():
        assert a not in nbrs.tolist()
        for b in nbrs.tolist():
            assert g.has_edge(b, a)


def test_unbounded_phi_blocked_pairs_match_direct():
    # small instance: blocked all-pairs path must agree with direct recompute
    config = sample_poisson(centered_cube(2, 36.0), 1.2, seed=13)
    g = build_graph(config, Gaussian(dim=2, scale=0.7), edge_seed=17)
    phi = Gaussian(dim=2, scale=0.7)
    ids = config.ids
    expected = set()
    for i in range(config.n_points):
        for j in range(i + 1, config.n_points):
            dist = np.linalg.norm(config.positions[i] - config.positions[j])
            u = pair_uniform(17, int(ids[i]), int(ids[j]))
            if u < float(phi.radial(dist)):
                expected.add((int(ids[i]), int(ids[j])))
    got = {tuple(e) for e in g.edges().tolist()}
    assert got == expected


def test_induced_subgraph_coupling():
    # graph on a restriction equals the induced subgraph of the full graph
    w = centered_cube(2, 144.0)
    config = sample_poisson(w, 1.0, seed=21)
    phi = Gaussian(dim=2, scale=1.0)
    g_full = build_graph(config, phi, edge_seed=5)
    for volume in (16.0, 64.0):
        sub = centered_cube(2, volume)
        g_sub = build_graph(restrict(config, sub), phi, edge_seed=5)
        induced = g_full.restrict_to_window(sub)
        assert {tuple(e) for e in g_sub.edges().tolist()} == \
               {tuple(e) for e in induced.edges().tolist()}


def test_tabulated_phi_in_graphs():
    # support pruning: no edge beyond the last grid radius; below it the
    # linear interpolant drives the keyed threshold
    phi = Tabulated(dim=2, radii=(0.0, 1.0, 2.0), values=(1.0, 0.5, 0.0))
    config = fixed_config([[0.0, 0.0], [0.4, 0.0], [0.0, 2.5], [5.0, 5.0]], side=20.0)
    g = build_graph(config, phi, edge_seed=3)
    assert g.has_edge(0, 1)          # phi = 1 along [0, 1)... at 0.4 -> 0.8
    assert not g.has_edge(0, 2)      # distance 2.5 beyond support
    assert not g.has_edge(0, 3)
    assert math.isclose(float(phi.radial(0.4)), 0.8)
    assert math.isclose(float(phi.radial(1.5)), 0.25)
    # torus mode with finite support uses the periodic tree
    config2 = sample_poisson(centered_cube(2, 100.0), 1.0, seed=5)
    g2 = build_graph(config2, phi, edge_seed=6, periodic=True)
    index = {int(i): k for k, i in enumerate(config2.ids)}
    for a, b in g2.edges().tolist():
        delta = config2.positions[index[a]] - config2.positions[index[b]]
        delta -= 10.0 * np.round(delta / 10.0)
        assert np.linalg.norm(delta) <= 2.0 + 1e-9


def test_indicator_monotone_in_radius():
    config = sample_poisson(centered_cube(2, 64.0), 1.5, seed=2)
    edges_small = {tuple(e) for e in
                   build_graph(config, Indicator(dim=2, radius=0.7), 3).edges().tolist()}
    edges_big = {tuple(e) for e in
                 build_graph(config, Indicator(dim=2, radius=1.3), 3).edges().tolist()}
    assert edges_small <= edges_big


def test_mean_degree_matches_mecke_on_torus():
    # E[#edges] = lambda^2 |W| m_phi / 2 exactly on the torus
    phi = Gaussian(dim=2, scale=1.0)
    w = centered_cube(2, 100.0)
    reps = 120
    counts = np.array([
        build_graph(sample_poisson(w, 1.0, seed=s), phi, edge_seed=1000 + s,
                    periodic=True).edge_count()
        for s in range(reps)
    ], dtype=float)
    expected = 100.0 * math.pi / 2.0
    stderr = counts.std(ddof=1) / math.sqrt(reps)
    assert abs(counts.mean() - expected) < 3 * stderr


def test_build_with_origin_coupling():
    config = sample_poisson(centered_cube(2, 36.0), 1.0, seed=6)
    phi = Indicator(dim=2, radius=1.0)
    base, with_origin = build_with_origin(config, phi, edge_seed=4)
    assert with_origin.n_vertices == base.n_vertices + 1
    # shared edges identical
    base_edges = {tuple(e) for e in base.edges().tolist()}
    origin_edges = {tuple(e) for e in with_origin.edges().tolist()}
    assert base_edges == {e for e in origin_edges if ORIGIN_ID not in e}
    # origin neighbors are exactly the points within radius 1
    dists = np.linalg.norm(config.positions, axis=1)
    expected = set(config.ids[dists <= 1.0].tolist())
    assert set(with_origin.neighbors[ORIGIN_ID].tolist()) == expected


def test_build_with_origin_empty_config():
    config = fixed_config(np.zeros((0, 2)))
    base, with_origin = build_with_origin(config, Indicator(dim=2, radius=1.0), 1)
    assert base.n_vertices == 0
    assert with_origin.n_vertices == 1
    assert with_origin.degree(ORIGIN_ID) == 0


# --- edge marking ------------------------------------------------------------

def test_edge_marking_single_and_pair():
    single = fixed_config([[0.2, 0.2]])
    assert edge_marking_T(single, mark_seed=1).entries == ()

    pair = fixed_config([[0.2, 0.2], [0.7, 0.4]], side=1.0, corner=[0.0, 0.0])
    marked = edge_marking_T(pair, mark_seed=1)
    assert len(marked.entries) == 1
    (ids, mark) = marked.entries[0]
    assert ids == (0, 1)
    assert 0.0 <= mark < 1.0
    # older point is id 0 (birth 0.05), rank 1 in its cube (0, 0); the mark
    # comes from the younger point's sequence, so it changes with the
    # younger id but not with the older point's id
    relabeled = Configuration(
        ids=np.array([5, 1]), positions=pair.positions,
        birth_times=pair.birth_times, is_origin=pair.is_origin,
        window=pair.window, intensity=1.0,
    )
    assert edge_marking_T(relabeled, 1).entries[0][1] == mark
    younger_changed = Configuration(
        ids=np.array([0, 9]), positions=pair.positions,
        birth_times=pair.birth_times, is_origin=pair.is_origin,
        window=pair.window, intensity=1.0,
    )
    assert edge_marking_T(younger_changed, 1).entries[0][1] != mark


def test_edge_marking_rank_dependence():
    # moving an unrelated older point into the same cube shifts the rank
    base = fixed_config([[0.2, 0.2], [5.7, 5.4], [0.4, 0.3]], side=12.0,
                        corner=[-1.0, -1.0])
    # birth times: 0.05, 0.5, 0.95; pair (0, 1): older is 0, rank 1 in cube (0, 0)
    mark_before = dict(edge_marking_T(base, 3).entries)[(0, 1)]
    moved = Configuration(
        ids=base.ids, positions=np.array([[0.2, 0.2], [5.7, 5.4], [0.6, 0.6]]),
        birth_times=np.array([0.5, 0.9, 0.05]),  # now id 2 is older and in cube (0,0)
        is_origin=base.is_origin, window=base.window, intensity=1.0,
    )
    mark_after = dict(edge_marking_T(moved, 3).entries)[(0, 1)]
    assert mark_before != mark_after  # rank of the older endpoint changed


def test_edge_marking_duplicate_birth_times_rejected():
    config = fixed_config([[0.1, 0.1], [0.2, 0.2]])
    clashed = Configuration(
        ids=config.ids, positions=config.positions,
        birth_times=np.array([0.5, 0.5]), is_origin=config.is_origin,
        window=config.window, intensity=1.0,
    )
    with pytest.raises(ConnectionError_):
        edge_marking_T(clashed, 1)


def test_threshold_marked_edges_distribution_matches_build_graph():
    # two-sample chi-square on edge-count histograms, small window
    phi = Gaussian(dim=2, scale=1.0)
    w = Window(corner=np.array([0.0, 0.0]), side=2.0)
    reps = 1500
    counts_t, counts_g = [], []
    for s in range(reps):
        config = sample_poisson(w, 1.0, seed=50_000 + s)
        marked = edge_marking_T(config, mark_seed=90_000 + s)
        counts_t.append(threshold_marked_edges(marked, config, phi).edge_count())
        config2 = sample_poisson(w, 1.0, seed=150_000 + s)
        counts_g.append(build_graph(config2, phi, edge_seed=190_000 + s).edge_count())
    top = max(max(counts_t), max(counts_g))
    bins = np.arange(-0.5, top + 1.5)
    h_t, _ = np.histogram(counts_t, bins=bins)
    h_g, _ = np.histogram(counts_g, bins=bins)
    # merge sparse tail bins so expected counts stay reasonable
    keep = (h_t + h_g) >= 10
    tail_t, tail_g = h_t[~keep].sum(), h_g[~keep].sum()
    obs = np.array([np.append(h_t[keep], tail_t), np.append(h_g[keep], tail_g)])
    obs = obs[:, obs.sum(axis=0) > 0]
    _, p, _, _ = sps.chi2_contingency(obs)
    assert p > 0.01


def test_serialization():
    config = fixed_config([[0.0, 0.0], [0.5, 0.0], [3.0, 0.0]])
    g = build_graph(config, Indicator(dim=2, radius=1.0), edge_seed=1)
    assert graph_to_csv(g) == "id_a,id_b\n0,1\n"
    marked = edge_marking_T(config, mark_seed=2)
    text = marked_edges_to_csv(marked)
    assert text.splitlines()[0] == "id_a,id_b,mark"
    assert len(text.splitlines()) == 4
