"""Acceptance suite: one test per criterion, one printed verdict line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the verdict lines.
Statistical criteria use pinned seeds so every run is reproducible; torus
(periodic) mode is used where it makes the analytic oracle exact, which is
what desk-scale windows need to meet the stated tolerances.
"""

import itertools
import math

import numpy as np

from rcmlab.connection import Gaussian, Indicator, build_graph, build_with_origin
from rcmlab.functionals import (biggest_component, connected_components,
                                count_induced_subgraphs, make_functional,
                                stabilization_trace)
from rcmlab.limits import estimate_component_limit, estimate_h_A
from rcmlab.patterns import complete_graph, cycle_graph, path_graph, single_vertex
from rcmlab.percolation import (Tessellation, biggest_equals_c_delta_frequency,
                                coarsened_graph, per_graph)
from rcmlab.points import ORIGIN_ID, centered_cube, sample_poisson
from rcmlab.stats import derive_seeds, quenched_run, run_replications, variance_scaling
from rcmlab.topology import (betti_numbers, clique_complex, cross_polytope_graph,
                             euler_characteristic_check, pattern_to_graph,
                             simplex_counts)

from .test_functionals import (bfs_component_count, brute_force_induced_count,
                               graph_from_edges, random_graph)


def _verdict(number: int, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} - criterion {number:2d}: {detail}")
    assert ok, f"criterion {number} failed: {detail}"


def test_criterion_01_component_count_oracle_equivalence():
    """component_count == BFS oracle == beta_0 on 1000 random graphs."""
    rng = np.random.default_rng(101)
    mismatches = 0
    for i in range(1000):
        n = int(rng.integers(1, 31))
        if i % 2 == 0:
            g = random_graph(rng, n, float(rng.uniform(0.0, 0.25)))
        else:
            config = sample_poisson(centered_cube(2, float(n)), 1.0, seed=int(rng.integers(1 << 31)))
            g = build_graph(config, Indicator(dim=2, radius=1.0),
                            edge_seed=int(rng.integers(1 << 31)))
        a = connected_components(g).n_components
        b = bfs_component_count(g)
        c = betti_numbers(clique_complex(g, dim_cap=1), k_max=0)[0]
        mismatches += (a != b) + (a != c)
    _verdict(1, mismatches == 0,
             f"component_count vs BFS vs beta_0 on 1000 graphs, {mismatches} mismatches")


def test_criterion_02_subgraph_count_exactness():
    """Induced counts equal exhaustive subset enumeration on 200 graphs."""
    rng = np.random.default_rng(202)
    patterns = [complete_graph(2), complete_graph(3), path_graph(3), cycle_graph(4)]
    mismatches = 0
    for _ in range(200):
        n = int(rng.integers(4, 13))
        g = random_graph(rng, n, float(rng.uniform(0.1, 0.55)))
        for pattern in patterns:
            if count_induced_subgraphs(g, pattern) != brute_force_induced_count(g, pattern):
                mismatches += 1
    _verdict(2, mismatches == 0,
             f"K2/K3/P3/C4 induced counts vs brute force on 200 graphs, "
             f"{mismatches} mismatches")


def test_criterion_03_homology_fixtures():
    """Cross-polytope spheres, contractible K_n, C_4, Euler and the Betti bound.

    The cross-polytope graph on 2k+2 vertices has beta_k = 1 for k >= 1;
    the octahedron K_{2,2,2} is the k = 2 member (Betti vector (1, 0, 1)),
    and the k = 1 member is the 4-cycle with beta_1 = 1.
    """
    problems = []
    # cross-polytope family
    cx1 = clique_complex(pattern_to_graph(cross_polytope_graph(1)), dim_cap=None)
    if betti_numbers(cx1, k_max=1) != [1, 1]:
        problems.append("beta(O_1) != (1, 1)")
    cx2 = clique_complex(pattern_to_graph(cross_polytope_graph(2)), dim_cap=None)
    if betti_numbers(cx2, k_max=2) != [1, 0, 1]:
        problems.append("octahedron K_{2,2,2} Betti vector != (1, 0, 1)")
    cx0 = clique_complex(pattern_to_graph(cross_polytope_graph(0)), dim_cap=None)
    if betti_numbers(cx0, k_max=0) != [2]:
        problems.append("beta_0(O_0) != 2")
    # complete graphs are contractible
    for n in (3, 4, 5, 6):
        betti = betti_numbers(clique_complex(pattern_to_graph(complete_graph(n)),
                                             dim_cap=None), k_max=3)
        if betti[0] != 1 or any(betti[1:]):
            problems.append(f"K_{n} not contractible: {betti}")
    # hollow square
    if betti_numbers(clique_complex(pattern_to_graph(cycle_graph(4)), dim_cap=None),
                     k_max=1) != [1, 1]:
        problems.append("C_4 Betti != (1, 1)")
    # Euler identity and the Betti difference bound over 500 nested pairs
    rng = np.random.default_rng(303)
    violations = 0
    for _ in range(500):
        n = int(rng.integers(8, 13))
        edges = [(i, j) for i in range(n) for j in range(i + 1, n)
                 if rng.random() < float(rng.uniform(0.2, 0.45))]
        keep = [e for e in edges if rng.random() > 0.3]
        g_big, g_small = graph_from_edges(n, edges), graph_from_edges(n, keep)
        cx_big_full = clique_complex(g_big, dim_cap=None)
        cx_small_full = clique_complex(g_small, dim_cap=None)
        if not euler_characteristic_check(cx_big_full):
            violations += 1
        if not euler_characteristic_check(cx_small_full):
            violations += 1
        for k in (0, 1):
            cx_big = clique_complex(g_big, dim_cap=k + 1)
            cx_small = clique_complex(g_small, dim_cap=k + 1)
            gap = abs(betti_numbers(cx_big, k_max=k)[k]
                      - betti_numbers(cx_small, k_max=k)[k])
            s_big, s_small = simplex_counts(cx_big), simplex_counts(cx_small)
            if gap > sum(s_big[j] - s_small[j] for j in (k, k + 1)):
                violations += 1
    if violations:
        problems.append(f"{violations} Euler/Betti-bound violations")
    _verdict(3, not problems,
             "cross-polytope beta_k = 1 (k = 1, 2; octahedron is O_2 with "
             "beta_1 = 0), K_n contractible, C_4 = (1, 1), 500 nested pairs clean"
             + ("; " + "; ".join(problems) if problems else ""))


def test_criterion_04_mecke_edge_identity_torus():
    """Mean edge count / volume == lambda^2 m_phi / 2 exactly on the torus."""
    phi = Gaussian(dim=2, scale=1.0)
    samples = run_replications(make_functional("edge_count"), centered_cube(2, 400.0),
                               phi, 1.0, reps=200, master_seed=404, periodic=True)
    mean = float(samples.values.mean()) / 400.0
    stderr = float(samples.values.std(ddof=1)) / math.sqrt(200) / 400.0
    target = math.pi / 2.0
    z = abs(mean - target) / stderr
    _verdict(4, z < 3.0,
             f"edge density {mean:.4f} vs pi/2 = {target:.4f} "
             f"({z:.2f} combined stderr, tolerance 3)")


def test_criterion_05_lln_triangle_counts():
    """xi(K3)/|W| matches (lambda/3) h_K3 from importance sampling (torus)."""
    disk = Indicator(dim=2, radius=1.0)
    pattern = complete_graph(3)
    samples = run_replications(make_functional("subgraph_count", pattern=pattern),
                               centered_cube(2, 900.0), disk, 1.0, reps=100,
                               master_seed=505, periodic=True)
    sim = float(samples.values.mean()) / 900.0
    sim_err = float(samples.values.std(ddof=1)) / math.sqrt(100) / 900.0
    est = estimate_h_A(disk, 1.0, pattern, n_samples=150_000, seed=55)
    lim, lim_err = est.value / 3.0, est.stderr / 3.0
    z = abs(sim - lim) / math.hypot(sim_err, lim_err)
    _verdict(5, z < 3.0,
             f"simulation {sim:.4f} vs integral {lim:.4f} "
             f"({z:.2f} combined stderr, tolerance 3)")


def test_criterion_06_clt_edge_count():
    """Normality of standardized edge counts plus variance-scaling flatness."""
    phi = Gaussian(dim=2, scale=1.0)
    rows = variance_scaling(make_functional("edge_count"), [100.0, 400.0, 900.0],
                            phi, 1.0, reps=500, master_seed=2026, periodic=True)
    mid = rows[1].report  # volume 400
    gap = abs(rows[1].report.variance_over_volume - rows[2].report.variance_over_volume)
    rel_gap = gap / rows[2].report.variance_over_volume
    ok = (mid.ks_pvalue_bootstrap > 0.01 and abs(mid.skewness) < 0.3
          and rel_gap < 0.15)
    _verdict(6, ok,
             f"bootstrap KS p = {mid.ks_pvalue_bootstrap:.3f} (> 0.01), "
             f"skewness {mid.skewness:+.3f} (|s| < 0.3), "
             f"Var/|W| gap {rel_gap:.1%} between volumes 400 and 900 (< 15%)")


def test_criterion_07_betti_clt_smoke():
    """beta_1 fluctuations are non-degenerate and pass the bootstrap KS gate."""
    phi = Gaussian(dim=2, scale=1.0)
    samples = run_replications(make_functional("betti", k=1), centered_cube(2, 400.0),
                               phi, 1.0, reps=300, master_seed=77)
    from rcmlab.stats import clt_report
    report = clt_report(samples)
    ok = (not report.degenerate and report.variance > 0.0
          and report.ks_pvalue_bootstrap > 0.01)
    _verdict(7, ok,
             f"beta_1 variance {report.variance:.1f} (> 0), "
             f"bootstrap KS p = {report.ks_pvalue_bootstrap:.3f} (> 0.01)")


def test_criterion_08_weak_stabilization_traces():
    """Add-one-cost traces settle on the last half of the volume grid."""
    disk = Indicator(dim=2, radius=1.0)
    volumes = [25.0, 50.0, 100.0, 150.0, 200.0, 250.0, 300.0, 350.0, 400.0]
    max_window = centered_cube(2, 400.0)
    functionals = {
        "subgraph_count(K2)": make_functional("subgraph_count",
                                              pattern=complete_graph(2)),
        "component_count": make_functional("component_count"),
        "betti(1)": make_functional("betti", k=1),
    }
    point_seeds = derive_seeds(505, 100, 1)
    edge_seeds = derive_seeds(505, 100, 2)
    details = []
    ok = True
    for name, functional in functionals.items():
        constant = 0
        monotone_ok = True
        for r in range(100):
            trace = stabilization_trace(functional, max_window, volumes, disk, 1.0,
                                        int(point_seeds[r]), int(edge_seeds[r]))
            values = [rec.value for rec in trace]
            half = values[len(values) // 2:]
            constant += (max(half) == min(half))
            if name.startswith("subgraph_count"):
                monotone_ok &= all(b >= a for a, b in zip(values, values[1:]))
        ok &= constant >= 95 and monotone_ok
        details.append(f"{name}: {constant}/100 settled"
                       + ("" if not name.startswith("subgraph")
                          else f", monotone {monotone_ok}"))
    _verdict(8, ok, "; ".join(details) + " (need >= 95, monotone everywhere)")


def test_criterion_09_biggest_component_add_one():
    """Three-case decomposition consistency and supercritical stabilization."""
    disk = Indicator(dim=2, radius=1.0)
    functional = make_functional("biggest_component_size")
    volumes = [25.0, 50.0, 100.0, 150.0, 200.0, 250.0, 300.0, 350.0, 400.0]
    max_window = centered_cube(2, 400.0)
    point_seeds = derive_seeds(909, 100, 1)
    edge_seeds = derive_seeds(909, 100, 2)
    constant = 0
    consistent = True
    for r in range(100):
        trace = stabilization_trace(functional, max_window, volumes, disk, 3.0,
                                    int(point_seeds[r]), int(edge_seeds[r]))
        values = [rec.value for rec in trace]
        half = values[len(values) // 2:]
        constant += (max(half) == min(half))
        for rec, volume in zip(trace, volumes):
            if rec.value < 0 or rec.case_tag not in (1, 2, 3):
                consistent = False
            if rec.case_tag == 3 and rec.value != 0:
                consistent = False
        # independent recomputation of the case formulas on the full window
        config = sample_poisson(max_window, 3.0, int(point_seeds[r]))
        base, origin_graph = build_with_origin(config, disk, int(edge_seeds[r]))
        big_set, big_size = biggest_component(base)
        lab = connected_components(origin_graph)
        comp0 = set(lab.components[lab.component_of[ORIGIN_ID]])
        linked = comp0 - {ORIGIN_ID}
        rec = trace[-1]
        if rec.case_tag == 1:
            consistent &= bool(linked & set(big_set))
            consistent &= rec.value == 1 + len(linked - set(big_set))
        elif rec.case_tag == 2:
            consistent &= not (linked & set(big_set))
            consistent &= rec.value == 1 + len(linked) - big_size
    ok = consistent and constant >= 90
    _verdict(9, ok,
             f"cases consistent = {consistent}, {constant}/100 traces settled "
             f"(need >= 90) at lambda = 3")


def test_criterion_10_quenched_clt():
    """Law-of-total-variance ordering and exact degeneracy for indicator phi."""
    gauss = Gaussian(dim=2, scale=1.0)
    disk = Indicator(dim=2, radius=1.0)
    window = centered_cube(2, 400.0)
    edge_count = make_functional("edge_count")
    reference = run_replications(edge_count, window, gauss, 1.0, reps=400,
                                 master_seed=1234)
    sigma2 = float(np.var(reference.values, ddof=1)) / 400.0
    sigma2_err = sigma2 * math.sqrt(2.0 / 399)
    position_seeds = derive_seeds(4321, 20, 3)
    ordered = 0
    for i in range(20):
        result = quenched_run(int(position_seeds[i]), 200, edge_count, window,
                              gauss, 1.0)
        q_err = result.sigma_q2 * math.sqrt(2.0 / 199)
        ordered += result.sigma_q2 <= sigma2 + 2 * math.hypot(q_err, sigma2_err)
    indicator_result = quenched_run(7, 50, edge_count, window, disk, 1.0)
    exact_zero = bool(np.all(indicator_result.samples.values == 0.0))
    ok = ordered >= 19 and exact_zero
    _verdict(10, ok,
             f"sigma_q^2 <= sigma^2 + 2 stderr in {ordered}/20 draws (need >= 19); "
             f"indicator phi gives Z == 0 exactly: {exact_zero}")


def test_criterion_11_component_limit_variant_resolution():
    """Isolated-vertex density identifies the exponent reading of the limit."""
    disk = Indicator(dim=2, radius=1.0)
    samples = run_replications(
        make_functional("component_iso_count", pattern=single_vertex()),
        centered_cube(2, 900.0), disk, 0.3, reps=100, master_seed=311, periodic=True)
    sim = float(samples.values.mean()) / 900.0
    sim_err = float(samples.values.std(ddof=1)) / math.sqrt(100) / 900.0
    oracle = 0.3 * math.exp(-0.3 * math.pi)  # void probability at intensity 0.3
    result = estimate_component_limit(single_vertex(), disk, 0.3)
    z_oracle = abs(sim - oracle) / sim_err
    z_lambda = abs(sim - result.lambda_in_exponent.value) / sim_err
    z_printed = abs(sim - result.as_printed.value) / sim_err
    lambda_matches = z_lambda < 3.0
    printed_matches = z_printed < 3.0
    ok = z_oracle < 3.0 and lambda_matches and not printed_matches
    print("criterion 11 report: the lambda-in-exponent variant of the "
          "component-count limit matches simulation "
          f"(z = {z_lambda:.2f}); the exponent as printed does not "
          f"(z = {z_printed:.1f})")
    _verdict(11, ok,
             f"isolated-vertex density {sim:.5f} vs lambda e^(-lambda m) = "
             f"{oracle:.5f} ({z_oracle:.2f} stderr); lambda-variant matched, "
             f"printed variant rejected")


def test_criterion_12_percolation_diagnostics():
    """Edge nesting Per <= G_delta <= G and the dense-regime trend to 1."""
    disk = Indicator(dim=2, radius=1.0)
    nesting_failures = 0
    rng = np.random.default_rng(1212)
    for _ in range(200):
        config = sample_poisson(centered_cube(2, 64.0), 1.5,
                                seed=int(rng.integers(1 << 31)))
        g = build_graph(config, disk, edge_seed=int(rng.integers(1 << 31)))
        delta = float(rng.uniform(0.4, 1.2))
        e_g = {tuple(e) for e in g.edges().tolist()}
        e_delta = {tuple(e) for e in coarsened_graph(g, delta).edges().tolist()}
        e_per = {tuple(e) for e in per_graph(g, delta).edges().tolist()}
        if not (e_per <= e_delta <= e_g):
            nesting_failures += 1
        # spot check the coarsening rule itself
        tess = Tessellation.build(config, delta)
        for a, b in itertools.islice(iter(sorted(e_delta)), 20):
            ca, cb = tess.cube_of[a], tess.cube_of[b]
            if max(abs(x - y) for x, y in zip(ca, cb)) > 1:
                nesting_failures += 1
    window = centered_cube(2, 100.0)
    freqs = []
    errs = []
    for lam in (5.0, 10.0, 20.0):
        est = biggest_equals_c_delta_frequency(disk, lam, 0.5, window, reps=200,
                                               seed=606)
        freqs.append(est.value)
        errs.append(est.stderr)
    band01 = 3 * math.hypot(errs[0], errs[1])
    band12 = 3 * math.hypot(errs[1], errs[2])
    trend = freqs[0] <= freqs[1] + band01 and freqs[1] <= freqs[2] + band12
    final = freqs[2] >= 0.99 - 3 * errs[2]
    ok = nesting_failures == 0 and trend and final
    _verdict(12, ok,
             f"nesting exact on 200 instances ({nesting_failures} failures); "
             f"full-cluster frequency {freqs[0]:.3f} -> {freqs[1]:.3f} -> "
             f"{freqs[2]:.3f} non-decreasing to >= 0.99")
