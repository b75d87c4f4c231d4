"""Tessellation diagnostics for the biggest-component machinery.

Shows the nesting Per(delta) <= G_delta <= G, estimates the long-edge and
crossing event probabilities, and prints an empirical panel of the
renormalization inequality
    theta(1/16, t) <= kappa(2^-10, t) + K nu(t/2^7, t)
                      + K (theta(1/16, t/8) + theta(1/16, t/2^7))^2
whose left side the estimators can compare against the first two terms.
"""

from rcmlab import (Indicator, build_graph, centered_cube, estimate_beta_nu,
                    estimate_crossing_theta, estimate_kappa, per_graph,
                    sample_poisson)
from rcmlab.connection import PolyTail
from rcmlab.percolation import coarsened_graph

disk = Indicator(dim=2, radius=1.0)

config = sample_poisson(centered_cube(2, 100.0), intensity=2.0, seed=1)
g = build_graph(config, disk, edge_seed=2)
g_delta = coarsened_graph(g, delta=0.5)
per = per_graph(g, delta=0.5)
print(f"edge nesting: |Per| = {per.edge_count()} <= |G_delta| = "
      f"{g_delta.edge_count()} <= |G| = {g.edge_count()}")

heavy = PolyTail(dim=2, c0=1.0, epsilon0=1.0, cutoff=0.5)
print("\nlong-edge probability kappa(alpha = 1/2, t) for the heavy-tail phi:")
for t in (1.0, 2.0, 4.0):
    est = estimate_kappa(heavy, intensity=1.0, alpha=0.5, t=t, reps=300, seed=3)
    print(f"  t = {t:3.0f}: {est.value:.3f} +/- {est.stderr:.3f}")

print("\ncrossing probability theta and escape probabilities (lambda = 4, "
      "delta = 0.5):")
theta = estimate_crossing_theta(disk, 4.0, active=(0, 1), s=1.0, t=2.0, reps=150,
                                seed=4, delta=0.5)
beta, nu = estimate_beta_nu(disk, 4.0, delta=0.5, s=1.0, t=2.0, reps=150, seed=5)
print(f"  theta(s=1, t=2) = {theta.value:.3f} +/- {theta.stderr:.3f}")
print(f"  beta(t=2)       = {beta.value:.3f} +/- {beta.stderr:.3f}")
print(f"  nu(s=1, t=2)    = {nu.value:.3f} +/- {nu.stderr:.3f}")

print("\nrenormalization panel at t = 8 (both sides, K = 1 for display):")
t = 8.0
lhs = estimate_crossing_theta(disk, 4.0, active=(0, 1), s=t / 16, t=t, reps=40,
                              seed=6, delta=0.5)
kappa = estimate_kappa(disk, 4.0, alpha=0.25, t=t, reps=40, seed=7)
half = estimate_crossing_theta(disk, 4.0, active=(0, 1), s=t / 64, t=t / 8, reps=40,
                               seed=8, delta=0.5)
print(f"  theta(1/16, t)              = {lhs.value:.3f}")
print(f"  kappa(1/4, t)               = {kappa.value:.3f}  "
      "(indicator: no edge exceeds the radius)")
print(f"  theta(1/16, t/8)^2 term     = {half.value ** 2:.3f}")
print("  (nu decays exponentially in the dense regime; see the estimates above)")
