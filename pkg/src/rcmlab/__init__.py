"""rcmlab: a simulation laboratory for random connection models.

Samples Poisson point processes, builds RCM graphs with restriction
consistent edge randomness, computes graph and topological functionals
(subgraph counts, Betti numbers, biggest components, add-one costs),
evaluates the corresponding closed-form limits numerically, and verifies
laws of large numbers and central limit theorems at desk scale.
"""

__version__ = "0.1.0"

from .connection import (Gaussian, Graph, Indicator, MarkedEdgeSet, PolyTail, Tabulated,
                         build_graph, build_with_origin, edge_marking_T, evaluate,
                         m_phi, pair_uniform, threshold_marked_edges)
from .functionals import (AddOneCostRecord, ComponentLabeling, Functional,
                          add_one_cost, biggest_component, connected_components,
                          count_components_isomorphic, count_induced_subgraphs,
                          make_functional, parse_functional, stabilization_trace)
from .limits import (ComponentLimitResult, LimitEstimate, estimate_component_limit,
                     estimate_h_A, estimate_mean_density, estimate_sigma_AB,
                     isolation_integral, psi_A_exact)
from .patterns import (PatternGraph, builtin_pattern, complete_graph, cycle_graph,
                       from_edge_list, path_graph, single_vertex)
from .percolation import (AnnulusBox, Tessellation, c_delta, coarsened_graph,
                          estimate_beta_nu, estimate_crossing_theta, estimate_kappa,
                          per_graph)
from .points import (Configuration, PointRecord, Window, add_origin, centered_cube,
                     nested_windows, restrict, sample_poisson)
from .stats import (CltReport, CovarianceReport, QuenchedResult, SampleSet,
                    clt_report, covariance_report, quenched_run, run_replications,
                    variance_scaling, wasserstein2_to_normal)
from .topology import (BoundaryMatrix, SimplicialComplex, betti_numbers,
                       boundary_matrix, clique_complex, cross_polytope_graph,
                       euler_characteristic_check, simplex_counts)
