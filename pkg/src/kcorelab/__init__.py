"""kcorelab: a k-core laboratory for sparse random graphs.

Analytic side: Poisson tail/thinning numerics, emergence thresholds,
and the Gaussian fluctuation covariances of the peeling process and of
the core size.  Simulation side: configuration-model, G(n,p) and G(n,m)
generators, linear-time peeling, the randomized continuous-time peeling
process, and a Monte Carlo harness that checks the limit laws against
the analytic engine.
"""

from .covariance import (GNM, GNP, ProcessCovariances, StarCovariances,
                         VarianceReport, assemble_critical,
                         assemble_supercritical, phi_rs, process_sigma,
                         sigma_WW, sigma_rW, sigma_rs, star_sigma)
from .degrees import (DegreeDistribution, DegreeSequence, bhl, binom_pmf,
                      b_deriv, condition_report, empirical_dist, h_deriv,
                      l_deriv, log_time_curves, parse_degree_file, q_j,
                      q_j_deriv)
from .experiments import (ExperimentReport, ExperimentSpec, gaussian_fit,
                          run_experiment)
from .generators import (EdgeProcess, Multigraph, config_model, edge_process,
                         from_edges, gnm, gnp, pair_count, parse_edgelist_text,
                         simple_graph)
from .peeling import CoreResult, Trajectory, emergence_edge_count, peel_core, peel_process
from .poisson import (DomainError, PoissonModel, pois_bhl, pois_pmf,
                      pois_q_deriv, pois_tail)
from .thresholds import (DriftRoot, ThresholdProfile, compute_ck,
                         local_constants, mu_k, p_bar_of, p_hat_of,
                         threshold_profile)

__version__ = "0.1.0"
