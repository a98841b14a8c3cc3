"""Numerical weak-KAM toolkit.

Vanishing-discount limits of H(x, Du, lam u) = c(G) on a discretized circle:
critical values, Peierls barriers, Aubry sets, Mather measures, discounted
solutions u^lam, their occupation measures, and the selected limit u^0.
"""

from ._kernels import BACKEND
from .bellman import ValueFunction, extract_trajectory, lax_oleinik_step, policy, solve_discounted
from .config import ExperimentConfig, bundled_config, load_config, parse_config
from .critical import BarrierData, aubry_set, compute_barrier, critical_value, mane_potential, peierls_barrier
from .errors import *  # noqa: F401,F403
from .limit import (
    limit_by_barrier,
    limit_by_subsolution_sup,
    limit_by_subsolution_sup_all,
    limit_special_case,
    verify_convergence,
)
from .mather import ClosedMeasure, EdgeMeasure, action, extreme_mather_measures, mather_lp_certificate
from .model import (
    Family,
    FourierSeries,
    HamiltonianModel,
    apriori_constants,
    compute_Lu0,
    legendre_transform,
    verify_assumptions,
)
from .occupation import (
    OccupationMeasure,
    check_selection_inequality,
    hull_projection,
    occupation_measure,
    weak_convergence_diagnostics,
)
from .pipeline import RunReport, refine, run_pipeline
from .scheme import CostGraph, DiscreteScheme, build_graph

__version__ = "0.1.0"
