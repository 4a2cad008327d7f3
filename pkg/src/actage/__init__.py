"""Actuation-age and miss-cost analysis for a two-class edge compute pool.

Analytical steady-state engines (exact pipeline chain, memoryless-service
chain with a matrix-geometric solver, product-form approximation), a
slot-level Monte Carlo simulator with a compiled kernel, closed-form age
and cost metrics, and a Pareto grid search over power and admission-gate
allocations.
"""

__version__ = "0.1.0"

from .channel import fading_threshold, uplink_success_prob
from .config import (SystemConfig, default_config, load, save, validate)
from .engines import ENGINES, compute_report
from .metrics import MetricsReport, aoi_baseline, coma, task_aoa
from .pareto import search as pareto_search
from .sim import SimResult, run as simulate
from .statespace import SteadyState, availability

__all__ = [
    "__version__",
    "SystemConfig",
    "default_config",
    "load",
    "save",
    "validate",
    "fading_threshold",
    "uplink_success_prob",
    "ENGINES",
    "compute_report",
    "MetricsReport",
    "task_aoa",
    "coma",
    "aoi_baseline",
    "SteadyState",
    "availability",
    "SimResult",
    "simulate",
    "pareto_search",
]
