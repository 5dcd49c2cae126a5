"""Local-search clustering over finite candidate sets, with exact oracles and analysis tools."""

from .core import (CandidateSet, Instance, InstanceError, Metric, ParseError, PointSet, distance,
                   load_instance, make_candidates, parse_instance, save_instance)
from .objective import InfeasibleError, ObjectiveSpec, Solution, assign_all, cost_delta_swap
from .oracle import OracleLimitError, OracleResult, exact, exact_gkm, exact_lq, exact_ufl
from .search import (SearchConfig, SearchTrace, enumerate_moves, local_search, local_search_gkm,
                     local_search_lq, local_search_ufl)
from .seeding import dsampling_seed

__version__ = "0.1.0"

__all__ = [
    "CandidateSet", "InfeasibleError", "Instance", "InstanceError", "Metric", "ObjectiveSpec",
    "OracleLimitError", "OracleResult", "ParseError", "PointSet", "SearchConfig", "SearchTrace",
    "Solution", "assign_all", "cost_delta_swap", "distance", "dsampling_seed", "enumerate_moves",
    "exact", "exact_gkm", "exact_lq", "exact_ufl", "load_instance", "local_search",
    "local_search_gkm", "local_search_lq", "local_search_ufl", "make_candidates", "parse_instance",
    "save_instance",
]
