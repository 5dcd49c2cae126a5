"""Instance generators, baselines and the benchmark runner."""

from .baselines import LloydResult, dsampling_seed, lloyd_baseline, snap_to_candidates
from .bench import COLUMNS, BenchConfigError, BenchReport, BenchRow, run_bench, run_config
from .generators import KINDS, GeneratorSpec, generate

__all__ = [
    "COLUMNS", "KINDS", "BenchConfigError", "BenchReport", "BenchRow", "GeneratorSpec", "LloydResult",
    "dsampling_seed", "generate", "lloyd_baseline", "run_bench", "run_config", "snap_to_candidates",
]
