"""Simulator and protocol library for network-coded named-data networking.

The package splits into an algebra layer (``gf``, ``milic``), a content
and packet model (``content``), the deterministic event engine
(``engine``), protocol state machines (``protocols``), topology and
metrics tooling (``topology``, ``tracing``), and the experiment runner
(``experiment``) behind the ``micnsim`` CLI.
"""

from .content import Generation, make_generation, parse_name, source_reply
from .experiment import ExperimentConfig, run_experiment, run_sweep, verify_decode
from .gf import Field, RrefBasis
from .milic import (RankFailureQuery, cardinality, prob_fail_monte_carlo,
                    prob_fail_multi, prob_fail_single, recombine_to_higher,
                    sample_uniform, subset_of)
from .topology import compute_fib, download_bound, load_topology, max_flow

__version__ = "0.1.0"

__all__ = [
    "ExperimentConfig", "Field", "Generation", "RankFailureQuery", "RrefBasis",
    "cardinality", "compute_fib", "download_bound", "load_topology",
    "make_generation", "max_flow", "parse_name", "prob_fail_monte_carlo",
    "prob_fail_multi", "prob_fail_single", "recombine_to_higher",
    "run_experiment", "run_sweep", "sample_uniform", "source_reply",
    "subset_of", "verify_decode",
]
