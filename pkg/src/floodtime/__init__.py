"""Expected flooding time of intermittently connected mobile ad hoc networks."""

from .analytic import (
    FaTable,
    OpCounts,
    SparseSystem,
    UpperTable,
    assemble_system,
    complexity_exact,
    complexity_lower,
    complexity_upper,
    crossover_n,
    exact_flooding_time,
    incremental_upper,
    lower_bound_flooding_time,
    psi_index,
    small_p_exact,
    small_p_lower,
    sparse_envelope,
    sparse_flooding_time,
    upper_bound_flooding_time,
)
from .core import ModelParams, ParameterError, binomial_pmf_row, harmonic, stationary_probability, survive_pow
from .oracle import ctmc_exact_flooding, oracle_report
from .stochastic import (
    FloodingEstimate,
    GuardExceededError,
    OnDurationLaw,
    informed_closure,
    monte_carlo,
    simulate_generative,
    simulate_physical,
)

__version__ = "0.1.0"
