"""Opinion dynamics driven by Pareto improvement of social and cognitive costs.

Modules:

- ``graph``: row-stochastic influence networks with exact rational weights.
- ``cohesion``: cohesive and strictly cohesive sets, expansion, seed sets.
- ``dynamics``: Pareto-improvement sets, equilibrium tests, simulation.
- ``sequences``: legal update sequences and their transforms.
- ``experiments``: seeded Monte Carlo sweeps.
- ``cli``: the ``pid-opinion`` command.
"""

from .cohesion import (
    CohesionReport,
    analyze,
    cohesive_expansion,
    enumerate_minimal_strictly_cohesive,
    heavy_edge_cycle_check,
    is_cohesive,
    is_strictly_cohesive,
    minimum_seed_sets,
    only_scs_is_V,
    verify_seed_set,
)
from .dynamics import (
    OpinionDomain,
    ParetoSet,
    SimulationResult,
    cognitive_cost,
    is_equilibrium,
    is_equilibrium_thm1,
    pareto_set,
    simulate,
    social_cost,
    step,
)
from .errors import BudgetExceededError, NetworkFormatError, PIDError, PreconditionError
from .experiments import ExperimentConfig, RunRecord, SweepSummary, cluster_count, run_replicate, sweep
from .graph import InfluenceNetwork, erdos_renyi, from_edge_list, lattice, watts_strogatz
from .sequences import (
    compress_to_pm1,
    construct_equilibrium_sequence,
    construct_false_outcome_sequence,
    construct_truth_consensus_sequence,
    remove_crossing_updates,
    verify_sequence_legal,
)

__version__ = "0.1.0"
