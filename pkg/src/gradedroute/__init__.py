"""Grade-filtered genetic-algorithm routing simulator."""
from .errors import *  # noqa: F401,F403
from .ga import (
    FitnessReport,
    GaConfig,
    enumerate_paths,
    evaluate_fitness,
    evolve,
    insertion_mutation,
    pmx_crossover,
    repair,
    roulette_select,
    single_point_crossover,
)
from .grading import GradedSubgraph, GradingThresholds, grade_of, level1_select, priority_of
from .harness import (
    KnowledgeBase,
    KnowledgeBaseEntry,
    RunConfig,
    RunReport,
    build_topology,
    oracle_best_path,
    run_once,
    run_sweep,
)
from .netmodel import (
    NodeMetrics,
    Topology,
    assign_attributes,
    generate_topology,
    in_degree,
    load_topology,
    save_topology,
)
from .queueing import FlowModel, QueueParams, congestion_exists, mm1_mean, network_delay

__version__ = "0.1.0"
