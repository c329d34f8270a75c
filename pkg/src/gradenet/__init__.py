"""Two-level routing: grade-based node filtering followed by GA path search."""

from gradenet.ga_router import Chromosome, GaConfig, GaResult, NoPathError, evolve, widest_path_oracle
from gradenet.grading import GradingConfig, SurvivorGraph, level1_select, mean_grade, priority_of
from gradenet.queueing import congestion_score, mm1_state, network_delay
from gradenet.topology import (
    NodeAttributes,
    Topology,
    generate_topology,
    load_topology,
    node_density,
    save_topology,
)

__all__ = [
    "Chromosome", "GaConfig", "GaResult", "NoPathError", "evolve", "widest_path_oracle",
    "GradingConfig", "SurvivorGraph", "level1_select", "mean_grade", "priority_of",
    "congestion_score", "mm1_state", "network_delay",
    "NodeAttributes", "Topology", "generate_topology", "load_topology", "node_density", "save_topology",
]
