from pathlib import Path

import hypothesis
import pytest

from gradenet.grading import SurvivorGraph

hypothesis.settings.register_profile("default", deadline=None, max_examples=50)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=5)
hypothesis.settings.load_profile("default")

SAMPLE = Path(__file__).resolve().parents[1] / "docs" / "sample_topology.txt"


def undirected(pairs):
    """Bidirectional edge dict from (u, v, bandwidth) triples."""
    edges = {}
    for u, v, bw in pairs:
        edges[(u, v)] = bw
        edges[(v, u)] = bw
    return edges


@pytest.fixture
def sample_path():
    return SAMPLE


@pytest.fixture
def k4():
    """Complete 4-node graph; path 0-2-3 has bottleneck 80, every other path at most 50."""
    return SurvivorGraph.from_edges(undirected([
        (0, 1, 50.0), (0, 2, 90.0), (0, 3, 30.0),
        (1, 2, 40.0), (1, 3, 45.0), (2, 3, 80.0),
    ]))
