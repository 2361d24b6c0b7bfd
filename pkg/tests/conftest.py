import pytest

from tracequery.abstraction import SimConfig, simulate
from tracequery.ltlf import letter
from tracequery.store import build_library

# The two three-frame sample traces used throughout: the first leaves the
# top lane empty-handed, the second ends up behind a car while staying in
# the top lane.
ETA1 = [letter("lane-1"), letter("lane-1"), letter()]
ETA2 = [letter("lane-1"), letter("lane-1"), letter("lane-1", "behind")]


@pytest.fixture(scope="session")
def small_library():
    """A handful of mixed episodes for query-level tests."""
    cfg = SimConfig(steps=160, npc_count=5)
    kinds = [
        "plain", "plain", "plain", "toplane",
        "dual-trigger", "dual-trigger", "collision", "plain",
    ]
    episodes = [
        simulate(cfg, 100 + i, kind, f"ep-{i:04d}") for i, kind in enumerate(kinds)
    ]
    return build_library(episodes, provenance={"base_seed": 100})


@pytest.fixture(scope="session")
def dual_library():
    """Fifty dual-trigger episodes with a fixed seed base."""
    cfg = SimConfig()
    episodes = [
        simulate(cfg, 1000 + i, "dual-trigger", f"ep-{i:04d}") for i in range(50)
    ]
    return build_library(episodes, provenance={"base_seed": 1000})
