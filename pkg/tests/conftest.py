"""Pytest fixtures for FairRoute tests"""

from typing import Dict, Iterable, List, Optional

import pytest

from fairroute.config import GAConfig, ScenarioConfig, SyntheticParams
from fairroute.data.synthetic import build_lattice
from fairroute.optimization.fitness import WorldSnapshot
from fairroute.world.entities import CustomerRequest, Scenario
from fairroute.world.graph import RoadGraph
from tests.helpers import METERS_PER_DEGREE, ORIGIN_LAT, ORIGIN_LON, line_graph_of


@pytest.fixture
def line_graph() -> RoadGraph:
    """Four nodes 70 m apart: one minute of travel per edge"""
    return line_graph_of(4)


@pytest.fixture
def diamond_graph() -> RoadGraph:
    """Directed diamond with a shortcut: 0->3 is shortest via 0-1-2-3 (250 m)"""
    step = 100.0 / METERS_PER_DEGREE
    nodes = [
        (0, ORIGIN_LAT, ORIGIN_LON),
        (1, ORIGIN_LAT + step, ORIGIN_LON - step),
        (2, ORIGIN_LAT + step, ORIGIN_LON + step),
        (3, ORIGIN_LAT + 2 * step, ORIGIN_LON),
    ]
    edges = [(0, 1, 100.0), (0, 2, 300.0), (1, 3, 400.0), (2, 3, 100.0), (1, 2, 50.0)]
    return RoadGraph(nodes, edges)


@pytest.fixture
def small_params() -> SyntheticParams:
    """6x6 lattice, 10 bays, one hour"""
    return SyntheticParams(bays=10, extent_m=500.0, spacing_m=100.0, horizon=60, seed=7)


@pytest.fixture
def lattice(small_params) -> RoadGraph:
    return build_lattice(small_params)


@pytest.fixture
def fast_ga() -> GAConfig:
    """Small genetic configuration for quick tests"""
    return GAConfig(population_size=12, max_gen=8, seed=3)


@pytest.fixture
def short_scenario() -> ScenarioConfig:
    return ScenarioConfig(horizon=30, providers=3, seed=1)


@pytest.fixture
def snapshot_factory():
    """Build a WorldSnapshot from providers, requests and optional ledgers"""

    def build(
        graph: RoadGraph,
        providers: Dict[int, int],
        requests: Iterable[CustomerRequest],
        ledgers: Optional[Dict[int, float]] = None,
        scenario: Scenario = Scenario.NON_COMPLIANCE,
        now: float = 0.0,
        mean_stay: float = 60.0,
        horizon: float = 480.0,
        idle: Optional[List[int]] = None,
        area_raised: Optional[Dict[int, int]] = None,
    ) -> WorldSnapshot:
        pool = {request.id: request for request in requests}
        if area_raised is None:
            area_raised = {}
            for request in pool.values():
                area = request.area if request.area is not None else -1
                area_raised[area] = area_raised.get(area, 0) + 1
        return WorldSnapshot(
            scenario=scenario,
            now=now,
            graph=graph,
            idle_providers=tuple(sorted(idle if idle is not None else providers)),
            provider_locations=dict(providers),
            requests=pool,
            ledgers=dict(ledgers) if ledgers is not None else {pid: 0.0 for pid in providers},
            horizon=horizon,
            mean_stay=mean_stay,
            area_raised=area_raised,
        )

    return build
