"""Experiment matrices: every (algorithm, provider count, seed) cell"""

import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

from ..config import GlobalConfig
from ..data.loaders import load_graph, load_requests
from ..data.synthetic import generate_world
from ..data.writers import ResultRow, append_results
from ..dispatch import get_algorithm
from ..errors import ConfigurationError, FairRouteError
from ..simulation.simulator import SimulationResult, run_simulation

logger = logging.getLogger(__name__)

DEFAULT_PROVIDER_COUNTS = (20, 30, 50)
RESULTS_FILE = "results.csv"


def with_seed(config: GlobalConfig, seed: int) -> GlobalConfig:
    """Copy of a configuration with ``seed`` applied to every section"""
    return GlobalConfig(
        ga=dataclasses.replace(config.ga, seed=seed),
        scenario=dataclasses.replace(config.scenario, seed=seed),
        synthetic=dataclasses.replace(config.synthetic, seed=seed),
    )


@dataclass(frozen=True)
class Cell:
    """One run of the matrix"""

    algo: str
    providers: int
    seed: int

    @property
    def label(self) -> str:
        return f"{self.algo} providers={self.providers} seed={self.seed}"

    @property
    def slug(self) -> str:
        return f"{self.algo}_p{self.providers}_s{self.seed}"


@dataclass
class ExperimentSpec:
    """Algorithms x provider counts x seeds over one scenario configuration

    Without ``graph_dir``/``events_path`` each seed generates its own
    synthetic world from ``config.synthetic``.
    """

    algorithms: List[str]
    provider_counts: List[int] = field(default_factory=lambda: list(DEFAULT_PROVIDER_COUNTS))
    seeds: List[int] = field(default_factory=lambda: [0, 1, 2])
    config: GlobalConfig = field(default_factory=GlobalConfig)
    out_dir: Optional[str] = None

    graph_dir: Optional[str] = None
    events_path: Optional[str] = None
    history_path: Optional[str] = None

    def __post_init__(self):
        """Validate the experiment matrix"""
        self.validate()

    def validate(self) -> None:
        errors = []

        if not self.algorithms:
            errors.append("at least one algorithm is required")
        if not self.provider_counts:
            errors.append("at least one provider count is required")
        elif any(count < 1 for count in self.provider_counts):
            errors.append("provider counts must be positive")
        if not self.seeds:
            errors.append("at least one seed is required")
        elif len(set(self.seeds)) != len(self.seeds):
            errors.append("seeds must be distinct")
        if (self.graph_dir is None) != (self.events_path is None):
            errors.append("graph_dir and events_path must be given together")

        if errors:
            raise ConfigurationError("Invalid configuration: " + "; ".join(errors))

    def cells(self) -> List[Cell]:
        """Every cell in canonical (algo, providers, seed) order"""
        return [
            Cell(algo, providers, seed)
            for algo in self.algorithms
            for providers in self.provider_counts
            for seed in self.seeds
        ]


@dataclass
class CellOutcome:
    """Result row of a cell, or the reason it failed"""

    cell: Cell
    row: Optional[ResultRow] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def simulate_cell(spec: ExperimentSpec, cell: Cell) -> SimulationResult:
    """Build the cell's world and algorithm, then run the simulation"""
    config = with_seed(spec.config, cell.seed)
    scenario = dataclasses.replace(config.scenario, providers=cell.providers)

    if spec.graph_dir is not None:
        graph = load_graph(spec.graph_dir, scenario.speed_m_per_min)
        events = load_requests(spec.events_path, graph, scenario.scenario)
        history = load_requests(spec.history_path, graph, scenario.scenario) if spec.history_path else None
    else:
        graph, events, history = generate_world(config.synthetic, scenario.scenario, scenario.speed_m_per_min)

    ga_config = config.ga
    if ga_config.trace_path and spec.out_dir:
        trace = Path(spec.out_dir) / "traces" / f"{cell.slug}.csv"
        ga_config = dataclasses.replace(ga_config, trace_path=str(trace))

    algorithm = get_algorithm(cell.algo, ga_config, cold_start=scenario.cold_start)
    return run_simulation(scenario, algorithm, events, graph, history=history)


def run_cell(task: Tuple[ExperimentSpec, Cell]) -> CellOutcome:
    """Worker entry point; never raises"""
    spec, cell = task
    try:
        result = simulate_cell(spec, cell)
        if spec.out_dir:
            result.report.save(Path(spec.out_dir) / "reports" / f"{result.report.scenario}_{cell.slug}.json")
        return CellOutcome(cell, ResultRow.from_report(cell.algo, cell.providers, cell.seed, result.report))
    except FairRouteError as e:
        return CellOutcome(cell, error=str(e))
    except Exception as e:
        logger.exception(f"Unexpected failure in cell {cell.label}")
        return CellOutcome(cell, error=f"{type(e).__name__}: {e}")


class ExperimentRunner:
    """Runs an experiment matrix, sequentially or over a process pool"""

    def __init__(self, spec: ExperimentSpec, jobs: int = 1):
        if jobs < 1:
            raise ConfigurationError("Invalid configuration: jobs must be at least 1")
        self.spec = spec
        self.jobs = jobs

    def run(self, progress: Optional[Callable[[CellOutcome, int, int], None]] = None) -> List[CellOutcome]:
        """Run every cell; failed cells are recorded and the rest still run

        Outcomes come back in canonical cell order whatever the job count.
        """
        cells = self.spec.cells()
        tasks = [(self.spec, cell) for cell in cells]
        logger.info(f"Running {len(cells)} cells with {self.jobs} job(s)")

        outcomes: List[CellOutcome] = []
        if self.jobs == 1:
            iterator = map(run_cell, tasks)
            outcomes = self._collect(iterator, len(cells), progress)
        else:
            with ProcessPoolExecutor(max_workers=self.jobs) as executor:
                outcomes = self._collect(executor.map(run_cell, tasks), len(cells), progress)

        failed = [outcome for outcome in outcomes if not outcome.ok]
        if failed:
            logger.error(f"{len(failed)} of {len(cells)} cells failed")
        return outcomes

    @staticmethod
    def _collect(iterator, total: int, progress) -> List[CellOutcome]:
        outcomes = []
        for index, outcome in enumerate(iterator, 1):
            if outcome.ok:
                logger.info(f"Cell {outcome.cell.label} done")
            else:
                logger.error(f"Cell {outcome.cell.label} failed: {outcome.error}")
            if progress:
                progress(outcome, index, total)
            outcomes.append(outcome)
        return outcomes

    def write_results(self, outcomes: Sequence[CellOutcome]) -> Optional[Path]:
        """Append the successful rows to ``<out_dir>/results.csv``"""
        if not self.spec.out_dir:
            return None
        path = Path(self.spec.out_dir) / RESULTS_FILE
        append_results([outcome.row for outcome in outcomes if outcome.ok], path)
        return path


def failure_messages(outcomes: Sequence[CellOutcome]) -> List[str]:
    return [f"{outcome.cell.label}: {outcome.error}" for outcome in outcomes if not outcome.ok]
