"""Tests for experiment matrices and their summaries"""

import json

import pytest

from fairroute.batch import Cell, ExperimentRunner, ExperimentSpec, failure_messages, run_cell, with_seed
from fairroute.config import GAConfig, GlobalConfig, ScenarioConfig, SyntheticParams
from fairroute.data import read_results
from fairroute.data.writers import ResultRow
from fairroute.dispatch import ABLATION_VARIANTS
from fairroute.errors import ConfigurationError
from fairroute.statistics.reporter import ExperimentReporter, ReportFormat, summarize


@pytest.fixture
def tiny_config():
    """Five bays on a 4x4 lattice over twenty minutes"""
    return GlobalConfig(
        ga=GAConfig(population_size=6, max_gen=2),
        scenario=ScenarioConfig(horizon=20),
        synthetic=SyntheticParams(bays=5, extent_m=300.0, spacing_m=100.0, poisson_rate=2.0, horizon=20),
    )


def result_row(algo, providers, seed, utility, scenario="non_compliance"):
    return ResultRow(
        algo=algo, scenario=scenario, providers=providers, seed=seed,
        total_utility=utility, provider_fairness=utility / 10, customer_fairness=0.01 * seed,
        total_distance=100.0 * providers,
    )


class TestExperimentSpec:
    """Test matrix validation and cell order"""

    def test_cells_in_canonical_order(self, tiny_config):
        spec = ExperimentSpec(algorithms=["nearest", "ga"], provider_counts=[30, 20], seeds=[1, 0],
                              config=tiny_config)
        assert spec.cells() == [
            Cell("nearest", 30, 1), Cell("nearest", 30, 0), Cell("nearest", 20, 1), Cell("nearest", 20, 0),
            Cell("ga", 30, 1), Cell("ga", 30, 0), Cell("ga", 20, 1), Cell("ga", 20, 0),
        ]

    def test_defaults(self):
        spec = ExperimentSpec(algorithms=["greedy"])
        assert spec.provider_counts == [20, 30, 50]
        assert spec.seeds == [0, 1, 2]
        assert len(spec.cells()) == 9

    def test_ablation_matrix_size(self):
        spec = ExperimentSpec(algorithms=list(ABLATION_VARIANTS), seeds=[0])
        assert len(spec.cells()) == 18

    @pytest.mark.parametrize("kwargs,message", [
        ({"algorithms": []}, "algorithm"),
        ({"algorithms": ["ga"], "seeds": [1, 1]}, "distinct"),
        ({"algorithms": ["ga"], "seeds": []}, "seed"),
        ({"algorithms": ["ga"], "provider_counts": [0]}, "positive"),
        ({"algorithms": ["ga"], "graph_dir": "graph"}, "together"),
    ])
    def test_invalid(self, kwargs, message):
        with pytest.raises(ConfigurationError, match=message):
            ExperimentSpec(**kwargs)

    def test_with_seed_reaches_every_section(self, tiny_config):
        seeded = with_seed(tiny_config, 9)
        assert (seeded.ga.seed, seeded.scenario.seed, seeded.synthetic.seed) == (9, 9, 9)
        assert seeded.ga.population_size == 6
        assert tiny_config.ga.seed == 0

    def test_cell_names(self):
        cell = Cell("2fairga", 20, 3)
        assert cell.label == "2fairga providers=20 seed=3"
        assert cell.slug == "2fairga_p20_s3"


class TestExperimentRunner:
    """Test running cells sequentially and in a pool"""

    def test_sequential_run(self, tmp_path, tiny_config):
        spec = ExperimentSpec(algorithms=["nearest", "ga"], provider_counts=[2], seeds=[0, 1],
                              config=tiny_config, out_dir=str(tmp_path))
        seen = []
        runner = ExperimentRunner(spec)
        outcomes = runner.run(lambda outcome, index, total: seen.append((index, total)))

        assert all(outcome.ok for outcome in outcomes)
        assert [outcome.cell for outcome in outcomes] == spec.cells()
        assert seen == [(1, 4), (2, 4), (3, 4), (4, 4)]
        assert all(outcome.row.total_utility >= 0 for outcome in outcomes)
        assert len(list((tmp_path / "reports").glob("non_compliance_*.json"))) == 4

        path = runner.write_results(outcomes)
        assert [(row.algo, row.seed) for row in read_results(path)] == [
            ("ga", 0), ("ga", 1), ("nearest", 0), ("nearest", 1),
        ]

    def test_runs_are_deterministic(self, tiny_config):
        spec = ExperimentSpec(algorithms=["2fairga"], provider_counts=[3], seeds=[4], config=tiny_config)
        first = ExperimentRunner(spec).run()
        second = ExperimentRunner(spec).run()
        assert first[0].row == second[0].row

    def test_pool_matches_sequential(self, tiny_config):
        spec = ExperimentSpec(algorithms=["greedy", "nearest"], provider_counts=[2], seeds=[0, 1],
                              config=tiny_config)
        sequential = [outcome.row for outcome in ExperimentRunner(spec).run()]
        pooled = [outcome.row for outcome in ExperimentRunner(spec, jobs=2).run()]
        assert pooled == sequential

    def test_failed_cell_is_recorded(self, tiny_config):
        config = GlobalConfig.from_args(tiny_config, placement="fixed", start_node=9999)
        spec = ExperimentSpec(algorithms=["nearest"], provider_counts=[2], seeds=[0], config=config)
        outcomes = ExperimentRunner(spec).run()

        assert not outcomes[0].ok
        assert "9999" in outcomes[0].error
        messages = failure_messages(outcomes)
        assert len(messages) == 1
        assert messages[0].startswith("nearest providers=2 seed=0: ")

    def test_run_cell_never_raises(self, tiny_config):
        spec = ExperimentSpec(algorithms=["nearest"], provider_counts=[2], seeds=[0], config=tiny_config,
                              graph_dir="missing-graph", events_path="missing.csv")
        outcome = run_cell((spec, Cell("nearest", 2, 0)))
        assert not outcome.ok
        assert outcome.row is None

    def test_no_results_file_without_out_dir(self, tiny_config):
        spec = ExperimentSpec(algorithms=["nearest"], provider_counts=[2], seeds=[0], config=tiny_config)
        runner = ExperimentRunner(spec)
        assert runner.write_results(runner.run()) is None

    def test_jobs_must_be_positive(self, tiny_config):
        spec = ExperimentSpec(algorithms=["nearest"], config=tiny_config)
        with pytest.raises(ConfigurationError):
            ExperimentRunner(spec, jobs=0)


class TestSummaries:
    """Test per-cell means and rendered reports"""

    def test_means_over_seeds(self):
        rows = [result_row("ga", 20, 0, 10.0), result_row("ga", 20, 1, 20.0), result_row("ga", 30, 0, 5.0)]
        cells = summarize(rows)

        assert [(c.algo, c.providers, c.runs) for c in cells] == [("ga", 20, 2), ("ga", 30, 1)]
        assert cells[0].total_utility == pytest.approx(15.0)
        assert cells[0].provider_fairness == pytest.approx(1.5)
        assert cells[0].customer_fairness == pytest.approx(0.005)
        assert cells[0].total_distance == pytest.approx(2000.0)

    def test_ablation_cells(self):
        rows = [
            result_row(algo, providers, seed, float(seed))
            for algo in ABLATION_VARIANTS for providers in (20, 30, 50) for seed in (0, 1, 2)
        ]
        cells = summarize(rows)
        assert len(cells) == 18
        assert all(cell.runs == 3 and cell.total_utility == pytest.approx(1.0) for cell in cells)

    def test_scenarios_stay_apart(self):
        rows = [result_row("ga", 20, 0, 1.0), result_row("ga", 20, 0, 3.0, scenario="ride_hailing")]
        assert [(c.scenario, c.total_utility) for c in summarize(rows)] == [
            ("non_compliance", 1.0), ("ride_hailing", 3.0),
        ]

    def test_console_report(self):
        rows = [result_row("nearest", 20, 0, 1234.5), result_row("2fairga", 20, 0, 2.0)]
        reporter = ExperimentReporter(algorithm_order=["2fairga", "nearest"])
        report = reporter.generate_report(rows, ReportFormat.CONSOLE, failures=["ga providers=20 seed=0: boom"])

        assert "Scenario: non_compliance" in report
        assert "Total utility" in report
        assert "1,234.50" in report
        assert report.index("2fairga") < report.index("nearest")
        assert "Failed cells (1):" in report

    def test_empty_console_report(self):
        assert "No successful runs." in ExperimentReporter().generate_report([])

    def test_markdown_report(self):
        rows = [result_row("ga", 20, 0, 1.0), result_row("ga", 30, 0, 2.0), result_row("greedy", 20, 0, 3.0)]
        report = ExperimentReporter().generate_report(rows, ReportFormat.MARKDOWN)
        assert "| Algorithm | 20 providers | 30 providers |" in report
        assert "| greedy | 3.00 | - |" in report

    def test_csv_and_json_reports(self):
        rows = [result_row("ga", 20, 0, 0.1), result_row("ga", 20, 1, 0.2)]
        reporter = ExperimentReporter()

        lines = reporter.generate_report(rows, ReportFormat.CSV).splitlines()
        assert lines[0] == "scenario,algo,providers,runs,provider_fairness,customer_fairness,total_utility,total_distance"
        assert lines[1].startswith("non_compliance,ga,20,2,")

        document = json.loads(reporter.generate_report(rows, ReportFormat.JSON, failures=["x"]))
        assert document["total_cells"] == 1
        assert document["failures"] == ["x"]
        assert document["cells"][0]["total_utility"] == pytest.approx(0.15)

    def test_save_summaries(self, tmp_path):
        written = ExperimentReporter().save_summaries([result_row("ga", 20, 0, 1.0)], str(tmp_path / "out"))
        assert sorted(p.rsplit("/", 1)[-1] for p in written) == ["summary.csv", "summary.json", "summary.md"]
        assert all((tmp_path / "out" / name).read_text(encoding='utf-8').endswith("\n")
                   for name in ("summary.csv", "summary.json", "summary.md"))
