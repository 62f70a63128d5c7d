"""Tests for the command-line interface"""

import json

import pytest
from click.testing import CliRunner

from fairroute import __version__
from fairroute.cli import main
from fairroute.data import RESULT_COLUMNS, read_results

SMALL_WORLD = ['--bays', '5', '--extent-m', '300', '--horizon', '30']


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def config_file(tmp_path):
    """Small synthetic world and a short GA"""
    path = tmp_path / "config.json"
    path.write_text(json.dumps({
        "synthetic": {"bays": 5, "extent_m": 300.0, "horizon": 20},
        "scenario": {"horizon": 20},
        "ga": {"population_size": 6, "max_gen": 2},
    }), encoding='utf-8')
    return path


@pytest.fixture
def generated(runner, tmp_path):
    """Directory written by the generate command"""
    out = tmp_path / "data"
    result = runner.invoke(main, ['--quiet', '--seed', '3', 'generate', *SMALL_WORLD, '--out', str(out)])
    assert result.exit_code == 0, result.output
    return out


class TestGenerateCommand:
    """Test synthetic world generation"""

    def test_writes_files(self, runner, tmp_path):
        out = tmp_path / "world"
        result = runner.invoke(main, ['--out', str(out), 'generate', *SMALL_WORLD])

        assert result.exit_code == 0, result.output
        assert "Generation complete" in result.output
        for name in ("graph/nodes.csv", "graph/edges.csv", "events.csv", "history.csv"):
            assert (out / name).is_file()
        assert (out / "graph" / "nodes.csv").read_text(encoding='utf-8').count("\n") == 17

    def test_fixed_seed_is_byte_identical(self, runner, tmp_path):
        for name in ("a", "b"):
            result = runner.invoke(main, ['--quiet', '--seed', '11', 'generate', *SMALL_WORLD,
                                          '--out', str(tmp_path / name)])
            assert result.exit_code == 0
        for name in ("events.csv", "history.csv", "graph/edges.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_ride_hailing_schema(self, runner, tmp_path):
        result = runner.invoke(main, ['--quiet', 'generate', '--scenario', 'ride_hailing', *SMALL_WORLD,
                                      '--out', str(tmp_path)])
        assert result.exit_code == 0
        header = (tmp_path / "events.csv").read_text(encoding='utf-8').splitlines()[0]
        assert header == "request_time,pickup_lat,pickup_lon,dropoff_lat,dropoff_lon"


class TestSimulateCommand:
    """Test single runs from generated files"""

    def test_report_and_trace(self, runner, generated, tmp_path):
        report = tmp_path / "report.json"
        trace = tmp_path / "trace.csv"
        result = runner.invoke(main, [
            'simulate', '--algo', 'nearest', '--providers', '2', '--horizon', '30',
            '--graph', str(generated / "graph"), '--events', str(generated / "events.csv"),
            '--trace', str(trace), '--out', str(report),
        ])

        assert result.exit_code == 0, result.output
        assert "Simulation complete" in result.output
        document = json.loads(report.read_text(encoding='utf-8'))
        assert document["total_utility"] >= 0
        assert set(document["per_provider"]) == {"0", "1"}
        assert trace.read_text(encoding='utf-8').count("\n") == 1 + 31 * 2

    def test_saved_placement_reproduces_run(self, runner, generated, tmp_path):
        files = ['--graph', str(generated / "graph"), '--events', str(generated / "events.csv"),
                 '--history', str(generated / "history.csv")]
        common = ['simulate', '--algo', '2fairga', '--providers', '3', '--horizon', '20',
                  '--population-size', '6', '--max-gen', '2', *files]

        first = runner.invoke(main, ['--quiet', '--seed', '2', *common, '--save-placement',
                                     str(tmp_path / "placement.json"), '--out', str(tmp_path / "a.json")])
        assert first.exit_code == 0, first.output
        second = runner.invoke(main, ['--quiet', '--seed', '2', *common, '--placement-file',
                                      str(tmp_path / "placement.json"), '--out', str(tmp_path / "b.json")])
        assert second.exit_code == 0, second.output

        assert (tmp_path / "a.json").read_text(encoding='utf-8') == (tmp_path / "b.json").read_text(encoding='utf-8')

    def test_graph_without_events(self, runner, generated):
        result = runner.invoke(main, ['simulate', '--graph', str(generated / "graph")])
        assert result.exit_code == 1
        assert "--graph and --events" in result.output

    def test_unknown_config_key(self, runner, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"ga": {"populaton_size": 5}}), encoding='utf-8')
        result = runner.invoke(main, ['--config', str(path), 'simulate'])
        assert result.exit_code == 1
        assert "populaton_size" in result.output

    def test_quiet_failure_prints_nothing(self, runner, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("[1, 2]", encoding='utf-8')
        result = runner.invoke(main, ['--quiet', '--config', str(path), 'simulate'])
        assert result.exit_code == 1
        assert result.output == ""


class TestExperimentCommands:
    """Test compare and ablate matrices"""

    def test_compare_single_cell(self, runner, config_file, tmp_path):
        out = tmp_path / "results"
        result = runner.invoke(main, [
            '--config', str(config_file), '--seed', '5', 'compare',
            '--algo', 'greedy', '--providers', '2', '--seeds', '1', '--out', str(out),
        ])

        assert result.exit_code == 0, result.output
        lines = (out / "results.csv").read_text(encoding='utf-8').splitlines()
        assert lines[0] == ",".join(RESULT_COLUMNS)
        assert len(lines) == 2
        row = read_results(out / "results.csv")[0]
        assert (row.algo, row.providers, row.seed) == ("greedy", 2, 5)
        for name in ("summary.md", "summary.csv", "summary.json"):
            assert (out / name).is_file()

    def test_compare_appends(self, runner, config_file, tmp_path):
        args = ['--quiet', '--config', str(config_file), 'compare', '--algo', 'nearest',
                '--providers', '2', '--seeds', '2', '--out', str(tmp_path)]
        assert runner.invoke(main, args).exit_code == 0
        assert runner.invoke(main, args).exit_code == 0
        assert len(read_results(tmp_path / "results.csv")) == 4

    def test_failed_cell_exit_code(self, runner, tmp_path):
        path = tmp_path / "fixed.json"
        path.write_text(json.dumps({
            "synthetic": {"bays": 5, "extent_m": 300.0, "horizon": 20},
            "scenario": {"horizon": 20, "placement": "fixed", "start_node": 9999},
        }), encoding='utf-8')
        result = runner.invoke(main, ['--config', str(path), 'compare', '--algo', 'nearest',
                                      '--providers', '2', '--seeds', '1', '--out', str(tmp_path / "out")])
        assert result.exit_code == 1
        assert "1 cell(s) failed" in result.output

    def test_ablate_json_summary(self, runner, config_file, tmp_path):
        result = runner.invoke(main, [
            '--config', str(config_file), 'ablate', '--providers', '2', '--seeds', '1',
            '--report-format', 'json', '--out', str(tmp_path),
        ])
        assert result.exit_code == 0, result.output
        summary = json.loads((tmp_path / "summary.json").read_text(encoding='utf-8'))
        assert summary["total_cells"] == 6
        assert len(read_results(tmp_path / "results.csv")) == 6


class TestGlobalOptions:
    """Test options shared by every command"""

    def test_version(self, runner):
        result = runner.invoke(main, ['--version'])
        assert result.exit_code == 0
        assert __version__ in result.output

    def test_help_lists_commands(self, runner):
        result = runner.invoke(main, ['--help'])
        assert result.exit_code == 0
        for command in ("generate", "simulate", "compare", "ablate"):
            assert command in result.output

    def test_unknown_algorithm(self, runner):
        result = runner.invoke(main, ['simulate', '--algo', 'tabu'])
        assert result.exit_code == 2
