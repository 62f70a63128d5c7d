"""Command-line interface for FairRoute"""

import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, List, Optional, Sequence

import click

from . import __version__
from .batch.runner import DEFAULT_PROVIDER_COUNTS, ExperimentRunner, ExperimentSpec, failure_messages
from .config import PLACEMENT_MODES, SCENARIOS, GlobalConfig
from .data.loaders import load_graph, load_requests
from .data.synthetic import generate_world
from .data.writers import write_graph, write_requests
from .dispatch import ABLATION_VARIANTS, ALGORITHMS, get_algorithm
from .errors import ConfigurationError, FairRouteError
from .sampling.placement import load_placement, save_placement
from .simulation.simulator import run_simulation
from .statistics.reporter import ExperimentReporter, ReportFormat

COMPARE_DEFAULTS = ("2fairga", "ga", "ga3", "greedy", "nearest")


# Configure logging
def setup_logging(verbose: bool = False, quiet: bool = False) -> None:
    """Set up logging configuration"""
    if quiet:
        level = logging.ERROR
    elif verbose:
        level = logging.DEBUG
    else:
        level = logging.INFO

    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%H:%M:%S'
    )


@contextmanager
def error_handling(quiet: bool) -> Iterator[None]:
    """Map failures to exit codes: 1 for errors, 130 on interrupt"""
    try:
        yield
    except FairRouteError as e:
        if not quiet:
            click.echo(f"\n❌ FairRoute error: {e}", err=True)
        sys.exit(1)
    except KeyboardInterrupt:
        if not quiet:
            click.echo("\n⚠️  Interrupted by user", err=True)
        sys.exit(130)
    except Exception as e:
        logger = logging.getLogger(__name__)
        logger.exception("Unexpected error occurred")
        if not quiet:
            click.echo(f"\n💥 Unexpected error: {e}", err=True)
        sys.exit(1)


def build_config(ctx: click.Context, **overrides) -> GlobalConfig:
    """Configuration file (if any) with command-line values on top"""
    options = ctx.obj
    base = GlobalConfig.from_file(options['config']) if options.get('config') else None
    return GlobalConfig.from_args(base, seed=options.get('seed'), **overrides)


def resolve_out(ctx: click.Context, out: Optional[str], default: str) -> str:
    return out or ctx.obj.get('out') or default


def scenario_options(func):
    """Options shared by every command that runs simulations"""
    options = [
        click.option('--scenario', type=click.Choice(SCENARIOS), help='Application scenario'),
        click.option('--horizon', type=click.IntRange(min=1), help='Simulated minutes'),
        click.option('--placement', type=click.Choice(PLACEMENT_MODES),
                     help='Initial provider placement (default: per algorithm)'),
        click.option('--mean-stay', type=click.FloatRange(min=0.0, min_open=True),
                     help='Mean vehicle stay (minutes) for the capture probability'),
        click.option('--population-size', type=click.IntRange(min=2), help='GA population size'),
        click.option('--max-gen', type=click.IntRange(min=1), help='GA generations per epoch'),
        click.option('--cold-start', is_flag=True,
                     help='Restart the GA population at every epoch'),
        click.option('--graph', 'graph_dir', type=click.Path(exists=True, file_okay=False),
                     help='Directory with nodes.csv and edges.csv (default: synthetic world)'),
        click.option('--events', 'events_path', type=click.Path(exists=True, dir_okay=False),
                     help='Request CSV (parking or taxi schema)'),
        click.option('--history', 'history_path', type=click.Path(exists=True, dir_okay=False),
                     help='Demand history CSV for clustered placement'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def scenario_overrides(**kwargs) -> dict:
    """Keyword arguments understood by GlobalConfig.from_args"""
    keys = ('scenario', 'horizon', 'placement', 'mean_stay', 'population_size', 'max_gen', 'cold_start')
    overrides = {key: kwargs.get(key) for key in keys}
    # an absent flag must not override a configuration file
    overrides['cold_start'] = overrides['cold_start'] or None
    return overrides


def load_world(config: GlobalConfig, graph_dir: Optional[str], events_path: Optional[str], history_path: Optional[str]):
    """(graph, events, history) from files, or a synthetic world"""
    scenario = config.scenario
    if graph_dir is None and events_path is None:
        return generate_world(config.synthetic, scenario.scenario, scenario.speed_m_per_min)
    if graph_dir is None or events_path is None:
        raise ConfigurationError("--graph and --events must be given together")

    graph = load_graph(graph_dir, scenario.speed_m_per_min)
    events = load_requests(events_path, graph, scenario.scenario)
    history = load_requests(history_path, graph, scenario.scenario) if history_path else None
    return graph, events, history


@click.group()
@click.option('--seed', type=int, help='Seed for generation, placement and the GA')
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False),
              help='JSON configuration file (flags override it)')
@click.option('--out', type=click.Path(), help='Output path (file for simulate, directory otherwise)')
@click.option('--verbose', is_flag=True, help='Enable verbose output')
@click.option('--quiet', is_flag=True, help='Suppress all output except errors')
@click.version_option(version=__version__, prog_name="FairRoute")
@click.pass_context
def main(
    ctx: click.Context,
    seed: Optional[int],
    config_path: Optional[str],
    out: Optional[str],
    verbose: bool,
    quiet: bool
) -> None:
    """FairRoute - two-sided fair dynamic vehicle routing.

    Generates synthetic worlds, simulates one dispatch algorithm over a
    horizon, and runs comparison and ablation matrices.

    Examples:

        # Synthetic lattice, violation stream and demand history
        fairroute --out data generate --bays 400

        # One run, report as JSON
        fairroute simulate --algo 2fairga --providers 20 --graph data/graph --events data/events.csv --out report.json

        # Baselines over 20/30/50 providers and 3 seeds, 4 processes
        fairroute --out results compare --jobs 4

        # Fairness ablation matrix
        fairroute --out ablation ablate --max-gen 100
    """
    ctx.ensure_object(dict)
    ctx.obj.update(seed=seed, config=config_path, out=out, verbose=verbose, quiet=quiet)
    setup_logging(verbose, quiet)


@main.command()
@click.option('--scenario', type=click.Choice(SCENARIOS), help='Which request schema to generate')
@click.option('--bays', type=click.IntRange(min=1), help='Bays (or pickup zones for ride-hailing)')
@click.option('--extent-m', type=click.FloatRange(min=0.0, min_open=True), help='Lattice side length in meters')
@click.option('--spacing-m', type=click.FloatRange(min=0.0, min_open=True), help='Lattice edge length in meters')
@click.option('--poisson-rate', type=click.FloatRange(min=0.0, min_open=True), help='Arrivals per bay per hour')
@click.option('--exp-mean-stay', type=click.FloatRange(min=0.0, min_open=True), help='Mean stay in minutes')
@click.option('--horizon', type=click.IntRange(min=1), help='Generated minutes')
@click.option('--seed', 'local_seed', type=int, help='Overrides the global --seed')
@click.option('--out', 'local_out', type=click.Path(file_okay=False), help='Output directory')
@click.pass_context
def generate(ctx: click.Context, local_seed: Optional[int], local_out: Optional[str], **params) -> None:
    """Write a synthetic graph, request stream and demand history."""
    quiet = ctx.obj['quiet']
    with error_handling(quiet):
        config = build_config(ctx, **params)
        if local_seed is not None:
            config = GlobalConfig.from_args(config, seed=local_seed)
        out_dir = Path(resolve_out(ctx, local_out, "fairroute-data"))
        scenario = config.scenario.scenario

        if not quiet:
            click.echo("🗺️  FairRoute - Synthetic World Generation")
            click.echo("=" * 50)

        graph, events, history = generate_world(config.synthetic, scenario, config.scenario.speed_m_per_min)
        write_graph(graph, out_dir / "graph")
        write_requests(events, graph, out_dir / "events.csv", scenario)
        write_requests(history, graph, out_dir / "history.csv", scenario)

        if not quiet:
            click.echo(f"📍 Graph: {graph.node_count} nodes -> {out_dir / 'graph'}")
            click.echo(f"📄 Events: {len(events)} requests -> {out_dir / 'events.csv'}")
            click.echo(f"📄 History: {len(history)} requests -> {out_dir / 'history.csv'}")
            click.echo("\n✅ Generation complete!")


@main.command()
@click.option('--algo', type=click.Choice(ALGORITHMS), default="2fairga", show_default=True,
              help='Dispatch algorithm')
@click.option('--providers', type=click.IntRange(min=1), help='Number of service providers')
@scenario_options
@click.option('--placement-file', type=click.Path(exists=True, dir_okay=False),
              help='Placement JSON (provider_id -> node_id) overriding --placement')
@click.option('--save-placement', 'placement_out', type=click.Path(dir_okay=False), help='Write the initial placement JSON')
@click.option('--trace', 'trace_path', type=click.Path(dir_okay=False),
              help='Per-minute (minute, provider, node, cumulative_utility) CSV')
@click.option('--ga-trace', type=click.Path(dir_okay=False), help='Per-generation GA fitness CSV')
@click.option('--seed', 'local_seed', type=int, help='Overrides the global --seed')
@click.option('--out', 'local_out', type=click.Path(dir_okay=False), help='Metrics report JSON')
@click.pass_context
def simulate(
    ctx: click.Context,
    algo: str,
    providers: Optional[int],
    graph_dir: Optional[str],
    events_path: Optional[str],
    history_path: Optional[str],
    placement_file: Optional[str],
    placement_out: Optional[str],
    trace_path: Optional[str],
    ga_trace: Optional[str],
    local_seed: Optional[int],
    local_out: Optional[str],
    **kwargs
) -> None:
    """Run one algorithm over the horizon and report its metrics."""
    quiet = ctx.obj['quiet']
    with error_handling(quiet):
        config = build_config(ctx, providers=providers, trace_path=ga_trace, **scenario_overrides(**kwargs))
        if local_seed is not None:
            config = GlobalConfig.from_args(config, seed=local_seed)
        out = local_out or ctx.obj.get('out')

        if not quiet:
            click.echo("🚓 FairRoute - Simulation")
            click.echo("=" * 50)
            click.echo(f"Algorithm: {algo}  Scenario: {config.scenario.scenario}  "
                       f"Providers: {config.scenario.providers}  Seed: {config.scenario.seed}")

        graph, events, history = load_world(config, graph_dir, events_path, history_path)
        algorithm = get_algorithm(algo, config.ga, cold_start=config.scenario.cold_start)
        placement = load_placement(placement_file) if placement_file else None

        result = run_simulation(
            config.scenario, algorithm, events, graph,
            placement=placement, history=history, record_trace=bool(trace_path),
        )

        if out:
            result.report.save(out)
        if trace_path:
            result.save_trace(trace_path)
        if placement_out:
            save_placement(result.placement, placement_out)

        if not quiet:
            click.echo(f"\n{result.report}")
            if out:
                click.echo(f"\n💾 Report saved to {out}")
            click.echo("\n✅ Simulation complete!")


def run_experiment(
    ctx: click.Context,
    title: str,
    algorithms: Sequence[str],
    provider_counts: Sequence[int],
    seeds: int,
    jobs: int,
    report_format: str,
    local_out: Optional[str],
    graph_dir: Optional[str],
    events_path: Optional[str],
    history_path: Optional[str],
    ga_trace: bool,
    kwargs: dict
) -> None:
    """Shared body of compare and ablate"""
    quiet = ctx.obj['quiet']
    failed = False
    with error_handling(quiet):
        config = build_config(ctx, **scenario_overrides(**kwargs))
        out_dir = resolve_out(ctx, local_out, "fairroute-results")
        if ga_trace:
            config = GlobalConfig.from_args(config, trace_path=str(Path(out_dir) / "traces"))
        first_seed = ctx.obj.get('seed') or 0

        spec = ExperimentSpec(
            algorithms=list(algorithms),
            provider_counts=list(provider_counts) or list(DEFAULT_PROVIDER_COUNTS),
            seeds=list(range(first_seed, first_seed + seeds)),
            config=config,
            out_dir=out_dir,
            graph_dir=graph_dir,
            events_path=events_path,
            history_path=history_path,
        )

        if not quiet:
            click.echo(f"📊 FairRoute - {title}")
            click.echo("=" * 50)
            click.echo(f"{len(spec.cells())} cells: {len(spec.algorithms)} algorithm(s) x "
                       f"{len(spec.provider_counts)} provider count(s) x {len(spec.seeds)} seed(s)")

        def progress(outcome, index, total):
            if not quiet:
                mark = "✓" if outcome.ok else "✗"
                click.echo(f"[{index}/{total}] {mark} {outcome.cell.label}")

        runner = ExperimentRunner(spec, jobs=jobs)
        reporter = ExperimentReporter(algorithm_order=spec.algorithms)
        reporter.start_session()
        outcomes = runner.run(progress)
        reporter.end_session()

        rows = [outcome.row for outcome in outcomes if outcome.ok]
        failures = failure_messages(outcomes)
        results_path = runner.write_results(outcomes)
        written = reporter.save_summaries(rows, out_dir, failures)

        if not quiet:
            click.echo("\n" + reporter.generate_report(rows, ReportFormat(report_format), failures))
            click.echo(f"\n💾 Results appended to {results_path}")
            for path in written:
                click.echo(f"💾 Summary saved to {path}")

        failed = bool(failures)
        if failed and not quiet:
            click.echo(f"\n❌ {len(failures)} cell(s) failed", err=True)
        elif not quiet:
            click.echo("\n✅ All cells complete!")

    if failed:
        sys.exit(1)


def experiment_options(func):
    options = [
        click.option('--providers', 'provider_counts', type=click.IntRange(min=1), multiple=True,
                     help='Provider count (repeatable; default 20, 30, 50)'),
        click.option('--seeds', type=click.IntRange(min=1), default=3, show_default=True,
                     help='Seeds per cell, counting up from --seed'),
        click.option('--jobs', type=click.IntRange(min=1), default=1, show_default=True,
                     help='Cells run in parallel'),
        click.option('--report-format', type=click.Choice([f.value for f in ReportFormat]),
                     default='console', show_default=True, help='Summary shown on screen'),
        click.option('--ga-trace', is_flag=True, help='Write per-generation GA traces under <out>/traces'),
        click.option('--out', 'local_out', type=click.Path(file_okay=False), help='Output directory'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@main.command()
@click.option('--algo', 'algorithms', type=click.Choice(ALGORITHMS), multiple=True,
              help='Algorithm (repeatable; default 2fairga, ga, ga3, greedy, nearest)')
@experiment_options
@scenario_options
@click.pass_context
def compare(
    ctx: click.Context,
    algorithms: List[str],
    provider_counts: List[int],
    seeds: int,
    jobs: int,
    report_format: str,
    ga_trace: bool,
    local_out: Optional[str],
    graph_dir: Optional[str],
    events_path: Optional[str],
    history_path: Optional[str],
    **kwargs
) -> None:
    """Run every (algorithm x provider count x seed) cell and summarize."""
    run_experiment(
        ctx, "Algorithm Comparison", list(algorithms) or list(COMPARE_DEFAULTS), provider_counts, seeds,
        jobs, report_format, local_out, graph_dir, events_path, history_path, ga_trace, kwargs,
    )


@main.command()
@experiment_options
@scenario_options
@click.pass_context
def ablate(
    ctx: click.Context,
    provider_counts: List[int],
    seeds: int,
    jobs: int,
    report_format: str,
    ga_trace: bool,
    local_out: Optional[str],
    graph_dir: Optional[str],
    events_path: Optional[str],
    history_path: Optional[str],
    **kwargs
) -> None:
    """Run the fairness ablation variants over the same matrix."""
    run_experiment(
        ctx, "Fairness Ablation", ABLATION_VARIANTS, provider_counts, seeds,
        jobs, report_format, local_out, graph_dir, events_path, history_path, ga_trace, kwargs,
    )


if __name__ == "__main__":
    main()
