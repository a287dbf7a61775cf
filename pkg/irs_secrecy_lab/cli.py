"""Command-line interface for the IRS secrecy lab."""

from __future__ import annotations

import dataclasses
import functools
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any

import click
from dotenv import load_dotenv
from rich.console import Console
from rich.panel import Panel
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table

from . import __version__
from .agent import AgentFormatError, DivergenceError, H2dsAgent, evaluate
from .ao_solver import ao_solve, write_trace
from .bench import compare_schemes, emit_csv, run_id_for, run_scheme, time_decisions
from .config import ConfigError, RunConfig, generate_sample_config, load_config, save_config
from .environment import SecrecyEnv
from .logging_config import attach_run_log, logger, setup_logging
from .metrics import MetricsRow
from .scenario import (
    ScenarioConfig,
    available_presets,
    load_scenario,
    scenario_fingerprint,
)
from .schemes import SchemeId

console = Console()

EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3


def handle_errors(command: Callable[..., Any]) -> Callable[..., Any]:
    """Map library errors onto the documented exit codes."""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return command(*args, **kwargs)
        except (ConfigError, AgentFormatError) as e:
            console.print(f"[red]Error: {e}[/red]")
            sys.exit(EXIT_CONFIG)
        except DivergenceError as e:
            console.print(f"[red]Error: training diverged: {e}[/red]")
            sys.exit(EXIT_DIVERGENCE)

    return wrapper


def _apply_overrides(
    config: RunConfig,
    seed: int | None = None,
    episodes: int | None = None,
    steps: int | None = None,
    out: Path | None = None,
    scheme: str | None = None,
    scenario: str | None = None,
) -> RunConfig:
    """Copy of ``config`` with the shared command-line flags applied."""
    train = config.train
    if episodes is not None:
        train = dataclasses.replace(train, episodes=episodes)
    if steps is not None:
        train = dataclasses.replace(train, steps_per_episode=steps)
    changes: dict[str, Any] = {"train": train}
    if seed is not None:
        changes["seeds"] = (seed,)
    if out is not None:
        changes["out_dir"] = str(out)
    if scheme:
        changes["schemes"] = tuple(SchemeId.parse(s).value for s in scheme.split(",") if s.strip())
    if scenario:
        changes["scenario"] = scenario
    updated = dataclasses.replace(config, **changes)
    updated.validate()
    return updated


def _resolve(config: RunConfig) -> tuple[ScenarioConfig, Path]:
    scenario = load_scenario(config.scenario, config.scenario_overrides)
    out_dir = Path(config.out_dir)
    save_config(config, out_dir / "run_config.yaml")
    log_path = attach_run_log(out_dir)
    logger.info(f"Run on {scenario.name} ({scenario_fingerprint(scenario)[:8]}), log at {log_path}")
    return scenario, out_dir


def _header(title: str, scenario: ScenarioConfig) -> None:
    console.print(
        Panel.fit(
            f"[bold cyan]{title}[/bold cyan]\n"
            f"Scenario: {scenario.name} ({scenario_fingerprint(scenario)[:8]})",
            border_style="cyan",
        )
    )


def _spinner() -> Progress:
    return Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        console=console,
    )


def shared_options(command: Callable[..., Any]) -> Callable[..., Any]:
    """Flags common to every run command."""
    decorators = [
        click.option("--seed", type=int, help="Seed (replaces the configured seed list)"),
        click.option("--episodes", type=int, help="Training episodes"),
        click.option("--steps", type=int, help="Steps per episode"),
        click.option("--out", type=click.Path(path_type=Path), help="Output directory"),
        click.option("--scenario", "-s", help="Preset name or scenario file"),
    ]
    for decorator in reversed(decorators):
        command = decorator(command)
    return command


@click.group()
@click.option(
    "--config",
    "-c",
    "config_path",
    type=click.Path(exists=True, path_type=Path),
    help="Path to config file",
)
@click.option(
    "--log-level",
    envvar="IRS_LAB_LOG_LEVEL",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    default="INFO",
    help="Package log level",
)
@click.option("--log-file", type=click.Path(dir_okay=False), help="Write the DEBUG log here")
@click.version_option(version=__version__)
@click.pass_context
def cli(ctx: click.Context, config_path: Path | None, log_level: str, log_file: str | None):
    """IRS Secrecy Lab - learned and optimized secure spectrum sharing with multiple IRSs."""
    load_dotenv()
    setup_logging(log_level.upper(), log_file)  # type: ignore[arg-type]
    ctx.ensure_object(dict)
    try:
        ctx.obj["config"] = load_config(config_path)
    except ConfigError as e:
        console.print(f"[red]Error: {e}[/red]")
        sys.exit(EXIT_CONFIG)


@cli.command()
@click.option("--output", "-o", default="irs-secrecy-lab.yaml", help="Output file path")
def init(output: str):
    """Create a sample configuration file."""
    path = Path(output)
    if path.exists() and not click.confirm(f"{output} already exists. Overwrite?"):
        return

    path.write_text(generate_sample_config(), encoding="utf-8")
    console.print(f"[green]✓ Created {output}[/green]")
    console.print("Edit the file, then run: [cyan]irs-secrecy-lab compare[/cyan]")


@cli.command()
@handle_errors
def presets():
    """List the shipped scenario presets."""
    table = Table(title="Scenario Presets")
    table.add_column("Preset", style="cyan")
    table.add_column("IRSs", justify="right")
    table.add_column("Elements", justify="right")
    table.add_column("SUs", justify="right")
    table.add_column("PUs", justify="right")
    table.add_column("Eves", justify="right")
    table.add_column("Subchannels", justify="right")
    table.add_column("Fingerprint")

    for name in available_presets():
        scenario = load_scenario(name)
        table.add_row(
            name,
            str(scenario.n_irs),
            str(scenario.n_elements),
            str(scenario.n_su),
            str(scenario.n_pu),
            str(scenario.n_eve),
            str(scenario.n_subchannels),
            scenario_fingerprint(scenario)[:12],
        )

    console.print(table)


@cli.command()
@shared_options
@click.option("--scheme", default=SchemeId.PROPOSED.value, help="Scheme to run")
@click.option("--save-agent", type=click.Path(path_type=Path), help="Write the trained agent here")
@click.pass_context
@handle_errors
def train(
    ctx: click.Context,
    seed: int | None,
    episodes: int | None,
    steps: int | None,
    out: Path | None,
    scenario: str | None,
    scheme: str,
    save_agent: Path | None,
):
    """Train one scheme on one seed and write its metric rows."""
    config = _apply_overrides(ctx.obj["config"], seed, episodes, steps, out, scheme, scenario)
    scheme_id = SchemeId.parse(config.schemes[0])
    seed = config.seeds[0]
    setting, out_dir = _resolve(config)
    _header(f"Training {scheme_id.value}", setting)

    with _spinner() as progress:
        progress.add_task(f"Running {config.train.episodes} episodes (seed {seed})...", total=None)
        run = run_scheme(scheme_id, setting, seed, config, save_agent)

    path = out_dir / f"{scheme_id.value}_s{seed}.csv"
    emit_csv(run.rows, path)
    console.print(f"[green]✓ {len(run.rows)} rows written to {path}[/green]")
    console.print(f"Final secrecy rate: [bold]{run.final_secrecy:.4f}[/bold] bit/s/Hz")
    if save_agent:
        console.print(f"Agent saved to {save_agent}")


@cli.command("eval")
@shared_options
@click.option(
    "--agent",
    "agent_path",
    required=True,
    type=click.Path(path_type=Path),
    help="Agent file written by train --save-agent",
)
@click.pass_context
@handle_errors
def eval_agent(
    ctx: click.Context,
    seed: int | None,
    episodes: int | None,
    steps: int | None,
    out: Path | None,
    scenario: str | None,
    agent_path: Path,
):
    """Run a saved agent greedily on channel blocks it has not trained on."""
    config = _apply_overrides(ctx.obj["config"], None, None, steps, out, None, scenario)
    setting, out_dir = _resolve(config)
    agent = H2dsAgent.load(agent_path, setting)
    if seed is not None:
        agent.seed = seed
    if steps is not None:
        agent.config = dataclasses.replace(agent.config, steps_per_episode=steps)
    count = episodes if episodes is not None else config.eval_episodes
    scheme = agent.profile.scheme.value
    _header(f"Evaluating {scheme}", setting)

    with _spinner() as progress:
        progress.add_task(f"Running {count} greedy episodes...", total=None)
        result = evaluate(
            agent,
            count,
            config.reward,
            run_id=run_id_for(scheme, agent.seed, setting),
            record_timing=config.record_timing,
        )

    path = out_dir / f"{scheme}_s{agent.seed}_eval.csv"
    emit_csv(result.rows, path)
    mean = sum(r.secrecy_rate for r in result.rows) / max(len(result.rows), 1)
    console.print(f"[green]✓ {len(result.rows)} rows written to {path}[/green]")
    console.print(f"Mean secrecy rate: [bold]{mean:.4f}[/bold] bit/s/Hz")


@cli.command()
@shared_options
@click.option("--episode", type=int, default=0, help="Channel block to solve")
@click.option("--max-iterations", type=int, help="Outer iteration cap")
@click.pass_context
@handle_errors
def ao(
    ctx: click.Context,
    seed: int | None,
    episodes: int | None,
    steps: int | None,
    out: Path | None,
    scenario: str | None,
    episode: int,
    max_iterations: int | None,
):
    """Solve one channel realization with the alternating optimization."""
    config = _apply_overrides(ctx.obj["config"], seed, episodes, steps, out, None, scenario)
    if max_iterations is not None:
        config = dataclasses.replace(
            config, ao=dataclasses.replace(config.ao, max_outer_iterations=max_iterations)
        )
        config.validate()
    seed = config.seeds[0]
    setting, out_dir = _resolve(config)
    _header("Alternating Optimization", setting)

    env = SecrecyEnv(setting, config.reward, seed)
    env.reset(episode)
    with _spinner() as progress:
        progress.add_task("Alternating over power, pairing, reflection and sensing time...", total=None)
        result = ao_solve(setting, env.channels, config.ao)

    trace_path = out_dir / f"ao_s{seed}_e{episode}_trace.csv"
    write_trace(result, trace_path)
    outcome = env.step(result.action)
    row = MetricsRow.from_step(
        outcome.info,
        outcome.reward,
        run_id=run_id_for(SchemeId.AO.value, seed, setting),
        scheme=SchemeId.AO.value,
        seed=seed,
        phase="ao",
        episode=episode,
        step=0,
    )
    metrics_path = out_dir / f"ao_s{seed}_e{episode}.csv"
    emit_csv([row], metrics_path)

    status = "[green]converged[/green]" if result.converged else "[yellow]iteration cap reached[/yellow]"
    console.print(
        f"Secrecy rate: [bold]{result.objective:.4f}[/bold] bit/s/Hz "
        f"after {result.iterations} iterations ({status})"
    )
    if not result.feasible:
        console.print("[yellow]⚠ The returned action violates a sensing or interference constraint[/yellow]")
    console.print(f"[green]✓ Trace written to {trace_path}[/green]")


@cli.command()
@shared_options
@click.option("--scheme", help="Comma-separated scheme ids (default: configured schemes)")
@click.option("--workers", type=int, help="Parallel (scheme, seed) jobs")
@click.pass_context
@handle_errors
def compare(
    ctx: click.Context,
    seed: int | None,
    episodes: int | None,
    steps: int | None,
    out: Path | None,
    scenario: str | None,
    scheme: str | None,
    workers: int | None,
):
    """Run every scheme on every seed and rank them by final secrecy rate."""
    config = _apply_overrides(ctx.obj["config"], seed, episodes, steps, out, scheme, scenario)
    if workers is not None:
        config = dataclasses.replace(config, workers=workers)
        config.validate()
    setting, out_dir = _resolve(config)
    _header("Scheme Comparison", setting)

    jobs = len(config.schemes) * len(config.seeds)
    with _spinner() as progress:
        progress.add_task(f"Running {jobs} jobs on {config.workers} worker(s)...", total=None)
        comparison = compare_schemes(config, setting)

    emit_csv(comparison.rows, out_dir / "metrics.csv")
    comparison.summary.to_csv(out_dir / "summary.csv", index=False, lineterminator="\n")

    table = Table(title="Final Secrecy Rate")
    table.add_column("Rank", justify="right")
    table.add_column("Scheme", style="cyan")
    table.add_column("Seeds", justify="right")
    table.add_column("Mean", justify="right")
    table.add_column("Std", justify="right")
    for record in comparison.summary.itertuples(index=False):
        table.add_row(
            str(record.rank),
            record.scheme,
            str(record.seeds),
            f"{record.mean_secrecy:.4f}",
            f"{record.std_secrecy:.4f}",
        )
    console.print(table)
    console.print(f"[green]✓ Results written to {out_dir}[/green]")


@cli.command("time")
@shared_options
@click.option("--agent", "agent_path", type=click.Path(path_type=Path), help="Saved agent to time")
@click.pass_context
@handle_errors
def time_command(
    ctx: click.Context,
    seed: int | None,
    episodes: int | None,
    steps: int | None,
    out: Path | None,
    scenario: str | None,
    agent_path: Path | None,
):
    """Per-decision latency of the learned policy against the optimization baseline."""
    config = _apply_overrides(ctx.obj["config"], seed, episodes, steps, out, None, scenario)
    setting, out_dir = _resolve(config)
    agent = H2dsAgent.load(agent_path, setting) if agent_path else None
    _header("Decision Timing", setting)

    with _spinner() as progress:
        progress.add_task(f"Timing at AO caps {list(config.timing_caps)}...", total=None)
        frame = time_decisions(config, setting, agent)

    path = out_dir / "timing.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")

    table = Table(title="Decision Latency (ms)")
    table.add_column("Scheme", style="cyan")
    table.add_column("AO cap", justify="right")
    table.add_column("Median", justify="right")
    table.add_column("p95", justify="right")
    for record in frame.itertuples(index=False):
        table.add_row(
            record.scheme,
            str(record.iteration_cap),
            f"{record.median_ms:.3f}",
            f"{record.p95_ms:.3f}",
        )
    console.print(table)
    console.print(f"[green]✓ Timing written to {path}[/green]")


def main():
    """Entry point for the CLI."""
    cli()


if __name__ == "__main__":
    main()
