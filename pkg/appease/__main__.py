from pathlib import Path
from typing import List, Optional

import click
from more_itertools import unique_everseen

from appease import __version__
from appease.acceptance import Suite
from appease.analytics import report
from appease.errors import ScenarioValidationError
from appease.experiments import FORMATS, SWEEP_HOGS, RunConfig, run_experiment, sweep
from appease.schedulers import POLICIES
from appease.sim.scenario import validate_file
from appease.utils import savefile, script_helper

EXIT_VALIDATION = 1
EXIT_ACCEPTANCE = 2
EXIT_IO = 3


def parse_hogs(value: str) -> List[int]:
    """
    Reads hog counts written as `0..12`, `1,2,4` or a mix of both.
    """
    counts = []
    for part in value.split(','):
        part = part.strip()
        if not part:
            continue
        try:
            if '..' in part:
                low, high = (int(bound) for bound in part.split('..', 1))
                counts.extend(range(low, high + 1))
            else:
                counts.append(int(part))
        except ValueError:
            raise click.BadParameter(f"expected hog counts like 0..12 or 1,2,4, got {value!r}")
    if not counts or min(counts) < 0:
        raise click.BadParameter(f"expected non-negative hog counts, got {value!r}")
    return list(unique_everseen(counts))


def parse_formats(value: Optional[str], default) -> tuple:
    formats = tuple(f.strip() for f in value.split(',') if f.strip()) if value else tuple(default)
    unknown = set(formats) - set(FORMATS)
    if unknown:
        raise click.BadParameter(f"unknown format(s) {sorted(unknown)}, choose from {', '.join(FORMATS)}")
    return formats


def _report_diagnostics(path, diagnostics):
    for diagnostic in diagnostics:
        click.echo(f"{path}: {diagnostic}", err=True)


def _run_config(ctx, scenario: str, out: Optional[str], formats: Optional[str], seed: Optional[int], reps: int,
                parallel_runs: int) -> RunConfig:
    cfg = ctx.obj['CONFIG']
    return RunConfig(
        scenario=Path(scenario),
        out=script_helper.output_directory(cfg, out),
        formats=parse_formats(formats, cfg.get('output.formats', default=FORMATS)),
        parallel_runs=parallel_runs,
        seed=seed,
        reps=reps,
        config_path=ctx.obj['CONFIG_PATH'],
    )


def _execute(ctx, action, *args, **kwargs):
    try:
        written = action(*args, **kwargs)
    except ScenarioValidationError as e:
        _report_diagnostics(args[0].scenario, e.diagnostics)
        ctx.exit(EXIT_VALIDATION)
    except OSError as e:
        click.echo(f"i/o error: {e}", err=True)
        ctx.exit(EXIT_IO)
    for path in written:
        click.echo(str(path))


@click.group()
@click.option("--config", metavar="FILE", default=None,
              help="Comma-separated list of YAML files layered over the packaged defaults")
@click.option("-v", "--verbose", count=True, help="More log output, repeat for more")
@click.option("-q", "--quiet", count=True, help="Less log output, repeat for less")
@click.pass_context
def cli(ctx, config: Optional[str], verbose: int, quiet: int):
    ctx.ensure_object(dict)
    ctx.obj["CONFIG_PATH"] = config
    ctx.obj["CONFIG"] = script_helper.load_config(config)
    script_helper.setup_logging(ctx.obj["CONFIG"].get("logging.file", default="appease.log"),
                                verbosity_offset=verbose - quiet)


@cli.command(help="check a scenario file without running it")
@click.argument("scenario", metavar="FILE")
@click.pass_context
def validate(ctx, scenario: str):
    try:
        diagnostics = validate_file(scenario, ctx.obj["CONFIG"])
    except OSError as e:
        click.echo(f"cannot read {scenario}: {e}", err=True)
        ctx.exit(EXIT_IO)
    if diagnostics:
        _report_diagnostics(scenario, diagnostics)
        ctx.exit(EXIT_VALIDATION)
    click.echo(f"{scenario}: ok")


@cli.command(help="run a scenario file and write its metrics, JSON and trace")
@click.argument("scenario", metavar="FILE")
@click.option("--out", metavar="DIR", default=None, help="Output directory (default: $APPEASE_OUT or config)")
@click.option("--format", "formats", metavar="LIST", default=None, help="Comma-separated subset of csv,json,trace")
@click.option("--seed", type=int, default=None, help="Replace the scenario's seed")
@click.option("--reps", type=click.IntRange(min=1), default=1, help="Repetitions, each with the next seed")
@click.option("--parallel-runs", type=click.IntRange(min=1), default=1, help="Simulations to run concurrently")
@click.pass_context
def run(ctx, scenario, out, formats, seed, reps, parallel_runs):
    run_config = _run_config(ctx, scenario, out, formats, seed, reps, parallel_runs)
    _execute(ctx, run_experiment, run_config)


@cli.command("sweep", help="run a scenario file for a range of background hog counts")
@click.argument("scenario", metavar="FILE")
@click.option("--hogs", default=f"{SWEEP_HOGS[0]}..{SWEEP_HOGS[-1]}", show_default=True,
              help="Hog counts, e.g. 0..12 or 0,4,8")
@click.option("--policy", "policies", multiple=True, type=click.Choice(sorted(POLICIES)),
              help="Policy to sweep, repeat for several (default: the scenario's own)")
@click.option("--out", metavar="DIR", default=None, help="Output directory (default: $APPEASE_OUT or config)")
@click.option("--format", "formats", metavar="LIST", default=None, help="Comma-separated subset of csv,json,trace")
@click.option("--seed", type=int, default=None, help="Replace the scenario's seed")
@click.option("--reps", type=click.IntRange(min=1), default=1, help="Repetitions averaged per point")
@click.option("--parallel-runs", type=click.IntRange(min=1), default=1, help="Simulations to run concurrently")
@click.pass_context
def sweep_command(ctx, scenario, hogs, policies, out, formats, seed, reps, parallel_runs):
    run_config = _run_config(ctx, scenario, out, formats, seed, reps, parallel_runs)
    _execute(ctx, sweep, run_config, parse_hogs(hogs), policies)


@cli.command(help="run the built-in acceptance suite")
@click.option("--quick", is_flag=True, help="Use shorter streams for the directional checks")
@click.option("--out", metavar="DIR", default=None, help="Also write the report tables to this directory")
@click.pass_context
def accept(ctx, quick: bool, out: Optional[str]):
    suite = Suite(ctx.obj["CONFIG"], quick=quick)
    results = suite.run()
    for result in results:
        click.echo(f"{'PASS' if result.passed else 'FAIL'} {result.criterion}: {result.summary}")
    if out is not None:
        header = {'version': __version__}
        try:
            savefile.write_table(Path(out) / 'acceptance.csv', [r.row() for r in results],
                                 ('criterion', 'passed', 'summary'), header)
            rows = report(suite.comparisons)
            if rows:
                columns = list(unique_everseen(key for row in rows for key in row))
                savefile.write_table(Path(out) / 'comparisons.csv', rows, columns, header)
        except OSError as e:
            click.echo(f"i/o error: {e}", err=True)
            ctx.exit(EXIT_IO)
    if not all(result.passed for result in results):
        ctx.exit(EXIT_ACCEPTANCE)


if __name__ == "__main__":
    cli()
