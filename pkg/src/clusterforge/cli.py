"""Command-line interface: optimize, evaluate, oracle, report.

Exit codes: 0 success, 1 usage or input error, 2 oracle failure.
"""

from __future__ import annotations

import json
import logging
import sys
from collections import defaultdict
from pathlib import Path

import click
import numpy as np

from . import report as rpt
from .config import ConfigError, load_config
from .interferometer import matrix_from_json, matrix_to_json, singular_value_ratio
from .objectives import evaluate_matrix
from .optimizer import multi_start, read_jsonl, sort_records
from .oracle import run_oracles

EXIT_USAGE = 1
EXIT_FAILURE = 2


class OracleFailure(click.ClickException):
    exit_code = EXIT_FAILURE


def _config(path):
    try:
        return load_config(path)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from None


def _spec(cfg, name):
    try:
        return cfg.get(name)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from None


config_option = click.option(
    "--config", "config_path", type=click.Path(dir_okay=False),
    help="Campaign YAML (default: bundled Table 1 campaign).",
)
experiment_option = click.option("--experiment", "-e", required=True, help="Experiment name.")


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log optimizer details.")
def cli(verbose):
    """Optimise linear-optical cluster-state generation in the coincidence basis."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(message)s")


@cli.command("list")
@config_option
def list_cmd(config_path):
    """List experiments in the campaign."""
    cfg = _config(config_path)
    for name, spec in cfg.experiments.items():
        click.echo(f"{name:24s} {spec.input:>10s} -> {spec.target:<10s} {spec.mode:11s} cycles={spec.cycles}")


@cli.command()
@config_option
@experiment_option
@click.option("--cycles", type=click.IntRange(min=1), help="Override the cycle count.")
@click.option("--seed", type=int, help="Override the master seed.")
@click.option("--out", type=click.Path(dir_okay=False), help="JSONL output (default: <output_dir>/<experiment>.jsonl).")
@click.option("--quiet", "-q", is_flag=True, help="No per-cycle progress lines.")
def optimize(config_path, experiment, cycles, seed, out, quiet):
    """Run a multi-start campaign, appending one JSON record per cycle."""
    cfg = _config(config_path)
    spec = _spec(cfg, experiment)
    changes = {k: v for k, v in (("cycles", cycles), ("seed", seed)) if v is not None}
    if changes:
        spec = spec.replace(**changes)
    out = Path(out) if out else cfg.output_dir / f"{spec.name}.jsonl"

    def progress(rec):
        if not quiet:
            flag = "ok" if rec.converged else "--"
            click.echo(
                f"[{spec.name}] cycle {rec.cycle:4d}  s={rec.s:.6f}  1-f={1 - rec.f:.1e}  "
                f"{flag}  {rec.wall_time:.1f}s",
                err=True,
            )

    try:
        records = multi_start(spec, out, progress=progress)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from None
    good = [r for r in records if r.converged]
    click.echo(f"{spec.name}: {len(good)}/{len(records)} cycles converged -> {out}")
    if good:
        best = good[-1]
        click.echo(f"best s={best.s:.6f} f={best.f:.9f} (cycle {best.cycle})")
        best_path = out.with_suffix(".best.json")
        data = matrix_to_json(best.matrix(spec.modes))
        data.update(experiment=spec.name, cycle=best.cycle, s=best.s, f=best.f)
        best_path.write_text(json.dumps(data) + "\n")
    else:
        click.echo("no converged cycles")


def _load_matrix(path: Path, spec) -> np.ndarray:
    if path.suffix == ".jsonl":
        good = [r for r in read_jsonl(path) if r.converged]
        if not good:
            raise click.ClickException(f"{path}: no converged records")
        return sort_records(good)[-1].matrix(spec.modes)
    try:
        return matrix_from_json(json.loads(path.read_text()))
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise click.ClickException(f"{path}: not a matrix file ({exc})") from None


@cli.command("evaluate")
@config_option
@experiment_option
@click.option("--matrix", "matrix_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help='Matrix JSON {"n", "re", "im"} or a run JSONL (best converged record).')
def evaluate_cmd(config_path, experiment, matrix_path):
    """Print s, f, gamma and singular-value ratio for a device matrix."""
    spec = _spec(_config(config_path), experiment)
    u = _load_matrix(Path(matrix_path), spec)
    if u.shape != (spec.modes, spec.modes):
        raise click.ClickException(
            f"matrix is {u.shape[0]}x{u.shape[1]} but {spec.name} needs {spec.modes}x{spec.modes}"
        )
    rep = evaluate_matrix(u, spec)
    click.echo(f"experiment {spec.name}: {spec.input} -> {spec.target}")
    click.echo(f"s        = {rep.success:.10f}")
    click.echo(f"f        = {rep.fidelity:.12f}")
    click.echo(f"gamma    = {rep.distance:.6e}")
    click.echo(f"sv_ratio = {singular_value_ratio(u):.10f}")


@cli.command()
def oracle():
    """Run the built-in consistency checks."""
    checks = run_oracles()
    for c in checks:
        click.echo(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
    failed = [c.name for c in checks if not c.passed]
    if failed:
        raise OracleFailure(f"{len(failed)} oracle check(s) failed: {', '.join(failed)}")


@cli.command("report")
@config_option
@click.argument("files", nargs=-1, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(file_okay=False), help="Report directory (default: <output_dir>/report).")
def report_cmd(config_path, files, out):
    """CSV + SVG per experiment and a Table 1 comparison from JSONL run files."""
    if not files:
        raise click.UsageError("no JSONL files given")
    cfg = _config(config_path)
    out = Path(out) if out else cfg.output_dir / "report"
    out.mkdir(parents=True, exist_ok=True)
    grouped = defaultdict(list)
    for f in files:
        try:
            recs = read_jsonl(Path(f))
        except ValueError as exc:
            raise click.ClickException(str(exc)) from None
        for r in recs:
            grouped[r.experiment].append(r)
    if not grouped:
        raise click.ClickException("input files contain no records")
    summaries = []
    for name, recs in grouped.items():
        spec = _spec(cfg, name)
        summary = rpt.summarize(recs, spec, cfg.plateau_tol)
        summaries.append(summary)
        if "csv" in cfg.formats:
            rpt.write_csv(recs, out / f"{name}.csv")
        if "svg" in cfg.formats:
            rpt.svg_scatter(recs, summary, out / f"{name}.svg")
        click.echo(f"{name}: top plateau {summary.annotation()}")
    table = rpt.table_markdown(summaries)
    (out / "table1.md").write_text(table)
    rpt.write_table_csv(summaries, out / "table1.csv")
    click.echo(table, nl=False)
    click.echo(f"written to {out}")


def main(argv=None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="clusterforge", standalone_mode=False)
    except click.exceptions.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    sys.exit(main())
