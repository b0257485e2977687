"""Command line interface.

Subcommands::

    vekuabvp solve --config run.yaml --out results/
    vekuabvp verify --config run.yaml
    vekuabvp presets list
    vekuabvp presets dump corollary5 > run.yaml
    vekuabvp demo nonuniqueness --config demo.yaml

Exit codes: 0 success, 2 configuration error, 3 solver non-convergence,
4 verification failure, 1 anything else.
"""
from __future__ import annotations

import json
import logging
import sys

import click
import yaml

from .harness import (EXIT_CONFIG, EXIT_ERROR, EXIT_OK, EXIT_VERIFY, ConfigError, RunConfig,
                      load_config, nonuniqueness_demo, preset, preset_names, run_pipeline)
from .harness.presets import DESCRIPTIONS

log = logging.getLogger("vekuabvp")


def _load(config_path, preset_name, overrides) -> RunConfig:
    if (config_path is None) == (preset_name is None):
        raise ConfigError("give exactly one of --config or --preset")
    cfg = load_config(config_path) if config_path else preset(preset_name)
    updates = {}
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"override must look like key=value: {item!r}")
        updates[key.strip()] = yaml.safe_load(raw)
    return cfg.with_updates(updates) if updates else cfg


def _summary(report: dict) -> str:
    lines = [f"status: {report.get('status')}"]
    err = report.get("error")
    if err:
        lines.append(f"error: {err['type']}: {err['message']}")
    checks = report.get("verification", {}).get("checks", {})
    for name, c in checks.items():
        mark = "PASS" if c["passed"] else "FAIL"
        lines.append(f"{mark} {name}: {_short(c['value'])} (required {_short(c['tolerance'])})")
    return "\n".join(lines)


def _short(x) -> str:
    return f"{x:.3e}" if isinstance(x, float) else str(x)


def _exit_code(result) -> int:
    if result.exit_code != EXIT_OK:
        return result.exit_code
    if not result.report["verification"]["passed"]:
        return EXIT_VERIFY
    return EXIT_OK


_config_options = [
    click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                 help="YAML run configuration."),
    click.option("--preset", "preset_name", default=None, help="Named preset instead of a file."),
    click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
                 help="Override a dotted config key, e.g. --set grid.n_r=64."),
]


def config_options(f):
    for opt in reversed(_config_options):
        f = opt(f)
    return f


@click.group()
@click.option("-v", "--verbose", count=True, help="Increase logging (repeatable).")
def main(verbose):
    """Solve and verify Hilbert and Poincare boundary problems on the disk."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _run(config_path, preset_name, overrides, out_dir):
    try:
        cfg = _load(config_path, preset_name, overrides)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    result = run_pipeline(cfg, out_dir)
    click.echo(_summary(result.report))
    sys.exit(_exit_code(result))


@main.command()
@config_options
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True,
              help="Directory for report.json, fields.csv and boundary.csv.")
def solve(config_path, preset_name, overrides, out_dir):
    """Solve a configured problem and write the artifacts."""
    _run(config_path, preset_name, overrides, out_dir)


@main.command()
@config_options
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Optionally also write the artifacts.")
def verify(config_path, preset_name, overrides, out_dir):
    """Solve and run the verification suite; exit 4 if any check fails."""
    _run(config_path, preset_name, overrides, out_dir)


@main.group()
def presets():
    """Inspect the named presets."""


@presets.command("list")
def presets_list():
    """List preset names with a one-line description."""
    for name in preset_names():
        click.echo(f"{name:18s} {DESCRIPTIONS.get(name, '')}")


@presets.command("dump")
@click.argument("name")
def presets_dump(name):
    """Print a preset as a YAML config."""
    try:
        click.echo(preset(name).to_yaml(), nl=False)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)


@main.group()
def demo():
    """Demonstrations."""


@demo.command("nonuniqueness")
@config_options
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Optionally write nonuniqueness.json.")
def demo_nonuniqueness(config_path, preset_name, overrides, out_dir):
    """Compare Hilbert solutions with and without a Cantor singular part."""
    try:
        cfg = _load(config_path, preset_name, overrides)
        report = nonuniqueness_demo(cfg, out_dir)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except (ValueError, ArithmeticError) as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(EXIT_ERROR)
    keys = ("interior_sup_difference", "median_residual_without_singular",
            "median_residual_with_singular", "probes_off_ladder", "passed")
    click.echo(json.dumps({k: report[k] for k in keys}, indent=2))
    sys.exit(EXIT_OK if report["passed"] else EXIT_VERIFY)


if __name__ == "__main__":  # pragma: no cover
    main()
