"""
Command-line interface for Conjnorm

Conjugation-invariant norms on finite groups, free-word norm bounds,
approximation witness checks and finite-quotient probes.
"""

import sys
from pathlib import Path
from typing import Optional

import click
from pydantic import ValidationError

from .commands import ALL_COMMANDS
from .config import ConjnormConfig, load_config
from .logging_config import setup_logging
from .models import INPUT_ERROR_EXIT

# Global configuration object
config: Optional[ConjnormConfig] = None


@click.group()
@click.option(
    "--config-file",
    type=click.Path(exists=True, path_type=Path),
    help="Path to a YAML settings file",
)
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    default=None,
    help="Set logging level",
)
@click.option("--verbose", "-v", is_flag=True, default=None, help="Enable verbose output")
@click.option(
    "--log-dir",
    type=click.Path(path_type=Path),
    default=None,
    help="Directory for log files",
)
@click.option("--log-to-file", is_flag=True, default=None, help="Also log to a rotating file")
@click.option("--cap-order", type=int, default=None, help="Largest group order to enumerate")
@click.option("--cap-ball", type=int, default=None, help="Largest free-group ball to enumerate")
@click.option("--budget-factors", type=int, default=None, help="Most conjugate factors to search")
@click.option("--budget-conj", type=int, default=None, help="Longest conjugator to search")
@click.option(
    "--budget-relators", type=int, default=None, help="Most relator conjugates in a rewrite"
)
@click.option(
    "--format",
    "output_format",
    type=click.Choice(["text", "records"]),
    default=None,
    help="Report format",
)
@click.option("--seed", type=int, default=None, help="Seed for randomized runs")
@click.option(
    "--strict-chain-depth",
    is_flag=True,
    default=None,
    help="Treat chain-norm zeros at finite depth as inconclusive",
)
@click.version_option(package_name="conjnorm")
@click.pass_context
def cli(
    ctx: click.Context,
    config_file: Optional[Path],
    log_level: Optional[str],
    verbose: Optional[bool],
    log_dir: Optional[Path],
    log_to_file: Optional[bool],
    cap_order: Optional[int],
    cap_ball: Optional[int],
    budget_factors: Optional[int],
    budget_conj: Optional[int],
    budget_relators: Optional[int],
    output_format: Optional[str],
    seed: Optional[int],
    strict_chain_depth: Optional[bool],
) -> None:
    """
    Conjnorm: conjugation-invariant norms and metric approximation witnesses

    Exit status: 0 pass or separated, 1 fail or contained,
    2 inconclusive or exhausted, 3 input errors.
    """
    global config

    overrides = {
        "log_level": log_level.upper() if log_level else None,
        "verbose": verbose,
        "log_dir": str(log_dir) if log_dir else None,
        "log_to_file": log_to_file,
        "max_group_order": cap_order,
        "max_ball_size": cap_ball,
        "max_factors": budget_factors,
        "max_conjugator_length": budget_conj,
        "max_relator_factors": budget_relators,
        "output_format": output_format,
        "seed": seed,
        "strict_chain_depth": strict_chain_depth,
    }
    try:
        config = load_config(
            config_file=str(config_file) if config_file else None,
            cli_overrides={k: v for k, v in overrides.items() if v is not None},
        )
    except (ValidationError, ValueError) as e:
        click.echo(f"❌ Invalid configuration: {e}", err=True)
        sys.exit(INPUT_ERROR_EXIT)

    setup_logging(
        log_dir=config.log_dir,
        verbose=config.verbose,
        log_level=None if config.verbose and not log_level else config.log_level,
        enable_file_logging=config.log_to_file,
    )

    # Store config in context for subcommands
    ctx.ensure_object(dict)
    ctx.obj["config"] = config


@cli.command("config-show")
@click.pass_context
def config_show(ctx: click.Context) -> None:
    """Show the effective configuration."""
    cfg: ConjnormConfig = ctx.obj["config"]
    click.echo("⚙️  Conjnorm configuration")
    click.echo("=" * 40)
    for key, value in cfg.display_items().items():
        click.echo(f"  {key}: {value}")


for command in ALL_COMMANDS:
    cli.add_command(command)


def main() -> None:
    """Main entry point for the CLI."""
    cli(obj={})


if __name__ == "__main__":
    main()
