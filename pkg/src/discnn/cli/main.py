"""discnn CLI: run studies and solve single instances."""

from __future__ import annotations

import logging
import sys

import click

from discnn.cli.commands.instance import generate_cmd, solve_cmd
from discnn.cli.commands.presets import presets
from discnn.cli.commands.run import run
from discnn.config import RuntimeSettings
from discnn.errors import ConfigError, DiscnnError, OutputPathError, StudyAbortedError

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_OUTPUT = 4
EXIT_ABORTED = 5


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Debug logging")
def cli(verbose: bool) -> None:
    """discnn: a discontinuous neural network for NNLS and box-constrained QPs."""
    level = "DEBUG" if verbose else RuntimeSettings.from_env().log_level
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(name)s %(levelname)s %(message)s",
    )


# Register subcommands
cli.add_command(run)
cli.add_command(presets)
cli.add_command(generate_cmd)
cli.add_command(solve_cmd)


def cli_main(argv: list[str] | None = None) -> int:
    """Run the CLI and map failures to exit codes.

    0 success, 1 unexpected error, 2 usage error, 3 configuration error,
    4 output not writable, 5 study aborted.
    """
    try:
        cli.main(args=argv, prog_name="discnn", standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_FAILURE
    except click.UsageError as e:
        e.show()
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return EXIT_FAILURE
    except ConfigError as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_CONFIG
    except OutputPathError as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_OUTPUT
    except StudyAbortedError as e:
        click.echo(f"Error: study aborted: {e}", err=True)
        return EXIT_ABORTED
    except DiscnnError as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_FAILURE
    return EXIT_OK


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))
