# ===========================================================================
# File: app/main.py
# ===========================================================================
from functools import wraps
from pathlib import Path
from typing import Callable, Optional
import click
from pydantic import ValidationError

from app.core.config import settings, logger
from app.core.exceptions import EXIT_CONFIG_ERROR, EXIT_OK, EXIT_ROWS_FAILED, ConfigError, TDGError
from app.models.experiment import ExperimentConfig
from app.services.experiment_service import experiment_service
from app.services.solver_service import solver_service
from app.storage import (
    load_config, write_error, write_field, write_matrix, write_mesh, write_results_csv, write_summary,
)
from app.utils.helpers import sample_grid


def handle_errors(command: Callable) -> Callable:
    """Map exceptions raised by a command onto the documented exit codes."""
    @wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ConfigError as exc:
            logger.error(f"Configuration error: {exc.detail}")
            click.echo(str(exc), err=True)
            raise SystemExit(EXIT_CONFIG_ERROR)
        except ValidationError as exc:
            logger.error(f"Validation error: {exc.errors(include_url=False, include_input=False)}")
            click.echo(f"ConfigError: {exc}", err=True)
            raise SystemExit(EXIT_CONFIG_ERROR)
        except TDGError as exc:
            logger.error(f"{type(exc).__name__}: {exc.detail}")
            click.echo(str(exc), err=True)
            raise SystemExit(exc.exit_code)
    return wrapper


def _out_dir(config: ExperimentConfig, out: Optional[str]) -> Path:
    path = Path(out or config.out or "results")
    path.mkdir(parents=True, exist_ok=True)
    return path


@click.group()
@click.option("--log-level", default=None, help="Override LOG_LEVEL for this invocation.")
def cli(log_level: Optional[str]):
    """Trefftz DG solver for truncated acoustic waveguides."""
    if log_level:
        settings.LOG_LEVEL = log_level.upper()
        logger.setLevel(settings.LOG_LEVEL)


@cli.command()
@click.argument("config_file")
@click.option("--out", default=None, help="Output directory (defaults to the config's `out`, then ./results).")
@handle_errors
def run(config_file: str, out: Optional[str]):
    """Run the sweep described by CONFIG_FILE and write results.csv and summary.json."""
    config = load_config(config_file)
    rows = experiment_service.run(config)
    out_dir = _out_dir(config, out)
    write_results_csv(rows, out_dir / "results.csv")
    write_summary(experiment_service.summarize(config, rows), out_dir / "summary.json")
    failed = sum(not row.ok for row in rows)
    click.echo(f"{len(rows)} rows written to {out_dir / 'results.csv'} ({failed} failed)")
    raise SystemExit(EXIT_ROWS_FAILED if failed else EXIT_OK)


@cli.command()
@click.argument("config_file")
@click.option("--out", default=None, help="Output directory.")
@handle_errors
def mesh(config_file: str, out: Optional[str]):
    """Write the mesh of the first (k, h) pair of CONFIG_FILE as mesh.txt."""
    config = load_config(config_file)
    k, h = config.k[0], config.h[0]
    built = experiment_service.build_mesh(config, config.domain_length(k), h)
    path = write_mesh(built, _out_dir(config, out) / "mesh.txt")
    click.echo(
        f"{built.n_triangles} triangles, h={built.h:.6g}, l_max/l_min={built.edge_ratio:.6g} -> {path}"
    )


@cli.command()
@click.argument("config_file")
@click.option("--grid", nargs=2, type=int, default=(101, 51), show_default=True, help="Sampling points NX NY.")
@click.option("--out", default=None, help="Output directory.")
@click.option("--dump-matrix", is_flag=True, help="Also write the system matrix as matrix.txt.")
@handle_errors
def field(config_file: str, grid, out: Optional[str], dump_matrix: bool):
    """Solve the first tuple of CONFIG_FILE and sample the field on a uniform grid."""
    config = load_config(config_file)
    system, solution, reference = experiment_service.solve_first(config)
    out_dir = _out_dir(config, out)
    points = sample_grid(system.mesh.R, system.mesh.H, grid[0], grid[1])
    write_field(points, solver_service.evaluate(solution, points), out_dir / "field.txt")
    if reference is not None:
        write_error(points, solver_service.error_density(solution, reference, points), out_dir / "error.txt")
    if dump_matrix:
        write_matrix(system.matrix, out_dir / "matrix.txt")
    click.echo(f"Field sampled on {grid[0]}x{grid[1]} points -> {out_dir}")


if __name__ == "__main__":
    cli()
