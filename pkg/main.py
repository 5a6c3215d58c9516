import logging
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from core.elastowave.harness.tools.experiment_tools import (
    CompareSeismogramTool,
    ConvergenceStudyTool,
    OperatorCheckTool,
    RunConfigTool,
    RunPresetTool,
)
from core.elastowave.settings.settings import LOG_LEVEL, OUTPUT_DIR

console = Console()
app = typer.Typer(help="Discontinuous Galerkin elastic wave solver with a stable PML")


@app.callback()
def configure_logging() -> None:
    logging.basicConfig(
        level=LOG_LEVEL,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, rich_tracebacks=True)],
    )


def _finish(result: dict) -> dict:
    """Print a failed tool result and exit: 2 for a diverged run, 1 otherwise"""
    if result.get("success"):
        return result
    console.print(f"[bold red]Error:[/] {result.get('error')}")
    if result.get("diverged"):
        raise typer.Exit(2)
    raise typer.Exit(1)


def _print_summary(result: dict) -> None:
    summary = result["summary"]
    console.print(f"[bold green]Run finished[/] at t={summary['final_time']:.6g} s after {summary['steps']} steps")
    console.print(f"[bold]Final energy:[/] {summary['final_energy']:.6e}")
    console.print(f"[bold]Max |v|:[/] {summary['max_linf']:.6e}")
    if "plane_wave_error" in summary:
        console.print(f"[bold]Plane-wave error:[/] {summary['plane_wave_error']:.6e}")
    console.print(f"[bold]Output:[/] {result['directory']}")


@app.command()
def run(
    config: Path = typer.Argument(..., help="Run configuration file"),
    output_dir: Optional[Path] = typer.Option(None, help=f"Output directory (default under {OUTPUT_DIR})"),
) -> None:
    """Run the simulation described by a configuration file"""
    console.print(f"[bold blue]Running {config}...[/]")
    result = _finish(RunConfigTool(config_path=str(config), output_dir=str(output_dir) if output_dir else None).run())
    _print_summary(result)


@app.command()
def preset(
    name: str = typer.Argument(..., help="strip2d, halfplane2d, hws3d, hhs3d, loh1 or planewave"),
    elements: Optional[int] = typer.Option(None, help="Elements across the preset's reference length"),
    degree: Optional[int] = typer.Option(None, help="Polynomial degree"),
    theta: Optional[int] = typer.Option(None, min=0, max=1, help="Flux fluctuations in the auxiliary equations (0 or 1)"),
    tend: Optional[float] = typer.Option(None, help="Final time in seconds"),
    pml: bool = typer.Option(True, help="--no-pml runs with characteristic absorbing boundaries only"),
    output_dir: Optional[Path] = typer.Option(None, help="Output directory"),
) -> None:
    """Run a benchmark preset"""
    console.print(f"[bold blue]Running preset {name}...[/]")
    tool = RunPresetTool(
        preset=name,
        elements=elements,
        degree=degree,
        theta=theta,
        t_end=tend,
        pml=pml,
        output_dir=str(output_dir) if output_dir else None,
    )
    _print_summary(_finish(tool.run()))


@app.command("check-operators")
def check_operators(
    max_degree: int = typer.Option(12, help="Highest polynomial degree to check"),
) -> None:
    """Verify the summation-by-parts element operators"""
    result = OperatorCheckTool(max_degree=max_degree).run()
    if "rows" not in result:
        _finish(result)

    table = Table(title="Element operators")
    for column in ("degree", "nodes", "SBP residual", "derivative error", "weight sum error", ""):
        table.add_column(column)
    for row in result["rows"]:
        mark = "[green]ok[/]" if row["passed"] else "[red]FAIL[/]"
        table.add_row(
            str(row["degree"]),
            row["kind"],
            f"{row['sbp_residual']:.2e}",
            f"{row['derivative_error']:.2e}",
            f"{row['weight_sum_error']:.2e}",
            mark,
        )
    console.print(table)
    if not result["success"]:
        console.print("[bold red]Some operators failed the check[/]")
        raise typer.Exit(1)


@app.command()
def convergence(
    config: Path = typer.Argument(..., help="Run configuration file"),
    levels: Optional[str] = typer.Option(None, help="Comma-separated element spacings, e.g. '10 km,5 km,2.5 km'"),
    degrees: Optional[str] = typer.Option(None, help="Comma-separated polynomial degrees for p-refinement"),
    auto_tol: Optional[bool] = typer.Option(
        None, "--auto-tol/--fixed-tol", help="Derive the PML tolerance from each level's resolution (default: on for strip presets)"
    ),
    output_dir: Optional[Path] = typer.Option(None, help="Output directory"),
) -> None:
    """Error and convergence rates over mesh spacings or degrees"""
    try:
        degree_list = [int(d) for d in degrees.split(",") if d.strip()] if degrees else []
    except ValueError:
        console.print(f"[bold red]Error:[/] --degrees must be integers, got {degrees!r}")
        raise typer.Exit(1)
    level_list = [level.strip() for level in levels.split(",") if level.strip()] if levels else []

    console.print(f"[bold blue]Convergence study of {config}...[/]")
    tool = ConvergenceStudyTool(
        config_path=str(config),
        levels=level_list,
        degrees=degree_list,
        auto_tol=auto_tol,
        output_dir=str(output_dir) if output_dir else None,
    )
    result = _finish(tool.run())

    table = Table(title="Convergence")
    table.add_column("level")
    table.add_column("error")
    table.add_column("rate")
    rates = result["rates"]
    for i, (level, error) in enumerate(zip(result["levels"], result["errors"])):
        rate = f"{rates[i - 1]:.3f}" if i > 0 and rates else ""
        table.add_row(f"{level:g}", f"{error:.4e}", rate)
    console.print(table)
    console.print(f"[bold]PML tolerance:[/] {'per level' if result['auto_tol'] else 'fixed'}")
    console.print(f"[bold]Written:[/] {result['file']}")


@app.command()
def compare(
    receiver_csv: Path = typer.Argument(..., help="Seismogram written by a run"),
    reference_csv: Path = typer.Argument(..., help="Reference seismogram with the same columns"),
) -> None:
    """Max-norm misfit of a seismogram against a reference"""
    result = _finish(CompareSeismogramTool(receiver_csv=str(receiver_csv), reference_csv=str(reference_csv)).run())
    console.print(f"[bold]Misfit[/] ({', '.join(result['components'])}): {result['misfit']:.6e}")


if __name__ == "__main__":
    app()
