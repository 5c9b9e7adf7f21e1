import json
import os
import sys
from pathlib import Path
from typing import Any, Dict, Optional

# Add the project root directory (parent of the directory containing this file) to sys.path
project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

import typer
from rich.console import Console
from typing_extensions import Annotated

from backend import __version__
from backend.task_manager import run
from utils.config import Config, load_run_config
from utils.errors import ConfigError
from utils.logging import setup_logging

app = typer.Typer(help="Optimal information-acquisition contracts: solve, verify and refute cutoff transfers.",
                  add_completion=False)
console = Console(stderr=True)

ConfigOption = Annotated[Optional[Path], typer.Option("--config", help="JSON run file (RunConfig).")]
OutOption = Annotated[Optional[Path], typer.Option("--out", help=f"Artifact directory [default: {Config.OUTPUT_DIR}].")]
SeedOption = Annotated[Optional[int], typer.Option("--seed", help=f"RNG seed [default: {Config.SEED}].")]
ThreadsOption = Annotated[Optional[int], typer.Option("--threads", min=1, help="Workers for brute-force chunks.")]
DensityOption = Annotated[Optional[str], typer.Option(
    "--density", help='Density family name or JSON, e.g. \'{"family": "laplace"}\' [default: gaussian].')]
CostOption = Annotated[Optional[str], typer.Option(
    "--cost", help='Cost kind name or JSON, e.g. \'{"kind": "power", "a": 0.125, "p": 2}\' [default: power].')]
DimOption = Annotated[Optional[int], typer.Option("--dim", min=1, help="Signal dimension n [default: 1].")]
VerboseOption = Annotated[bool, typer.Option("--verbose", "-v", help="Debug logging.")]


def _parse_spec(value: Optional[str], name_key: str, flag: str) -> Optional[Dict[str, Any]]:
    """A bare name becomes {name_key: name}; anything starting with '{' is parsed as JSON."""
    if value is None:
        return None
    text = value.strip()
    if not text.startswith("{"):
        return {name_key: text}
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as e:
        raise typer.BadParameter(f"not valid JSON: {str(e)}", param_hint=flag)
    if not isinstance(spec, dict):
        raise typer.BadParameter("expected a JSON object", param_hint=flag)
    return spec


def _execute(command: str, config: Optional[Path], out: Optional[Path], seed: Optional[int],
             threads: Optional[int], density: Optional[str], cost: Optional[str], dim: Optional[int],
             verbose: bool) -> None:
    setup_logging("DEBUG" if verbose else Config.LOG_LEVEL)
    density_spec = _parse_spec(density, "family", "--density")
    if dim is not None:
        density_spec = {**(density_spec or {}), "dimension": dim}
    overrides = {
        "density": density_spec,
        "cost": _parse_spec(cost, "kind", "--cost"),
        "seed": seed,
        "threads": threads,
        "output": {"dir": str(out)} if out is not None else None,
    }
    try:
        run_config = load_run_config(str(config) if config is not None else None, overrides)
    except ConfigError as e:
        console.print(f"[red]configuration error:[/red] {str(e)}")
        raise typer.Exit(code=1)
    status, result = run(command, run_config)
    if status == 0:
        console.print(f"[green]{command}[/green] wrote {', '.join(result['artifacts'])} to {run_config.output.dir}")
    elif status == 2:
        console.print("[yellow]no feasible contract[/yellow]")
    raise typer.Exit(code=status)


@app.command()
def analyze(config: ConfigOption = None, out: OutOption = None, seed: SeedOption = None,
            threads: ThreadsOption = None, density: DensityOption = None, cost: CostOption = None,
            dim: DimOption = None, verbose: VerboseOption = False):
    """Elasticity profile (elasticity.csv) and density conditions (conditions.json)."""
    _execute("analyze", config, out, seed, threads, density, cost, dim, verbose)


@app.command()
def solve(config: ConfigOption = None, out: OutOption = None, seed: SeedOption = None,
          threads: ThreadsOption = None, density: DensityOption = None, cost: CostOption = None,
          dim: DimOption = None, verbose: VerboseOption = False):
    """Optimal cutoff (solve.json) and the (d, lambda(d), payoff, product) sweep (sweep_d.csv)."""
    _execute("solve", config, out, seed, threads, density, cost, dim, verbose)


@app.command()
def verify(config: ConfigOption = None, out: OutOption = None, seed: SeedOption = None,
           threads: ThreadsOption = None, density: DensityOption = None, cost: CostOption = None,
           dim: DimOption = None, verbose: VerboseOption = False):
    """Brute-force certification of the optimal cutoff (verify.json, pipeline.csv)."""
    _execute("verify", config, out, seed, threads, density, cost, dim, verbose)


@app.command()
def refute(config: ConfigOption = None, out: OutOption = None, seed: SeedOption = None,
           threads: ThreadsOption = None, density: DensityOption = None, cost: CostOption = None,
           dim: DimOption = None, verbose: VerboseOption = False):
    """Counterexample and brute force under the tangent cost (refute.json)."""
    _execute("refute", config, out, seed, threads, density, cost, dim, verbose)


@app.command()
def sweep(config: ConfigOption = None, out: OutOption = None, seed: SeedOption = None,
          threads: ThreadsOption = None, density: DensityOption = None, cost: CostOption = None,
          dim: DimOption = None, verbose: VerboseOption = False):
    """E(lambda; d) surface (surface.csv) and the boundary lambda d = eta^-1(n) (boundary.csv)."""
    _execute("sweep", config, out, seed, threads, density, cost, dim, verbose)


@app.command()
def compare(config: ConfigOption = None, out: OutOption = None, seed: SeedOption = None,
            threads: ThreadsOption = None, density: DensityOption = None, cost: CostOption = None,
            dim: DimOption = None, verbose: VerboseOption = False):
    """Comparative statics in cost, budget or noise scale (compare.json)."""
    _execute("compare", config, out, seed, threads, density, cost, dim, verbose)


@app.command()
def version():
    typer.echo(__version__)


if __name__ == "__main__":
    app()
