import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from agents.information_agent.agent import InformationAgent
from agents.oracle_agent.agent import OracleAgent
from agents.principal_agent.agent import PrincipalAgent
from models.costs import build_cost
from models.densities import build_density
from models.output import build_output_model
from models.transfers import Transfer
from utils.config import RunConfig
from utils.errors import (ConfigError, DensityError, DimensionError, DomainError, InfeasibleContractError,
                          PreconditionError)
from utils.helpers import make_rng, write_csv, write_json

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2


class ContractOrchestrator:
    """Builds the agents for one run configuration and dispatches commands to them."""

    COMMANDS = ("analyze", "solve", "verify", "refute", "sweep", "compare")

    def __init__(self, config: RunConfig):
        self.logger = logging.getLogger(__name__)
        self.config = config
        self.out_dir = Path(config.output.dir)
        self.density = build_density(config.density.family, config.density.params, config.density.dimension,
                                     config.density.points, config.density.path)
        self.cost = build_cost(config.cost.kind, config.cost.a, config.cost.p, config.cost.c0,
                               config.cost.points, config.cost.path)
        numerics = config.numerics
        self.agent = InformationAgent(self.density, settings={
            "lambda_min": numerics.lambda_min, "lambda_max": numerics.lambda_max,
            "lambda_grid_points": numerics.lambda_grid_points, "payoff_tol": numerics.payoff_tol})
        self.principal = PrincipalAgent(self.agent, settings={
            "d_max": numerics.d_max, "d_scan_points": numerics.d_scan_points,
            "boundary_tol": numerics.boundary_tol})
        self.oracle = OracleAgent(self.principal, threads=config.threads, show_progress=numerics.show_progress)
        self.results_cache: Dict[str, Dict[str, Any]] = {}

    def _handlers(self) -> Dict[str, Callable[[], Dict[str, Any]]]:
        return {"analyze": self.analyze, "solve": self.solve, "verify": self.verify,
                "refute": self.refute, "sweep": self.sweep, "compare": self.compare}

    def execute(self, command: str) -> Dict[str, Any]:
        if command not in self.COMMANDS:
            raise ConfigError(f"Unknown command: {command}")
        if command in self.results_cache:
            return self.results_cache[command]
        self.logger.info(f"Running {command} with {self.density} and {self.cost}")
        result = self._handlers()[command]()
        self.results_cache[command] = result
        return result

    def clear_results_cache(self):
        self.results_cache.clear()

    def _artifact(self, name: str) -> Path:
        return self.out_dir / name

    # Commands

    def analyze(self) -> Dict[str, Any]:
        profile = self.principal.profile()
        conditions = profile.summary()
        if self.density.dimension != 1:
            conditions["iea_1"] = self.principal.profile(1).iea_holds
        write_csv(profile.profile_table(), self._artifact("elasticity.csv"))
        write_json(conditions, self._artifact("conditions.json"))
        return {"conditions": conditions, "artifacts": ["elasticity.csv", "conditions.json"]}

    def solve(self) -> Dict[str, Any]:
        variant = self.config.variant
        artifacts = ["solve.json"]
        if variant.kind == "classic_pa":
            m = self._output_model()
            result = self.principal.solve_classic_pa(m, self.cost).model_dump()
        elif variant.kind == "gaussian_prior":
            result = self.principal.solve_gaussian_prior(variant.lambda0, self.cost).model_dump()
        elif variant.kind == "unobserved":
            result = self.principal.solve_unobserved_state(variant.prior, variant.lambda0, variant.lambda_p,
                                                           self.cost).model_dump()
        else:
            result = self.principal.optimal_cutoff(self.cost).model_dump()
            if self.config.output.sweep_csv:
                upper = 2.0 * max(result["d_star"], self.density.noise_scale)
                write_csv(self.principal.cutoff_sweep(self.cost, np.linspace(0.0, upper, 101)),
                          self._artifact("sweep_d.csv"))
                artifacts.append("sweep_d.csv")
        write_json(result, self._artifact("solve.json"))
        return {"result": result, "artifacts": artifacts}

    def verify(self) -> Dict[str, Any]:
        settings = self.config.verify
        rng = make_rng(self.config.seed)
        artifacts = ["verify.json"]
        if self.config.variant.kind == "classic_pa":
            report = self.oracle.certify_output(self._output_model(), self.cost, settings.grid_cells,
                                                settings.value_levels, rng=rng)
        else:
            report = self.oracle.certify(self.cost, settings.grid_cells, settings.value_levels,
                                         x_max=settings.x_max, rng=rng)
            if settings.random_transfers:
                x_max = settings.x_max or 3.0 * self.density.noise_scale
                summary, traces = self.oracle.improve_random(self.cost, settings.random_transfers,
                                                             settings.random_cells, x_max, rng)
                write_csv(traces, self._artifact("pipeline.csv"))
                artifacts.append("pipeline.csv")
                report["pipeline"] = {
                    "transfers": len(summary),
                    "all_improved": bool(summary["improved"].all()),
                    "min_gain": float(summary["gain"].min()),
                    "max_symmetrization_gap": float(summary["symmetrization_gap"].max()),
                }
        write_json(report, self._artifact("verify.json"))
        return {"report": report, "artifacts": artifacts}

    def refute(self) -> Dict[str, Any]:
        settings = self.config.refute
        report = self.oracle.refute(settings.lambda_ref, settings.d_ref, settings.kappa, settings.x1, settings.x2,
                                    settings.grid_cells, settings.value_levels, rng=make_rng(self.config.seed))
        transfers: Dict[str, Transfer] = report.pop("transfers")
        report["bands"] = {name: t.bands() for name, t in transfers.items()}
        write_json(report, self._artifact("refute.json"))
        return {"report": report, "artifacts": ["refute.json"]}

    def sweep(self) -> Dict[str, Any]:
        settings = self.config.sweep
        n = self.density.dimension
        threshold = self.principal.profile(n).eta_inverse_n
        lams = np.linspace(settings.lambda_range[0], settings.lambda_range[1], settings.lambda_points)
        ds = np.linspace(settings.d_range[0], settings.d_range[1], settings.d_points)
        lam_mesh, d_mesh = np.meshgrid(lams, ds, indexing="ij")
        surface = pd.DataFrame({
            "lambda": lam_mesh.ravel(),
            "d": d_mesh.ravel(),
            "expected_transfer": self.density.radial_cdf(lam_mesh.ravel() * d_mesh.ravel()),
        })
        surface["region"] = np.where(surface["lambda"] * surface["d"] < threshold, "complement", "substitute")
        boundary = pd.DataFrame({"lambda": lams, "d": threshold / lams})
        write_csv(surface, self._artifact("surface.csv"))
        write_csv(boundary, self._artifact("boundary.csv"))
        return {"eta_inverse_n": threshold, "points": len(surface), "artifacts": ["surface.csv", "boundary.csv"]}

    def compare(self) -> Dict[str, Any]:
        settings = self.config.compare
        reports: List[Dict[str, Any]] = []
        if settings.mode == "pair":
            if settings.cost2 is None:
                raise ConfigError("compare mode 'pair' needs compare.cost2")
            spec = settings.cost2
            second = build_cost(spec.kind, spec.a, spec.p, spec.c0, spec.points, spec.path)
            reports.append(self.principal.comparative_statics(self.cost, second).model_dump())
        else:
            for k in settings.factors:
                if settings.mode == "noise_scaling":
                    report = self.principal.comparative_noise(self.cost, k)
                else:
                    report = self.principal.comparative_statics(self.cost, self.cost.scaled(k))
                reports.append({"k": k, **report.model_dump()})
        payload = {"mode": settings.mode, "reports": reports,
                   "all_hold": all(r["prediction_holds"] is not False for r in reports)}
        write_json(payload, self._artifact("compare.json"))
        return {"report": payload, "artifacts": ["compare.json"]}

    def _output_model(self):
        spec = self.config.variant.output_model
        return build_output_model(spec.family, spec.sigma, spec.e_max, spec.y_grid, spec.e_grid, spec.table)


def run(command: str, config: RunConfig) -> Tuple[int, Optional[Dict[str, Any]]]:
    """Dispatch one command; exit status 0 on success, 2 when no contract is feasible, 1 on config errors."""
    logger = logging.getLogger(__name__)
    try:
        orchestrator = ContractOrchestrator(config)
        result = orchestrator.execute(command)
    except InfeasibleContractError as e:
        logger.error(f"{command}: {str(e)}")
        write_json({"command": command, "status": "infeasible", "error": str(e)},
                   Path(config.output.dir) / f"{command}.json")
        return EXIT_INFEASIBLE, None
    except (ConfigError, DensityError, DimensionError, DomainError, PreconditionError) as e:
        logger.error(f"{command}: configuration error: {str(e)}")
        return EXIT_CONFIG, None
    return EXIT_OK, result
