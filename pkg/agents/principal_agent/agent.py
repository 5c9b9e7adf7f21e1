import logging
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel

from agents.information_agent.agent import AgentResponse, InformationAgent
from agents.information_agent.utils import gaussian_prior_precision, unobserved_state_precision
from agents.principal_agent.utils import bisect_predicate, first_crossing, largest_argmax, scan_grid
from models.costs import CostFunction
from models.elasticity import ElasticityProfile
from models.output import OutputModel
from models.transfers import Transfer
from utils.config import Config, load_agent_config
from utils.errors import ConfigError, DimensionError, InfeasibleContractError, PreconditionError


class SolveResult(BaseModel):
    d_bar: float
    d_star: float
    lambda_star: float
    region: Literal["substitute_at_dbar", "complement_to_boundary"]
    ir_binding: bool
    posterior_precision: Optional[float] = None
    boundary_product: float
    eta_inverse_n: float
    payoff: float
    variant: str = "base"
    boundary_reached: bool = True
    best_cutoff_only: bool = False
    unbounded: bool = False


class ComparisonReport(BaseModel):
    hypothesis_holds: bool
    prediction_holds: Optional[bool]
    message: str
    first: SolveResult
    second: SolveResult
    details: Dict[str, Any] = {}


class ClassicResult(BaseModel):
    d_star: float
    e_star: float
    payoff: float
    mlrp: bool


class PrincipalAgent:
    """
    The principal: chooses the cutoff that induces the highest precision,
    d* = min{d >= d_bar : Lambda(lambda(d)) d >= eta^-1(n)}.
    """

    def __init__(self, agent: InformationAgent, settings: Optional[Dict[str, Any]] = None,
                 variant: str = "base"):
        self.logger = logging.getLogger(__name__)
        self.agent = agent
        self.density = agent.density
        self.variant = variant
        self.settings = load_agent_config(Config.PRINCIPAL_AGENT, settings)
        self.d_max = float(self.settings["d_max"]) * self.density.noise_scale
        self.boundary_tol = float(self.settings["boundary_tol"])
        self._profiles: Dict[float, ElasticityProfile] = {}
        self._responses: Dict[Tuple[CostFunction, float], AgentResponse] = {}

    def profile(self, n: Optional[float] = None) -> ElasticityProfile:
        n = float(self.density.dimension if n is None else n)
        if n not in self._profiles:
            self._profiles[n] = ElasticityProfile(self.density, n=n)
        return self._profiles[n]

    def response(self, d: float, c: CostFunction) -> AgentResponse:
        key = (c, float(d))
        if key not in self._responses:
            self._responses[key] = self.agent.best_response(Transfer.cutoff(d), c)
        return self._responses[key]

    def product(self, d: float, c: CostFunction) -> float:
        """Lambda(lambda(d)) * d, the quantity compared with eta^-1(n)."""
        lam = self.response(d, c).lambda_star
        return float(self.agent.precision_map(lam)) * d

    def _participates(self, d: float, c: CostFunction) -> bool:
        return self.response(d, c).ir_value >= -float(self.agent.settings["participation_tol"])

    def _acquires(self, d: float, c: CostFunction) -> bool:
        resp = self.response(d, c)
        return resp.participated and resp.lambda_star > 0

    # Participation and the optimal cutoff

    def min_participation_cutoff(self, c: CostFunction) -> float:
        """Smallest d with pi(d) >= 0, by bisection on the nondecreasing map d -> pi(d)."""
        if self._participates(0.0, c):
            return 0.0
        if not self._participates(self.d_max, c):
            self.logger.warning(f"No cutoff up to D_max={self.d_max} satisfies participation")
            raise InfeasibleContractError()
        d_bar = bisect_predicate(0.0, self.d_max, lambda d: self._participates(d, c),
                                 float(self.settings["cutoff_tol"]))
        self.logger.info(f"Participation cutoff d_bar={d_bar:.9g}")
        return d_bar

    def optimal_cutoff(self, c: CostFunction, dim: Optional[int] = None) -> SolveResult:
        dim = self.density.dimension if dim is None else int(dim)
        if dim != self.density.dimension:
            raise DimensionError(f"Requested dimension {dim} but the density has dimension {self.density.dimension}")
        profile = self.profile(dim)
        threshold = profile.eta_inverse_n
        if not profile.iea_holds:
            self.logger.warning("Increasing elasticity above n fails; returning the best cutoff only")
            return self._best_cutoff_only(c, profile)

        d_bar = self.min_participation_cutoff(c)
        if self._acquires(d_bar, c) and self.product(d_bar, c) >= threshold - self.boundary_tol:
            self.logger.info(f"Substitute region at d_bar: d*={d_bar:.9g}, IR binding")
            return self._result(d_bar, d_bar, c, "substitute_at_dbar", True, threshold)

        # lambda = 0 under a prior pays Lambda(0) d without any acquisition
        reached = lambda d: self._acquires(d, c) and self.product(d, c) >= threshold - self.boundary_tol
        grid = scan_grid(d_bar, self.d_max, int(self.settings["d_scan_points"]))
        k = first_crossing(grid, reached)
        if k is None:
            self.logger.warning(f"lambda(d) d never reaches {threshold:.6g} below D_max; best scanned cutoff returned")
            best = max(grid, key=lambda d: (self.response(d, c).lambda_star, -d))
            result = self._result(d_bar, float(best), c, "complement_to_boundary", False, threshold)
            return result.model_copy(update={"boundary_reached": False})
        lo, hi = float(grid[max(k - 1, 0)]), float(grid[k])
        for _ in range(int(self.settings["d_refine_rounds"])):
            if hi <= lo:
                break
            fine = np.linspace(lo, hi, int(self.settings["d_refine_points"]))
            j = first_crossing(fine[1:], reached)
            j = len(fine) - 2 if j is None else j
            lo, hi = float(fine[j]), float(fine[j + 1])
        d_star = hi if hi <= lo else bisect_predicate(lo, hi, reached, float(self.settings["cutoff_tol"]))
        self.logger.info(f"Boundary reached at d*={d_star:.9g}")
        return self._result(d_bar, d_star, c, "complement_to_boundary", False, threshold)

    def _result(self, d_bar: float, d_star: float, c: CostFunction, region: str, ir_binding: bool,
                threshold: float) -> SolveResult:
        resp = self.response(d_star, c)
        posterior = None if self.variant == "base" else float(self.agent.precision_map(resp.lambda_star))
        return SolveResult(d_bar=d_bar, d_star=d_star, lambda_star=resp.lambda_star, region=region,
                           ir_binding=ir_binding, posterior_precision=posterior,
                           boundary_product=self.product(d_star, c), eta_inverse_n=threshold,
                           payoff=resp.payoff, variant=self.variant, unbounded=resp.unbounded)

    def _best_cutoff_only(self, c: CostFunction, profile: ElasticityProfile) -> SolveResult:
        d_bar = self.min_participation_cutoff(c)
        scan = self.cutoff_sweep(c, scan_grid(d_bar, self.d_max, int(self.settings["d_scan_points"])))
        best = scan.sort_values(["lambda", "d"], ascending=[False, True]).iloc[0]
        d_star = float(best["d"])
        region = "substitute_at_dbar" if d_star == d_bar else "complement_to_boundary"
        result = self._result(d_bar, d_star, c, region, d_star == d_bar, profile.eta_inverse_n)
        return result.model_copy(update={"best_cutoff_only": True})

    def best_cutoff_scan(self, c: CostFunction, points: Optional[int] = None) -> Dict[str, float]:
        """The highest precision any scanned cutoff induces, refined around the best point."""
        points = int(points or self.settings["d_scan_points"])
        grid = scan_grid(0.0, self.d_max, points)
        lams = np.array([self.response(d, c).lambda_star for d in grid])
        i = int(np.argmax(lams))
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        objective = lambda ds: np.array([self.response(float(d), c).lambda_star for d in np.atleast_1d(ds)])
        d_best, lam_best = largest_argmax(np.linspace(lo, hi, int(self.settings["d_refine_points"])), objective,
                                          float(self.agent.payoff_tol))
        if lam_best < lams[i]:
            d_best, lam_best = float(grid[i]), float(lams[i])
        return {"d": d_best, "lambda": lam_best}

    def cutoff_sweep(self, c: CostFunction, d_grid) -> pd.DataFrame:
        rows = []
        for d in np.asarray(d_grid, dtype=float):
            resp = self.response(float(d), c)
            rows.append({"d": float(d), "lambda": resp.lambda_star, "payoff": resp.payoff,
                         "product": self.product(float(d), c), "participated": resp.participated})
        return pd.DataFrame(rows, columns=["d", "lambda", "payoff", "product", "participated"])

    # Variants

    def _require_gaussian(self) -> None:
        if self.density.family != "gaussian" or self.density.noise_scale != 1.0 or self.density.dimension != 1:
            raise PreconditionError("This variant is defined for a standard one-dimensional Gaussian signal")

    def solve_gaussian_prior(self, lambda0: float, c: CostFunction) -> SolveResult:
        self._require_gaussian()
        if lambda0 <= 0:
            raise ConfigError(f"lambda0 must be positive, got {lambda0}")
        agent = self.agent.with_precision_map(gaussian_prior_precision(lambda0))
        return PrincipalAgent(agent, self.settings, variant="gaussian_prior").optimal_cutoff(c)

    def solve_unobserved_state(self, prior: str, lambda0: Optional[float], lambda_p: float,
                               c: CostFunction) -> SolveResult:
        self._require_gaussian()
        if prior not in ("uniform", "gaussian"):
            raise ConfigError(f"Unknown prior: {prior}")
        if (prior == "gaussian") != (lambda0 is not None):
            raise ConfigError("lambda0 is required iff the prior is gaussian")
        if lambda_p <= 0:
            raise ConfigError(f"lambda_p must be positive, got {lambda_p}")
        agent = self.agent.with_precision_map(unobserved_state_precision(lambda_p, lambda0))
        return PrincipalAgent(agent, self.settings, variant=f"unobserved_{prior}").optimal_cutoff(c)

    # Comparative statics

    def comparative_statics(self, c1: CostFunction, c2: CostFunction) -> ComparisonReport:
        """A cost that rises faster (c2 - c1 nondecreasing) weakly raises d* and lowers lambda*."""
        grid = self.agent.grid
        hypothesis = c1.dominated_by(c2, grid) and c1.difference_nondecreasing(c2, grid)
        first = self.optimal_cutoff(c1)
        second = self.optimal_cutoff(c2)
        if not hypothesis:
            self.logger.warning("Cost ordering hypothesis violated; no prediction")
            return ComparisonReport(hypothesis_holds=False, prediction_holds=None,
                                    message="hypothesis violated, no prediction", first=first, second=second)
        tol = float(self.settings["comparison_tol"])
        holds = first.d_star <= second.d_star + tol and second.lambda_star <= first.lambda_star + tol
        if not holds:
            self.logger.warning(f"Comparative statics prediction failed: {first} vs {second}")
        return ComparisonReport(hypothesis_holds=True, prediction_holds=holds,
                                message="d* weakly increases and lambda* weakly decreases" if holds
                                else "prediction failed", first=first, second=second)

    def comparative_budget(self, c: CostFunction, budget: float) -> ComparisonReport:
        """A budget of B < 1 is equivalent to cost c / B with a unit budget."""
        if not 0 < budget <= 1:
            raise ConfigError(f"budget must lie in (0, 1], got {budget}")
        return self.comparative_statics(c, c.scaled(1.0 / budget))

    def comparative_noise(self, c: CostFunction, k: float) -> ComparisonReport:
        """
        Noise k * eps under cost c is the base model under cost c(k lambda):
        same d*, precision scaled by k. With c convex and k > 1, d* weakly rises.
        """
        scaled_agent = InformationAgent(self.density.noise_scaled(k), settings=self.agent.settings)
        noisy = PrincipalAgent(scaled_agent, self.settings).optimal_cutoff(c)
        equivalent = self.optimal_cutoff(c.noise_scaled(k))
        base = self.optimal_cutoff(c)
        tol = 1e-4
        same_cutoff = abs(noisy.d_star - equivalent.d_star) <= tol * max(1.0, equivalent.d_star)
        same_precision = abs(noisy.lambda_star - k * equivalent.lambda_star) <= tol * max(1.0, noisy.lambda_star)
        convex = c.is_convex(self.agent.grid[self.agent.grid < 100.0])
        hypothesis = convex and k >= 1
        prediction = (base.d_star <= equivalent.d_star + float(self.settings["comparison_tol"])) if hypothesis else None
        return ComparisonReport(
            hypothesis_holds=hypothesis, prediction_holds=prediction,
            message="noise scaling equivalent to cost c(k lambda)" if same_cutoff and same_precision
            else "noise scaling equivalence failed",
            first=base, second=equivalent,
            details={"k": k, "noisy_d_star": noisy.d_star, "noisy_lambda_star": noisy.lambda_star,
                     "equivalent_d_star": equivalent.d_star, "equivalent_lambda_star": equivalent.lambda_star,
                     "equivalence_holds": same_cutoff and same_precision})

    # Classic principal-agent with output cutoffs

    def check_output_mlrp(self, m: OutputModel) -> bool:
        report = m.check_mlrp()
        if not report["mlrp"]:
            self.logger.warning(f"Output model violates MLRP: {report['witness']}")
        return report["mlrp"]

    def output_cutoff_effort(self, m: OutputModel, c: CostFunction, d: float) -> Tuple[float, float]:
        """Largest effort maximizing P(y >= d | e) - c(e); effort zero if that payoff is negative."""
        grid = np.linspace(m.e_min, m.e_max, int(self.settings["effort_grid_points"]))
        objective = lambda e: m.survival(d, e) - c(e)
        e_best, v_best = largest_argmax(grid, objective, float(self.agent.payoff_tol))
        if v_best < -float(self.agent.settings["participation_tol"]):
            return 0.0, 0.0
        return e_best, v_best

    def solve_classic_pa(self, m: OutputModel, c: CostFunction) -> ClassicResult:
        mlrp = self.check_output_mlrp(m)
        grid = np.linspace(0.0, m.y_max, int(self.settings["output_scan_points"]))
        efforts = np.array([self.output_cutoff_effort(m, c, d)[0] for d in grid])
        best = float(np.max(efforts))
        if best <= 0:
            raise InfeasibleContractError()
        i = int(np.nonzero(efforts >= best - 1e-12)[0][0])
        d_star, e_star = float(grid[i]), best
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        for _ in range(int(self.settings["d_refine_rounds"])):
            fine = np.linspace(lo, hi, int(self.settings["d_refine_points"]))
            fine_efforts = np.array([self.output_cutoff_effort(m, c, d)[0] for d in fine])
            j = int(np.nonzero(fine_efforts >= np.max(fine_efforts) - 1e-12)[0][0])
            if fine_efforts[j] > e_star + 1e-12:
                d_star, e_star = float(fine[j]), float(fine_efforts[j])
            lo, hi = fine[max(j - 1, 0)], fine[min(j + 1, len(fine) - 1)]
        payoff = self.output_cutoff_effort(m, c, d_star)[1]
        self.logger.info(f"Quota contract d*={d_star:.6g} induces effort {e_star:.6g}")
        return ClassicResult(d_star=d_star, e_star=e_star, payoff=payoff, mlrp=mlrp)
