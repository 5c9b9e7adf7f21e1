import logging
from typing import Any, Dict, List, NamedTuple, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel
from scipy.optimize import minimize_scalar

from agents.information_agent.utils import (PrecisionMap, identity_precision, offset_grid,
                                            offset_values, step_values)
from models.costs import CostFunction
from models.densities import SignalDensity
from models.transfers import Transfer
from utils.config import Config, load_agent_config
from utils.errors import DimensionError, DomainError


class StrategicValue(NamedTuple):
    value: float
    report_offset: float


class AgentResponse(BaseModel):
    lambda_star: float
    payoff: float
    expected_transfer: float
    report_offset: float
    participated: bool
    ir_value: float
    unbounded: bool = False


class InformationAgent:
    """
    The agent: picks a signal precision lambda at cost c(lambda), then a report
    a, to maximize the expected transfer net of cost.

    `precision_map` turns the chosen precision into the precision that
    governs the transfer (posterior or principal-side precision); identity
    for the base model.
    """

    def __init__(self, density: SignalDensity, precision_map: Optional[PrecisionMap] = None,
                 settings: Optional[Dict[str, Any]] = None):
        self.logger = logging.getLogger(__name__)
        self.density = density
        self.precision_map = precision_map or identity_precision
        self.settings = load_agent_config(Config.INFORMATION_AGENT, settings)
        self.lambda_min = float(self.settings["lambda_min"])
        self.lambda_max = float(self.settings["lambda_max"])
        self.grid = np.geomspace(self.lambda_min, self.lambda_max, int(self.settings["lambda_grid_points"]))
        self.payoff_tol = float(self.settings["payoff_tol"])

    def with_precision_map(self, precision_map: PrecisionMap) -> "InformationAgent":
        return InformationAgent(self.density, precision_map, self.settings)

    # Expected transfers

    def _check_lambda(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        if np.any(lam <= 0):
            raise DomainError(f"Precision must be positive, got lambda={lam}")
        return lam

    def expected_transfer_cutoff(self, lam, d: float, dim: Optional[int] = None):
        """E(lambda; d) = P(|eps| <= lambda d): 2 Phi(lambda d) - 1 in dimension one."""
        if dim is not None and dim != self.density.dimension:
            raise DimensionError(f"Requested dimension {dim} but the density has dimension {self.density.dimension}")
        lam = self._check_lambda(lam)
        if d < 0:
            raise DomainError(f"Cutoff must be nonnegative, got d={d}")
        value = self.density.radial_cdf(lam * d)
        return float(value) if value.ndim == 0 else value

    def expected_transfer_truthful(self, lam, t: Transfer):
        """Expected transfer when the report equals the signal."""
        if t.is_cutoff:
            return self.expected_transfer_cutoff(lam, t.d)
        if self.density.dimension != 1:
            raise DimensionError("Tabulated transfers are only supported in dimension one")
        lam = self._check_lambda(lam)
        value = step_values(self.density.cdf, lam, t.edges, t.values)
        return float(value) if np.ndim(value) == 0 else value

    def expected_transfer_strategic(self, lam: float, t: Transfer, assume_truthful: bool = True) -> StrategicValue:
        """
        max over report offsets b = a - s of the expected transfer, by a grid on
        [-2 X_max, 2 X_max] at the tabulation step refined by bounded Brent.
        """
        lam = float(self._check_lambda(lam))
        if (assume_truthful and t.is_symmetric_unimodal()) or len(t.values) == 0:
            return StrategicValue(float(self.expected_transfer_truthful(lam, t)), 0.0)
        if self.density.dimension != 1:
            raise DimensionError("Strategic reporting is only evaluated in dimension one")
        offsets = offset_grid(t.x_max, t.step, int(self.settings["offset_grid_max_points"]))
        values = offset_values(self.density.cdf, lam, t.edges, t.values, offsets)
        best = float(np.max(values))
        # nearest to truthful among grid ties
        ties = np.nonzero(values >= best - 1e-14)[0]
        i = int(ties[np.argmin(np.abs(offsets[ties]))])
        b_best, v_best = float(offsets[i]), float(values[i])
        if len(offsets) > 1:
            width = offsets[1] - offsets[0]
            lo, hi = max(offsets[0], b_best - width), min(offsets[-1], b_best + width)
            res = minimize_scalar(lambda b: -float(offset_values(self.density.cdf, lam, t.edges, t.values,
                                                                    np.atleast_1d(b))[0]),
                                  bounds=(lo, hi), method="bounded", options={"xatol": 1e-11})
            if -res.fun > v_best + 1e-15:
                b_best, v_best = float(res.x), float(-res.fun)
        return StrategicValue(v_best, b_best)

    def expected_transfer_curve(self, t: Transfer, lams) -> np.ndarray:
        """E(Lambda(lambda); t) over an array of chosen precisions."""
        lams = np.asarray(lams, dtype=float)
        eff = self.precision_map(lams)
        out = np.zeros_like(eff)
        positive = eff > 0
        if t.is_cutoff or t.is_symmetric_unimodal():
            out[positive] = self.expected_transfer_truthful(eff[positive], t)
            return out
        chunk = int(self.settings["strategic_chunk"])
        offsets = offset_grid(t.x_max, t.step, int(self.settings["offset_grid_max_points"]))
        idx = np.nonzero(positive)[0]
        for start in range(0, len(idx), chunk):
            sel = idx[start:start + chunk]
            lam = eff[sel][:, None, None]
            probs = np.diff(self.density.cdf(lam * (t.edges[None, None, :] + offsets[None, :, None])), axis=-1)
            out[sel] = np.max(probs @ t.values, axis=1)
        return out

    def _objective(self, t: Transfer, c: CostFunction, lam: float) -> float:
        eff = float(self.precision_map(lam))
        if eff <= 0:
            return -float(c(lam))
        return float(self.expected_transfer_strategic(eff, t).value) - float(c(lam))

    # Best response

    def best_response(self, t: Transfer, c: CostFunction) -> AgentResponse:
        """
        Largest maximizer of E(Lambda(lambda); t) - c(lambda) over the lambda
        window and lambda = 0; no participation when the best payoff is negative.

        lambda = 0 costs c(0) = 0 and still pays E(Lambda(0); t), which is
        positive when the precision map carries prior information. An interior
        precision wins ties against it.
        """
        grid = self.grid
        with np.errstate(invalid="ignore"):
            payoff = self.expected_transfer_curve(t, grid) - c(grid)
        payoff = np.where(np.isnan(payoff), -np.inf, payoff)
        best_grid = float(np.max(payoff))
        free = self._free_value(t)
        # IR compares against c(0+) in the base model, against the free value otherwise
        outside = free.value if free is not None else -c.limit_at_zero()

        if not np.isfinite(best_grid):
            if free is not None:
                return self._stay_at_zero(t, free, free.value)
            return self._no_participation(t, outside)

        candidates = self._candidate_indices(payoff, best_grid)
        found: List[tuple] = []
        for i in candidates:
            lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
            lam_i, val_i = float(grid[i]), float(payoff[i])
            if hi > lo:
                res = minimize_scalar(lambda x: -self._objective(t, c, x), bounds=(lo, hi), method="bounded",
                                      options={"xatol": 1e-10 * lam_i})
                if -res.fun > val_i:
                    lam_i, val_i = float(res.x), float(-res.fun)
            found.append((lam_i, val_i))

        best = max(v for _, v in found)
        lam_star = max(lam for lam, v in found if v >= best - self.payoff_tol)
        payoff_star = self._objective(t, c, lam_star)
        ir_value = max(payoff_star, outside)
        if free is not None and free.value > payoff_star + self.payoff_tol:
            return self._stay_at_zero(t, free, ir_value)
        if payoff_star < -float(self.settings["participation_tol"]):
            return self._no_participation(t, ir_value)

        unbounded = lam_star >= self.lambda_max * (1 - 1e-9)
        if unbounded:
            self.logger.warning(f"Best response sits at the lambda window edge {self.lambda_max}: unbounded response")
        eff = float(self.precision_map(lam_star))
        strategic = self.expected_transfer_strategic(eff, t) if eff > 0 else StrategicValue(0.0, 0.0)
        return AgentResponse(lambda_star=lam_star, payoff=max(payoff_star, 0.0),
                             expected_transfer=strategic.value, report_offset=strategic.report_offset,
                             participated=True, ir_value=ir_value, unbounded=unbounded)

    def _free_value(self, t: Transfer) -> Optional[StrategicValue]:
        """Value of acquiring nothing, or None when Lambda(0) = 0."""
        eff = float(self.precision_map(0.0))
        if eff <= 0:
            return None
        return self.expected_transfer_strategic(eff, t)

    def _candidate_indices(self, payoff: np.ndarray, best: float) -> List[int]:
        """Grid local maxima near the best value, plus the last grid point tying the best."""
        left = np.concatenate([[-np.inf], payoff[:-1]])
        right = np.concatenate([payoff[1:], [-np.inf]])
        local = np.nonzero((payoff >= left) & (payoff >= right) & np.isfinite(payoff))[0]
        slack = 1e-3 * (1.0 + abs(best))
        near = [int(i) for i in local if payoff[i] >= best - slack]
        near.sort(key=lambda i: (-payoff[i], -i))
        chosen = near[: int(self.settings["max_refine_candidates"])]
        last_tie = int(np.nonzero(payoff >= best - self.payoff_tol)[0][-1])
        if last_tie not in chosen:
            chosen.append(last_tie)
        return chosen

    def _stay_at_zero(self, t: Transfer, free: StrategicValue, ir_value: float) -> AgentResponse:
        self.logger.debug(f"No acquisition under {t}: lambda=0 pays {free.value:.6g}")
        return AgentResponse(lambda_star=0.0, payoff=free.value, expected_transfer=free.value,
                             report_offset=free.report_offset, participated=True, ir_value=ir_value)

    def _no_participation(self, t: Transfer, ir_value: float) -> AgentResponse:
        self.logger.debug(f"No participation under {t}: best payoff {ir_value:.6g}")
        return AgentResponse(lambda_star=0.0, payoff=0.0, expected_transfer=0.0, report_offset=0.0,
                             participated=False, ir_value=ir_value)

    def verify_truthful_report(self, t: Transfer, lam: float) -> bool:
        """The best report offset is zero, or reporting the signal loses nothing."""
        strategic = self.expected_transfer_strategic(lam, t, assume_truthful=False)
        truthful = float(self.expected_transfer_truthful(lam, t))
        if abs(strategic.report_offset) <= float(self.settings["offset_tol"]):
            return True
        return strategic.value - truthful <= float(self.settings["value_gap_tol"])

    # Simulation

    def simulate_signals(self, theta: float, lam: float, size: int, rng: np.random.Generator,
                         report_offset: float = 0.0) -> pd.DataFrame:
        """Draws of s = theta + eps / lambda with reports a = s + offset."""
        lam = float(self._check_lambda(lam))
        eps = self.density.sample(size, rng)
        if self.density.dimension > 1:
            eps = eps[:, 0]
        signal = theta + eps / lam
        return pd.DataFrame({"theta": theta, "eps": eps, "signal": signal,
                             "report": signal + report_offset, "lambda": lam})

    def monte_carlo_transfer(self, t: Transfer, lam: float, size: int, rng: np.random.Generator,
                             report_offset: float = 0.0) -> Dict[str, float]:
        """Sample mean and standard error of t(theta - a) under simulated signals."""
        if self.density.dimension != 1:
            raise DimensionError("Monte Carlo transfers are simulated in dimension one")
        draws = self.simulate_signals(0.0, lam, size, rng, report_offset)
        paid = t(draws["theta"].to_numpy() - draws["report"].to_numpy())
        return {"mean": float(np.mean(paid)), "stderr": float(np.std(paid, ddof=1) / np.sqrt(size))}
