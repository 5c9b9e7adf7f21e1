import logging
from typing import Any, Dict, NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.optimize import brentq
from tqdm import tqdm

from agents.information_agent.agent import InformationAgent
from agents.oracle_agent.utils import (band_matrix, decode_levels, score_rows, survival_band_matrix,
                                       top_candidates)
from agents.principal_agent.agent import PrincipalAgent
from agents.principal_agent.utils import bisect_predicate, largest_argmax
from models.costs import CostFunction
from models.elasticity import ElasticityProfile, elasticity
from models.output import OutputModel
from models.transfers import Transfer
from utils.config import Config, load_agent_config
from utils.constants import EXHAUSTIVE_MAX_CANDIDATES, EXHAUSTIVE_MAX_CELLS, MASS_MATCH_TOL, SYMMETRY_TOL
from utils.errors import ConfigError, DimensionError, DomainError, PreconditionError
from utils.helpers import make_rng


class CutoffMatch(NamedTuple):
    d: float
    reached: bool


class OracleAgent:
    """
    Verification engine around a solver: turns any transfer into a cutoff
    that induces weakly higher precision, searches discretized transfer space
    by brute force, and builds the counterexample transfer when elasticity
    decreases somewhere.
    """

    def __init__(self, principal: PrincipalAgent, settings: Optional[Dict[str, Any]] = None,
                 threads: Optional[int] = None, show_progress: bool = False):
        self.logger = logging.getLogger(__name__)
        self.principal = principal
        self.agent: InformationAgent = principal.agent
        self.density = principal.density
        self.settings = load_agent_config(Config.ORACLE_AGENT, settings)
        self.threads = int(threads or Config.THREADS)
        self.show_progress = show_progress

    def _iea_profile(self) -> ElasticityProfile:
        if self.density.dimension != 1:
            raise DimensionError("The improvement pipeline works on one-dimensional signals")
        profile = self.principal.profile(1)
        if not profile.iea_holds:
            raise PreconditionError(
                f"Elasticity of {self.density.family} is not increasing above 1 (witness {profile.iea_witness}); "
                "cutoffs need not be optimal")
        return profile

    def tangent_cost(self, lambda_ref: float, d_ref: float, kappa: Optional[float] = None) -> CostFunction:
        """Cost touching E(.; d_ref) from above at lambda_ref only."""
        if lambda_ref <= 0 or d_ref <= 0:
            raise DomainError(f"Tangent cost needs positive lambda_ref and d_ref, got {lambda_ref}, {d_ref}")
        kappa = float(self.settings["kappa"] if kappa is None else kappa)
        return CostFunction.tangent(lambda lam: self.agent.expected_transfer_cutoff(lam, d_ref), lambda_ref, kappa)

    # Improvement pipeline

    def augment_transfer(self, t: Transfer, lambda_ref: float) -> Transfer:
        """Raise t to one on |x| < eta^-1(1) / lambda_ref."""
        if lambda_ref <= 0:
            raise DomainError(f"Precision must be positive, got lambda={lambda_ref}")
        if not t.is_symmetric(SYMMETRY_TOL):
            raise PreconditionError("Augmentation needs a symmetric transfer")
        radius = self._iea_profile().eta_inverse_n / lambda_ref
        return t.combine(Transfer.cutoff(radius), np.maximum, kind="augmented")

    def match_cutoff(self, lambda_ref: float, target: float) -> CutoffMatch:
        """Smallest cutoff d with E(lambda_ref; d) >= target."""
        if not 0.0 <= target <= 1.0:
            raise DomainError(f"Target must be a probability, got {target}")
        if target == 0.0:
            return CutoffMatch(0.0, True)
        d_max = self.principal.d_max
        top = self.agent.expected_transfer_cutoff(lambda_ref, d_max)
        tol = float(self.settings["match_tol"])
        if target > top + tol:
            self.logger.warning(f"Target {target:.12g} exceeds E(lambda; D_max)={top:.12g}")
            return CutoffMatch(d_max, False)
        goal = min(target, top)
        d = bisect_predicate(0.0, d_max, lambda x: self.agent.expected_transfer_cutoff(lambda_ref, x) >= goal, tol)
        return CutoffMatch(d, True)

    def improve_to_cutoff(self, t: Transfer, c: CostFunction) -> Dict[str, Any]:
        """
        Shift out the agent's report offset, symmetrize, augment and match a
        cutoff with the same truthful value at the induced precision.
        """
        self._iea_profile()
        resp_t = self.agent.best_response(t, c)
        stages: Dict[str, Transfer] = {"input": t}
        if not resp_t.participated or resp_t.lambda_star <= 0:
            resp_0 = self.agent.best_response(Transfer.cutoff(0.0), c)
            stages["cutoff"] = Transfer.cutoff(0.0)
            return {"d": 0.0, "lambda_d": resp_0.lambda_star, "lambda_t": 0.0, "report_offset": 0.0,
                    "trace": {"stages": stages, "checks": {"participated": False}}}

        lam_t = resp_t.lambda_star
        eff_t = float(self.agent.precision_map(lam_t))
        shifted = t.shifted(resp_t.report_offset)
        symmetric = shifted.symmetrize()
        augmented = self.augment_transfer(symmetric, eff_t)
        target = float(self.agent.expected_transfer_truthful(eff_t, augmented))
        match = self.match_cutoff(eff_t, min(target, 1.0))
        cutoff = Transfer.cutoff(match.d)
        resp_d = self.agent.best_response(cutoff, c)
        stages.update({"shifted": shifted, "symmetrized": symmetric, "augmented": augmented, "cutoff": cutoff})

        lams = eff_t * np.geomspace(0.25, 4.0, int(self.settings["symmetry_check_points"]))
        truthful_shifted = np.asarray(self.agent.expected_transfer_truthful(lams, shifted))
        strategic_shifted = np.array([self.agent.expected_transfer_strategic(float(lam), shifted, False).value
                                      for lam in lams])
        truthful_sym = np.asarray(self.agent.expected_transfer_truthful(lams, symmetric))
        checks = {
            "participated": True,
            "truthful_below_strategic": float(np.max(truthful_shifted - strategic_shifted)),
            "equality_gap": abs(float(self.agent.expected_transfer_truthful(eff_t, shifted)) - resp_t.expected_transfer),
            "symmetrization_gap": float(np.max(np.abs(truthful_sym - truthful_shifted))),
            "augmentation_gain": target - float(self.agent.expected_transfer_truthful(eff_t, symmetric)),
            "augmented_truthful": self.agent.verify_truthful_report(augmented, eff_t),
            "target": target,
            "match_reached": match.reached,
        }
        if resp_d.lambda_star < lam_t - 1e-6:
            self.logger.warning(f"Cutoff d={match.d:.9g} induces {resp_d.lambda_star:.9g} < {lam_t:.9g}")
        self.logger.debug(f"Pipeline {t} -> cutoff d={match.d:.9g}: lambda {lam_t:.6g} -> {resp_d.lambda_star:.6g}")
        return {"d": match.d, "lambda_d": resp_d.lambda_star, "lambda_t": lam_t,
                "report_offset": resp_t.report_offset, "trace": {"stages": stages, "checks": checks}}

    @staticmethod
    def pipeline_frame(result: Dict[str, Any], label: str = "") -> pd.DataFrame:
        frames = [t.to_frame(stage) for stage, t in result["trace"]["stages"].items()]
        frame = pd.concat(frames, ignore_index=True)
        if label:
            frame.insert(0, "transfer", label)
        return frame

    def random_transfer(self, rng: np.random.Generator, cells: int = 64, x_max: float = 3.0) -> Transfer:
        return Transfer.random(rng, cells, x_max)

    def improve_random(self, c: CostFunction, count: int, cells: int, x_max: float,
                       rng: np.random.Generator) -> Tuple[pd.DataFrame, pd.DataFrame]:
        """Run the pipeline on seeded random transfers; returns a summary table and the stacked traces."""
        rows, traces = [], []
        for k in tqdm(range(count), disable=not self.show_progress, desc="pipeline"):
            result = self.improve_to_cutoff(self.random_transfer(rng, cells, x_max), c)
            checks = result["trace"]["checks"]
            rows.append({"transfer": k, "lambda_t": result["lambda_t"], "d": result["d"],
                         "lambda_d": result["lambda_d"], "gain": result["lambda_d"] - result["lambda_t"],
                         "symmetrization_gap": checks.get("symmetrization_gap", 0.0),
                         "improved": result["lambda_d"] >= result["lambda_t"] - 1e-6})
            traces.append(self.pipeline_frame(result, label=str(k)))
        return pd.DataFrame(rows), pd.concat(traces, ignore_index=True)

    # Brute force

    def _lambda_grid(self, lambda_ref: Optional[float]) -> np.ndarray:
        grid = self.agent.grid
        if lambda_ref:
            width = float(self.settings["band_halfwidth"])
            band = np.linspace(lambda_ref * (1 - width), lambda_ref * (1 + width), int(self.settings["band_points"]))
            grid = np.union1d(grid, np.append(band, lambda_ref))
        return grid

    def _score(self, values: np.ndarray, band: np.ndarray, cost: np.ndarray, grid: np.ndarray):
        return score_rows(values, band, cost, grid, float(self.agent.payoff_tol),
                          float(self.agent.settings["participation_tol"]))

    def _score_codes(self, start: int, stop: int, cells: int, levels: int, band: np.ndarray,
                     cost: np.ndarray, grid: np.ndarray, k: int):
        values = decode_levels(np.arange(start, stop), cells, levels)
        chosen, best = self._score(values, band, cost, grid)
        keep = top_candidates(chosen, best, values, k)
        return values[keep], chosen[keep], best[keep]

    def _enumerate(self, cells: int, levels: int, band: np.ndarray, cost: np.ndarray,
                   grid: np.ndarray) -> np.ndarray:
        total = levels ** cells
        chunk = int(self.settings["brute_force_chunk"])
        k = int(self.settings["brute_force_refine_top"])
        starts = range(0, total, chunk)
        parts = Parallel(n_jobs=self.threads, prefer="threads")(
            delayed(self._score_codes)(s, min(s + chunk, total), cells, levels, band, cost, grid, k)
            for s in tqdm(starts, disable=not self.show_progress, desc="brute force"))
        values = np.vstack([p[0] for p in parts])
        chosen = np.concatenate([p[1] for p in parts])
        best = np.concatenate([p[2] for p in parts])
        return values[top_candidates(chosen, best, values, k)]

    def _ascend(self, start: np.ndarray, levels: int, band: np.ndarray, cost: np.ndarray,
                grid: np.ndarray) -> Tuple[np.ndarray, float, float]:
        level_values = np.arange(levels) / (levels - 1)
        current = start.copy()
        chosen, best = self._score(current[None, :], band, cost, grid)
        key = (float(chosen[0]), float(best[0]))
        for _ in range(int(self.settings["max_sweeps"])):
            improved = False
            for j in range(len(current)):
                trial = np.repeat(current[None, :], levels, axis=0)
                trial[:, j] = level_values
                chosen, best = self._score(trial, band, cost, grid)
                i = top_candidates(chosen, best, trial, 1)[0]
                if chosen[i] > key[0] or (chosen[i] == key[0] and best[i] > key[1] + 1e-12):
                    current, key, improved = trial[i].copy(), (float(chosen[i]), float(best[i])), True
            if not improved:
                break
        return current, key[0], key[1]

    def _coordinate_ascent(self, cells: int, levels: int, band: np.ndarray, cost: np.ndarray,
                           grid: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        starts = [np.ones(cells)] + [rng.integers(0, levels, cells) / (levels - 1)
                                     for _ in range(int(self.settings["restarts"]))]
        runs = Parallel(n_jobs=self.threads, prefer="threads")(
            delayed(self._ascend)(s, levels, band, cost, grid)
            for s in tqdm(starts, disable=not self.show_progress, desc="restarts"))
        values = np.array([r[0] for r in runs])
        values, first = np.unique(values, axis=0, return_index=True)
        chosen = np.array([runs[i][1] for i in first])
        best = np.array([runs[i][2] for i in first])
        return values[top_candidates(chosen, best, values, int(self.settings["brute_force_refine_top"]))]

    def _search(self, cells: int, levels: int, band: np.ndarray, cost: np.ndarray, grid: np.ndarray,
                rng: Optional[np.random.Generator]) -> Tuple[np.ndarray, str]:
        if cells < 1 or levels < 2:
            raise ConfigError(f"Brute force needs at least one cell and two value levels, got {cells}, {levels}")
        if cells <= EXHAUSTIVE_MAX_CELLS and levels ** cells <= EXHAUSTIVE_MAX_CANDIDATES:
            return self._enumerate(cells, levels, band, cost, grid), "exhaustive"
        self.logger.info(f"{levels}^{cells} candidates: coordinate ascent from random restarts")
        return self._coordinate_ascent(cells, levels, band, cost, grid, rng or make_rng(Config.SEED)), \
            "coordinate_ascent"

    def brute_force_best_transfer(self, c: CostFunction, grid_cells: int, value_levels: int,
                                  x_max: Optional[float] = None, lambda_ref: Optional[float] = None,
                                  rng: Optional[np.random.Generator] = None) -> Dict[str, Any]:
        """
        Symmetric step transfers on [0, x_max] with quantized values; the one
        inducing the highest precision (then payoff, then lexicographically
        smallest values). Candidates are scored by truthful value on a lambda
        grid, the best few re-scored with the full strategic best response.
        """
        if self.density.dimension != 1:
            raise DimensionError("Brute force searches one-dimensional transfers")
        if x_max is None:
            scale = self.density.support_halfwidth if self.density.is_compact else self.density.noise_scale
            x_max = float(self.settings["brute_force_x_max_factor"]) * scale
        half_edges = np.linspace(0.0, x_max, grid_cells + 1)
        grid = self._lambda_grid(lambda_ref)
        band = band_matrix(self.density.cdf, self.agent.precision_map(grid), half_edges)
        cost = c(grid)
        pool, mode = self._search(grid_cells, value_levels, band, cost, grid, rng)

        refined = []
        for values in pool:
            t = Transfer.symmetric_cells(half_edges, values)
            resp = self.agent.best_response(t, c)
            refined.append((resp.lambda_star, resp.payoff, tuple(float(v) for v in values), t))
        refined.sort(key=lambda r: (-r[0], -r[1], r[2]))
        lam, payoff, values, t = refined[0]
        self.logger.info(f"Brute force ({mode}, {grid_cells} cells x {value_levels} levels): {t} induces {lam:.9g}")
        return {"t": t, "lambda": lam, "payoff": payoff, "values": list(values),
                "half_edges": half_edges.tolist(), "mode": mode, "x_max": x_max,
                "candidates": value_levels ** grid_cells}

    def _output_effort(self, m: OutputModel, c: CostFunction, edges: np.ndarray,
                       values: np.ndarray) -> Tuple[float, float]:
        grid = np.linspace(m.e_min, m.e_max, int(self.principal.settings["effort_grid_points"]))
        objective = lambda e: survival_band_matrix(m.survival, np.atleast_1d(e), edges).T @ values - c(e)
        e_best, v_best = largest_argmax(grid, objective, float(self.agent.payoff_tol))
        if v_best < -float(self.agent.settings["participation_tol"]):
            return 0.0, 0.0
        return e_best, v_best

    def brute_force_output_transfer(self, m: OutputModel, c: CostFunction, grid_cells: int, value_levels: int,
                                    y_max: Optional[float] = None, e_ref: Optional[float] = None,
                                    rng: Optional[np.random.Generator] = None) -> Dict[str, Any]:
        """Step transfers of output on [0, y_max) plus a last cell reaching +inf, ranked by induced effort."""
        y_max = float(y_max if y_max is not None else float(self.settings["output_y_max_factor"]) * m.e_max)
        edges = np.append(np.linspace(0.0, y_max, grid_cells), np.inf)
        efforts = np.linspace(m.e_min, m.e_max, int(self.principal.settings["effort_grid_points"]))
        if e_ref:
            width = float(self.settings["band_halfwidth"])
            dense = np.linspace(e_ref * (1 - width), min(e_ref * (1 + width), m.e_max), int(self.settings["band_points"]))
            efforts = np.union1d(efforts, np.append(dense, e_ref))
        band = survival_band_matrix(m.survival, efforts, edges)
        pool, mode = self._search(grid_cells, value_levels, band, c(efforts), efforts, rng)

        refined = []
        for values in pool:
            effort, payoff = self._output_effort(m, c, edges, values)
            refined.append((effort, payoff, tuple(float(v) for v in values)))
        refined.sort(key=lambda r: (-r[0], -r[1], r[2]))
        effort, payoff, values = refined[0]
        self.logger.info(f"Output brute force ({mode}): values {values} induce effort {effort:.9g}")
        return {"effort": effort, "payoff": payoff, "values": list(values), "edges": edges.tolist(),
                "mode": mode, "candidates": value_levels ** grid_cells}

    # Counterexample

    def _band_mass(self, lam: float, center: float, half: float) -> float:
        return 2.0 * float(self.density.cdf(lam * (center + half)) - self.density.cdf(lam * (center - half)))

    def build_counterexample(self, lambda_ref: float, d_ref: float, x1: float, x2: float,
                             delta1: Optional[float] = None) -> Dict[str, Any]:
        """
        Move probability mass of the cutoff d_ref from a high-elasticity band
        at |x| = x1 / lambda_ref to a low-elasticity band at x2 / lambda_ref.
        Masses match at lambda_ref, so the truthful value is unchanged there
        while its slope in lambda strictly rises.
        """
        if self.density.dimension != 1:
            raise DimensionError("The counterexample is built in dimension one")
        if min(lambda_ref, d_ref, x1, x2) <= 0:
            raise DomainError("Counterexample arguments must be positive")
        eta1, eta2 = elasticity(self.density, x1), elasticity(self.density, x2)
        if not eta1 > eta2 + float(self.settings["elasticity_margin"]):
            raise PreconditionError(f"Elasticity ordering violated: eta({x1})={eta1:.6g}, eta({x2})={eta2:.6g}")
        boundary = lambda_ref * d_ref
        if not x1 < boundary <= x2:
            raise PreconditionError(f"Need x1 < lambda*d = {boundary:.6g} <= x2, got x1={x1}, x2={x2}")
        if self.density.is_compact and x2 >= self.density.support_halfwidth:
            raise PreconditionError(f"x2={x2} lies outside the support")

        c1, c2 = x1 / lambda_ref, x2 / lambda_ref
        room = c2 - d_ref
        if self.density.is_compact:
            room = min(room, self.density.support_halfwidth / lambda_ref - c2)
        delta1 = float(self.settings["counterexample_delta_factor"]) * c1 if delta1 is None else float(delta1)
        delta2 = None
        for attempt in range(int(self.settings["counterexample_retries"]) + 1):
            if delta1 < c1 and c1 + delta1 < d_ref:
                target = self._band_mass(lambda_ref, c1, delta1)
                if room > 0 and self._band_mass(lambda_ref, c2, room) >= target:
                    delta2 = brentq(lambda h: self._band_mass(lambda_ref, c2, h) - target, 0.0, room,
                                    xtol=1e-15, maxiter=200)
                    break
            self.logger.debug(f"Exterior band escapes the support with delta1={delta1:.6g}; shrinking")
            delta1 *= 0.5
        if delta2 is None:
            raise PreconditionError("No exterior band fits the support after shrinking delta1")

        holes = Transfer([-c1 - delta1, -c1 + delta1, c1 - delta1, c1 + delta1], [1.0, 0.0, 1.0])
        bumps = Transfer([-c2 - delta2, -c2 + delta2, c2 - delta2, c2 + delta2], [1.0, 0.0, 1.0])
        # DomainError here would mean a band overlaps the wrong side of the cutoff
        t = Transfer.cutoff(d_ref).combine(holes, lambda a, b: a - b).combine(
            bumps, lambda a, b: a + b, kind="counterexample")

        mass1 = self._band_mass(lambda_ref, c1, delta1)
        mass2 = self._band_mass(lambda_ref, c2, delta2)
        if abs(mass1 - mass2) > MASS_MATCH_TOL:
            self.logger.warning(f"Band masses differ by {abs(mass1 - mass2):.3g}")

        h = float(self.settings["fd_step"])
        gap = lambda lam: (float(self.agent.expected_transfer_truthful(lam, t))
                           - self.agent.expected_transfer_cutoff(lam, d_ref))
        slope_fd = (gap(lambda_ref + h) - gap(lambda_ref - h)) / (2 * h)
        edges, pdf = t.edges, self.density.pdf(lambda_ref * t.edges)
        slope_closed = float(np.diff(edges * pdf) @ t.values - 2.0 * d_ref * self.density.pdf(boundary))
        if slope_fd <= 0:
            self.logger.warning(f"Slope gap {slope_fd:.6g} is not positive")
        self.logger.info(f"Counterexample: delta1={delta1:.6g}, delta2={delta2:.6g}, slope gap {slope_fd:.6g}")
        return {"t": t, "delta1": delta1, "delta2": float(delta2), "x1": x1, "x2": x2,
                "mass1": mass1, "mass2": mass2, "slope_gap_fd": slope_fd, "slope_gap_closed": slope_closed,
                "truthful_at_ref": self.agent.verify_truthful_report(t, lambda_ref)}

    def _counterexample_pair(self, product: float) -> Tuple[float, float]:
        """Bands from the largest elasticity drop, pulled halfway toward the cutoff boundary."""
        exposed = self.principal.profile(1).check_exposed(product)
        if exposed["exposed"]:
            raise PreconditionError(f"The pair with lambda*d={product:.6g} is exposed; no counterexample exists")
        x1, x2 = exposed["x1"], exposed["x2"]
        inner, outer = 0.5 * (x1 + product), 0.5 * (x2 + product)
        margin = float(self.settings["elasticity_margin"])
        if elasticity(self.density, inner) > elasticity(self.density, outer) + margin:
            return inner, outer
        return x1, x2

    # Checks

    def cross_derivative_check(self, lam: float, d: float, dim: Optional[int] = None) -> Dict[str, Any]:
        """d^2 E / d lambda d d by finite differences next to n V_n phi(r) r^(n-1) (n - eta(r)), r = lambda d."""
        n = self.density.dimension
        if dim is not None and int(dim) != n:
            raise DimensionError(f"Requested dimension {dim} but the density has dimension {n}")
        if lam <= 0 or d <= 0:
            raise DomainError(f"Need positive lambda and d, got {lam}, {d}")
        h = float(self.settings["fd_step"])
        value = lambda l, x: self.agent.expected_transfer_cutoff(l, x)
        lo, hi = (lam - h) * (d - h), (lam + h) * (d + h)
        kink = any(lo <= k <= hi for k in self.density.kinks if k > 0) or lam <= h or d <= h
        if kink:
            self.logger.warning(f"lambda*d={lam * d:.6g} sits at a kink; one-sided differences")
            fd = (value(lam + h, d + h) - value(lam + h, d) - value(lam, d + h) + value(lam, d)) / h ** 2
        else:
            fd = (value(lam + h, d + h) - value(lam + h, d - h) - value(lam - h, d + h)
                  + value(lam - h, d - h)) / (4 * h * h)
        r = lam * d
        weight = float(self.density.radial_weight(r))
        closed = 0.0 if weight == 0 else weight * (n - elasticity(self.density, r))
        return {"fd": float(fd), "closed_form": float(closed), "kink": kink}

    def refute(self, lambda_ref: float, d_ref: float, kappa: Optional[float] = None,
               x1: Optional[float] = None, x2: Optional[float] = None, grid_cells: int = 8,
               value_levels: int = 2, rng: Optional[np.random.Generator] = None) -> Dict[str, Any]:
        """Under the tangent cost at (lambda_ref, d_ref), compare the best cutoff with non-cutoff transfers."""
        c = self.tangent_cost(lambda_ref, d_ref, kappa)
        at_ref = self.agent.best_response(Transfer.cutoff(d_ref), c)
        scan = self.principal.best_cutoff_scan(c)
        best_cutoff = max(scan["lambda"], at_ref.lambda_star)
        if x1 is None or x2 is None:
            x1, x2 = self._counterexample_pair(lambda_ref * d_ref)
        counter = self.build_counterexample(lambda_ref, d_ref, x1, x2)
        counter_resp = self.agent.best_response(counter["t"], c)
        brute = self.brute_force_best_transfer(c, grid_cells, value_levels,
                                               x_max=self.density.scan_limit / lambda_ref,
                                               lambda_ref=lambda_ref, rng=rng)
        counter_margin = counter_resp.lambda_star - best_cutoff
        brute_margin = brute["lambda"] - best_cutoff
        refuted = counter_margin > 0 and brute_margin > 0
        log = self.logger.info if refuted else self.logger.warning
        log(f"Refutation margins: counterexample {counter_margin:.6g}, brute force {brute_margin:.6g}")
        return {"lambda_ref": lambda_ref, "d_ref": d_ref, "kappa": c.params["kappa"],
                "cutoff_at_ref_lambda": at_ref.lambda_star, "best_cutoff_d": scan["d"],
                "best_cutoff_lambda": best_cutoff,
                "counterexample": {k: v for k, v in counter.items() if k != "t"},
                "counterexample_lambda": counter_resp.lambda_star, "counterexample_margin": counter_margin,
                "brute_force_lambda": brute["lambda"], "brute_force_margin": brute_margin,
                "brute_force_values": brute["values"], "brute_force_mode": brute["mode"],
                "refuted": refuted, "transfers": {"counterexample": counter["t"], "brute_force": brute["t"]}}

    def certify(self, c: CostFunction, grid_cells: int = 8, value_levels: int = 2, x_max: Optional[float] = None,
                rng: Optional[np.random.Generator] = None) -> Dict[str, Any]:
        """No searched transfer may induce more than the optimal cutoff's precision plus the tolerance."""
        optimum = self.principal.optimal_cutoff(c)
        brute = self.brute_force_best_transfer(c, grid_cells, value_levels, x_max=x_max,
                                               lambda_ref=optimum.lambda_star or None, rng=rng)
        excess = brute["lambda"] - optimum.lambda_star
        certified = excess <= float(self.settings["certify_tol"])
        if not certified:
            self.logger.warning(f"Brute force beats the optimal cutoff by {excess:.6g}")
        return {"certified": certified, "excess": excess, "solve": optimum.model_dump(),
                "brute_force_lambda": brute["lambda"], "brute_force_values": brute["values"],
                "brute_force_mode": brute["mode"], "candidates": brute["candidates"],
                "brute_force_is_cutoff": brute["t"].is_cutoff or len(brute["t"].values) == 0}

    def certify_output(self, m: OutputModel, c: CostFunction, grid_cells: int = 8, value_levels: int = 2,
                       rng: Optional[np.random.Generator] = None) -> Dict[str, Any]:
        classic = self.principal.solve_classic_pa(m, c)
        brute = self.brute_force_output_transfer(m, c, grid_cells, value_levels, e_ref=classic.e_star, rng=rng)
        excess = brute["effort"] - classic.e_star
        certified = excess <= float(self.settings["certify_tol"])
        if not certified:
            self.logger.warning(f"Output brute force beats the quota contract by {excess:.6g}")
        return {"certified": certified, "excess": excess, "classic": classic.model_dump(),
                "brute_force_effort": brute["effort"], "brute_force_values": brute["values"],
                "brute_force_mode": brute["mode"]}
