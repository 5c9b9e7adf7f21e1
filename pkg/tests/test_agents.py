"""
Tests for the information agent, the principal's solver and the oracle.
"""

import numpy as np
import pytest
from scipy import stats

from agents.information_agent.agent import InformationAgent
from agents.information_agent.utils import (gaussian_prior_precision, offset_grid, step_values,
                                            unobserved_state_precision)
from agents.oracle_agent.agent import OracleAgent
from agents.oracle_agent.utils import decode_levels, score_rows
from agents.principal_agent.agent import PrincipalAgent
from agents.principal_agent.utils import bisect_predicate, scan_grid
from models.costs import CostFunction
from models.densities import gaussian
from models.output import build_output_model
from models.transfers import Transfer
from utils.errors import (ConfigError, DimensionError, DomainError, InfeasibleContractError,
                          PreconditionError)
from utils.helpers import make_rng

D_STAR_GAUSSIAN = 0.7187
LAMBDA_STAR_GAUSSIAN = 1.3914


class TestInformationAgent:
    """Tests for expected transfers and the agent's best response."""

    def test_expected_transfer_cutoff(self, gaussian_agent):
        """E(lambda; d) = 2 Phi(lambda d) - 1."""
        assert gaussian_agent.expected_transfer_cutoff(1.0, 1.0) == pytest.approx(0.682689492, abs=1e-9)
        assert gaussian_agent.expected_transfer_cutoff(2.0, 0.0) == 0.0
        with pytest.raises(DomainError):
            gaussian_agent.expected_transfer_cutoff(0.0, 1.0)
        with pytest.raises(DimensionError):
            gaussian_agent.expected_transfer_cutoff(1.0, 1.0, dim=2)

    def test_truthful_step_transfer(self, gaussian_agent):
        """Truthful value of a step transfer is the weighted sum of cell probabilities."""
        t = Transfer.symmetric_cells([0.0, 1.0, 2.0], [1.0, 0.5])
        expected = (2 * stats.norm.cdf(1.0) - 1) + 0.5 * 2 * (stats.norm.cdf(2.0) - stats.norm.cdf(1.0))
        assert gaussian_agent.expected_transfer_truthful(1.0, t) == pytest.approx(expected, abs=1e-12)

    def test_strategic_offset_undoes_shift(self, gaussian_agent):
        """A cutoff shifted by 0.3 is best met by reporting 0.3 lower."""
        t = Transfer.cutoff(1.0).shifted(0.3)
        value = gaussian_agent.expected_transfer_strategic(1.0, t)
        assert value.report_offset == pytest.approx(-0.3, abs=1e-6)
        assert value.value == pytest.approx(gaussian_agent.expected_transfer_cutoff(1.0, 1.0), abs=1e-10)

    def test_best_response_gaussian_cutoff(self, gaussian_agent, quadratic_cost):
        """d = 1 under lambda^2 / 8: 2 phi(lambda) = lambda / 4 at lambda ~ 1.326."""
        resp = gaussian_agent.best_response(Transfer.cutoff(1.0), quadratic_cost)
        assert resp.participated
        assert resp.lambda_star == pytest.approx(1.326, abs=2e-3)
        assert resp.payoff == pytest.approx(0.595, abs=2e-3)
        assert resp.report_offset == 0.0

    def test_zero_transfer_induces_nothing(self, gaussian_agent, quadratic_cost):
        resp = gaussian_agent.best_response(Transfer.zero(), quadratic_cost)
        assert resp.lambda_star == 0.0
        assert resp.payoff == 0.0

    def test_fixed_cost_blocks_participation(self, gaussian_agent):
        resp = gaussian_agent.best_response(Transfer.cutoff(0.1), CostFunction.affine_power(c0=0.5))
        assert not resp.participated
        assert resp.ir_value < 0

    def test_costless_precision_is_unbounded(self, gaussian_agent):
        resp = gaussian_agent.best_response(Transfer.cutoff(1.0), CostFunction.power(a=0.0))
        assert resp.unbounded
        assert resp.lambda_star == pytest.approx(gaussian_agent.lambda_max)

    def test_cutoffs_induce_truthful_reports(self, gaussian_agent):
        """Strategic offset is zero for cutoff transfers at random precisions."""
        rng = make_rng(11)
        for d, lam in zip(rng.uniform(0.1, 3.0, 20), rng.uniform(0.1, 5.0, 20)):
            t = Transfer.cutoff(float(d))
            value = gaussian_agent.expected_transfer_strategic(float(lam), t, assume_truthful=False)
            assert abs(value.report_offset) <= 1e-6
            assert gaussian_agent.verify_truthful_report(t, float(lam))

    def test_monte_carlo_agrees_with_closed_form(self, gaussian_agent):
        t = Transfer.symmetric_cells([0.0, 0.5, 1.5], [1.0, 0.4])
        estimate = gaussian_agent.monte_carlo_transfer(t, 1.3, 40000, make_rng(5))
        exact = gaussian_agent.expected_transfer_truthful(1.3, t)
        assert abs(estimate["mean"] - exact) <= 4 * estimate["stderr"]

    def test_simulated_signals(self, gaussian_agent):
        frame = gaussian_agent.simulate_signals(2.0, 4.0, 100, make_rng(1), report_offset=0.1)
        assert list(frame.columns) == ["theta", "eps", "signal", "report", "lambda"]
        assert np.allclose(frame["signal"], 2.0 + frame["eps"] / 4.0)
        assert np.allclose(frame["report"] - frame["signal"], 0.1)


    def test_prior_precision_is_free(self, gaussian_density):
        """With a Gaussian prior, lambda = 0 still pays E(lambda0; d) and beats costly precision at wide cutoffs."""
        agent = InformationAgent(gaussian_density, gaussian_prior_precision(0.5))
        cost = CostFunction.affine_power(c0=0.05, a=0.125, p=2.0)
        wide = agent.best_response(Transfer.cutoff(4.0), cost)
        assert wide.lambda_star == 0.0
        assert wide.participated
        assert wide.payoff == pytest.approx(2 * stats.norm.cdf(2.0) - 1, abs=1e-9)
        assert wide.ir_value == pytest.approx(wide.payoff)
        narrow = agent.best_response(Transfer.cutoff(1.0), cost)
        assert narrow.lambda_star > 0
        assert narrow.payoff >= 2 * stats.norm.cdf(0.5) - 1

    def test_unobserved_state_prior_is_free(self, gaussian_density):
        """Lambda(0) = (1/lambda_p^2 + 1/lambda0^2)^(-1/2) is paid without acquiring anything."""
        agent = InformationAgent(gaussian_density, unobserved_state_precision(2.0, 0.5))
        resp = agent.best_response(Transfer.cutoff(4.0), CostFunction.affine_power(c0=0.05, a=0.125, p=2.0))
        assert resp.lambda_star == 0.0
        assert resp.participated
        assert resp.payoff == pytest.approx(2 * stats.norm.cdf(4.0 / np.sqrt(4.25)) - 1, abs=1e-9)

class TestInformationAgentUtils:
    """Tests for precision maps and vectorized transfer values."""

    def test_precision_maps(self):
        assert float(gaussian_prior_precision(1.0)(0.0)) == pytest.approx(1.0)
        assert float(gaussian_prior_precision(3.0)(4.0)) == pytest.approx(5.0)
        assert float(unobserved_state_precision(1e3)(2.0)) == pytest.approx(2.0, rel=1e-5)
        assert float(unobserved_state_precision(1.0)(0.0)) == 0.0
        assert float(unobserved_state_precision(1.0, 1.0)(1.0)) == pytest.approx(np.sqrt(2.0 / 3.0))

    def test_step_values_vectorized(self):
        lams = np.array([0.5, 1.0])
        values = step_values(stats.norm.cdf, lams, np.array([-1.0, 1.0]), np.array([1.0]))
        assert np.allclose(values, 2 * stats.norm.cdf(lams) - 1)

    def test_offset_grid(self):
        grid = offset_grid(1.0, 0.1, 4001)
        assert 0.0 in grid
        assert grid[0] == -2.0 and grid[-1] == 2.0
        assert len(offset_grid(1.0, 2.0, 4001)) >= 65
        assert np.array_equal(offset_grid(0.0, 0.1, 4001), np.zeros(1))


class TestPrincipalAgent:
    """Tests for the optimal cutoff and its variants."""

    def test_gaussian_optimal_cutoff(self, gaussian_principal, quadratic_cost):
        """d* = sqrt(1 / (8 phi(1))) and lambda* d* = 1."""
        result = gaussian_principal.optimal_cutoff(quadratic_cost)
        assert result.region == "complement_to_boundary"
        assert result.d_bar == 0.0
        assert result.d_star == pytest.approx(D_STAR_GAUSSIAN, abs=1e-3)
        assert result.lambda_star == pytest.approx(LAMBDA_STAR_GAUSSIAN, abs=1e-3)
        assert result.boundary_product == pytest.approx(1.0, abs=1e-3)
        assert not result.best_cutoff_only

    def test_matches_grid_search(self, gaussian_principal, quadratic_cost):
        """The solved cutoff induces the highest precision among scanned cutoffs."""
        result = gaussian_principal.optimal_cutoff(quadratic_cost)
        scan = gaussian_principal.best_cutoff_scan(quadratic_cost)
        assert scan["lambda"] == pytest.approx(result.lambda_star, abs=1e-3)
        assert scan["d"] == pytest.approx(result.d_star, abs=1e-2)

    def test_uniform_optimal_cutoff(self, uniform_principal, quadratic_cost):
        """lambda(d) = 4d up to the boundary 4 d^2 = 1."""
        result = uniform_principal.optimal_cutoff(quadratic_cost)
        assert result.d_star == pytest.approx(0.5, abs=1e-3)
        assert result.lambda_star == pytest.approx(2.0, abs=1e-3)

    def test_fixed_cost_raises_participation_cutoff(self, gaussian_principal):
        cost = CostFunction.affine_power(c0=0.2, a=0.125, p=2.0)
        d_bar = gaussian_principal.min_participation_cutoff(cost)
        assert d_bar > 0
        assert gaussian_principal.response(d_bar, cost).ir_value >= -1e-9

    def test_infeasible_contract(self, gaussian_principal):
        with pytest.raises(InfeasibleContractError):
            gaussian_principal.optimal_cutoff(CostFunction.affine_power(c0=2.0))

    def test_best_cutoff_only_without_iea(self, exp_inverse_density, quadratic_cost):
        result = PrincipalAgent(InformationAgent(exp_inverse_density)).optimal_cutoff(quadratic_cost)
        assert result.best_cutoff_only
        assert result.lambda_star > 0

    def test_cutoff_sweep(self, gaussian_principal, quadratic_cost):
        sweep = gaussian_principal.cutoff_sweep(quadratic_cost, np.linspace(0.2, 2.0, 10))
        assert list(sweep.columns) == ["d", "lambda", "payoff", "product", "participated"]
        assert sweep["participated"].all()

    def test_higher_dimension_boundary(self, quadratic_cost):
        """In R^2 the boundary is lambda d = sqrt(2)."""
        principal = PrincipalAgent(InformationAgent(gaussian(2)))
        result = principal.optimal_cutoff(quadratic_cost, dim=2)
        assert result.eta_inverse_n == pytest.approx(np.sqrt(2), abs=1e-8)
        assert result.boundary_product == pytest.approx(np.sqrt(2), abs=1e-3)
        with pytest.raises(DimensionError):
            principal.optimal_cutoff(quadratic_cost, dim=1)

    @pytest.mark.parametrize("k", [1.5, 2.0, 4.0])
    def test_comparative_statics_in_cost(self, gaussian_principal, quadratic_cost, k):
        """A steeper cost weakly raises d* and weakly lowers lambda*."""
        report = gaussian_principal.comparative_statics(quadratic_cost, quadratic_cost.scaled(k))
        assert report.hypothesis_holds
        assert report.prediction_holds
        assert report.second.d_star >= report.first.d_star - 1e-6
        assert report.second.lambda_star <= report.first.lambda_star + 1e-6

    def test_comparative_statics_without_hypothesis(self, gaussian_principal, quadratic_cost):
        report = gaussian_principal.comparative_statics(quadratic_cost.scaled(2.0), quadratic_cost)
        assert not report.hypothesis_holds
        assert report.prediction_holds is None

    def test_budget_equivalence(self, gaussian_principal, quadratic_cost):
        report = gaussian_principal.comparative_budget(quadratic_cost, 0.5)
        assert report.second.d_star >= report.first.d_star - 1e-6
        with pytest.raises(ConfigError):
            gaussian_principal.comparative_budget(quadratic_cost, 0.0)

    def test_noise_equivalence(self, gaussian_principal, quadratic_cost):
        """Noise k eps under c matches the base model under c(k lambda), precision scaled by k."""
        report = gaussian_principal.comparative_noise(quadratic_cost, 2.0)
        assert report.details["equivalence_holds"]
        assert report.prediction_holds

    def test_gaussian_prior_limit(self, gaussian_principal, quadratic_cost):
        base = gaussian_principal.optimal_cutoff(quadratic_cost)
        prior = gaussian_principal.solve_gaussian_prior(1e-3, quadratic_cost)
        assert prior.variant == "gaussian_prior"
        assert prior.d_star == pytest.approx(base.d_star, abs=1e-3)
        assert prior.lambda_star == pytest.approx(base.lambda_star, abs=1e-3)

    def test_unobserved_state_limit(self, gaussian_principal, quadratic_cost):
        base = gaussian_principal.optimal_cutoff(quadratic_cost)
        unobserved = gaussian_principal.solve_unobserved_state("uniform", None, 1e3, quadratic_cost)
        assert unobserved.d_star == pytest.approx(base.d_star, abs=1e-3)
        assert unobserved.lambda_star == pytest.approx(base.lambda_star, abs=1e-3)
        with pytest.raises(ConfigError):
            gaussian_principal.solve_unobserved_state("gaussian", None, 1.0, quadratic_cost)

    def test_variants_need_gaussian_noise(self, laplace_density, quadratic_cost):
        principal = PrincipalAgent(InformationAgent(laplace_density))
        with pytest.raises(PreconditionError):
            principal.solve_gaussian_prior(1.0, quadratic_cost)

    def test_classic_quota_contract(self, gaussian_principal, quadratic_cost):
        m = build_output_model("exponential_mean_e", e_max=5.0)
        result = gaussian_principal.solve_classic_pa(m, quadratic_cost)
        assert result.mlrp
        assert result.d_star > 0
        assert result.e_star > 0

    def test_classic_infeasible(self, gaussian_principal):
        m = build_output_model("exponential_mean_e", e_max=5.0)
        with pytest.raises(InfeasibleContractError):
            gaussian_principal.solve_classic_pa(m, CostFunction.affine_power(c0=2.0))


    def test_substitute_at_participation_cutoff(self, gaussian_principal):
        """A fixed cost of 0.5 pushes d_bar into the substitute region, so d* = d_bar and IR binds."""
        result = gaussian_principal.optimal_cutoff(CostFunction.affine_power(c0=0.5, a=0.125, p=2.0))
        assert result.region == "substitute_at_dbar"
        assert result.ir_binding
        assert result.d_star == result.d_bar
        assert result.d_star == pytest.approx(0.8129, abs=1e-3)
        assert result.payoff == pytest.approx(0.0, abs=1e-6)
        assert result.boundary_product >= 1.0 - 1e-7

    def test_response_rises_then_falls(self, gaussian_principal, quadratic_cost):
        """lambda(d) is nondecreasing below the boundary and nonincreasing above it."""
        d_star = gaussian_principal.optimal_cutoff(quadratic_cost).d_star
        below = gaussian_principal.cutoff_sweep(quadratic_cost, np.linspace(0.2, d_star, 15))
        above = gaussian_principal.cutoff_sweep(quadratic_cost, np.linspace(d_star, 3.0, 15))
        assert np.all(np.diff(below["lambda"]) >= -1e-6)
        assert np.all(np.diff(above["lambda"]) <= 1e-6)
        assert (below["product"].iloc[:-1] < 1.0).all()
        assert (above["product"].iloc[1:] > 1.0).all()

    def test_boundary_cutoff_is_smallest(self, gaussian_principal, quadratic_cost):
        """No scanned cutoff in [d_bar, d*) already reaches lambda(d) d >= 1."""
        result = gaussian_principal.optimal_cutoff(quadratic_cost)
        grid = scan_grid(result.d_bar, result.d_star, 128)
        for d in grid[grid < result.d_star - 1e-4]:
            assert gaussian_principal.product(float(d), quadratic_cost) < 1.0 - 1e-7

    def test_gaussian_prior_with_fixed_cost(self, gaussian_principal):
        """Prior precision makes every cutoff acceptable, and d* must beat staying uninformed."""
        cost = CostFunction.affine_power(c0=0.05, a=0.125, p=2.0)
        result = gaussian_principal.solve_gaussian_prior(0.5, cost)
        assert result.d_bar == 0.0
        assert result.boundary_reached
        assert result.lambda_star > 0
        assert result.boundary_product >= 1.0 - 1e-6
        assert result.payoff >= 2 * stats.norm.cdf(0.5 * result.d_star) - 1 - 1e-8

    def test_gaussian_prior_no_acquisition(self, gaussian_principal):
        """With c0 = 0.3 and lambda0 = 0.5 no cutoff makes acquiring precision worth it."""
        result = gaussian_principal.solve_gaussian_prior(0.5, CostFunction.affine_power(c0=0.3, a=0.125, p=2.0))
        assert result.lambda_star == 0.0
        assert not result.boundary_reached

class TestPrincipalAgentUtils:
    """Tests for scan and bisection helpers."""

    def test_scan_grid(self):
        grid = scan_grid(0.5, 10.0, 64)
        assert grid[0] == 0.5 and grid[-1] == pytest.approx(10.0)
        assert np.all(np.diff(grid) > 0)

    def test_bisect_predicate(self):
        x = bisect_predicate(0.0, 4.0, lambda v: v * v >= 2.0, 1e-10)
        assert x == pytest.approx(np.sqrt(2.0), abs=1e-9)


class TestOracleAgent:
    """Tests for the improvement pipeline, brute force and counterexample."""

    def test_augment_zero_transfer(self, gaussian_oracle):
        t = gaussian_oracle.augment_transfer(Transfer.zero(), 1.0)
        assert t.is_cutoff
        assert t.d == pytest.approx(1.0, abs=1e-8)

    def test_augment_keeps_wide_cutoff(self, gaussian_oracle):
        t = gaussian_oracle.augment_transfer(Transfer.cutoff(1.5), 1.0)
        assert t.is_cutoff
        assert t.d == 1.5

    def test_augment_half_budget(self, gaussian_oracle):
        t = gaussian_oracle.augment_transfer(Transfer([-2.0, 2.0], [0.5]), 1.0)
        assert np.allclose(t.edges, [-2.0, -1.0, 1.0, 2.0], atol=1e-8)
        assert np.allclose(t.values, [0.5, 1.0, 0.5])

    def test_augment_needs_symmetry(self, gaussian_oracle):
        with pytest.raises(PreconditionError):
            gaussian_oracle.augment_transfer(Transfer.cutoff(1.0).shifted(0.3), 1.0)

    def test_match_cutoff(self, gaussian_oracle, uniform_principal):
        assert gaussian_oracle.match_cutoff(1.0, 0.0).d == 0.0
        assert gaussian_oracle.match_cutoff(1.0, 0.682689).d == pytest.approx(1.0, abs=1e-5)
        uniform_oracle = OracleAgent(uniform_principal)
        assert uniform_oracle.match_cutoff(2.0, 0.5).d == pytest.approx(0.25, abs=1e-8)
        with pytest.raises(DomainError):
            gaussian_oracle.match_cutoff(1.0, 1.5)

    def test_pipeline_fixed_point(self, gaussian_oracle, quadratic_cost):
        """A cutoff in the substitute region maps to itself."""
        result = gaussian_oracle.improve_to_cutoff(Transfer.cutoff(1.0), quadratic_cost)
        assert result["d"] == pytest.approx(1.0, abs=1e-8)
        assert result["lambda_d"] == pytest.approx(result["lambda_t"], abs=1e-6)

    def test_pipeline_removes_shift(self, gaussian_oracle, quadratic_cost):
        result = gaussian_oracle.improve_to_cutoff(Transfer.cutoff(1.0).shifted(0.3), quadratic_cost)
        assert result["report_offset"] == pytest.approx(-0.3, abs=1e-6)
        assert result["d"] == pytest.approx(1.0, abs=1e-6)
        assert result["lambda_d"] >= result["lambda_t"] - 1e-6
        checks = result["trace"]["checks"]
        assert checks["equality_gap"] < 1e-9
        assert checks["truthful_below_strategic"] < 1e-9

    def test_pipeline_on_random_transfers(self, gaussian_oracle, quadratic_cost):
        """Every seeded random transfer is weakly beaten by its matched cutoff."""
        summary, traces = gaussian_oracle.improve_random(quadratic_cost, 5, 64, 3.0, make_rng(2024))
        assert summary["improved"].all()
        assert summary["symmetrization_gap"].max() < 1e-9
        assert set(traces["stage"]) >= {"input", "shifted", "symmetrized", "augmented", "cutoff"}

    def test_pipeline_refuses_without_iea(self, exp_inverse_oracle, quadratic_cost):
        with pytest.raises(PreconditionError):
            exp_inverse_oracle.improve_to_cutoff(Transfer.cutoff(0.5), quadratic_cost)

    def test_certify_gaussian(self, gaussian_oracle, quadratic_cost):
        """No 8-cell binary transfer beats the optimal cutoff."""
        report = gaussian_oracle.certify(quadratic_cost, grid_cells=8, value_levels=2)
        assert report["certified"]
        assert report["candidates"] == 256

    def test_certify_uniform(self, uniform_principal, quadratic_cost):
        report = OracleAgent(uniform_principal).certify(quadratic_cost, grid_cells=8, value_levels=2)
        assert report["certified"]

    def test_coordinate_ascent_mode(self, gaussian_oracle, quadratic_cost):
        """Large grids fall back to restarts and still find nothing better than the optimum."""
        result = gaussian_oracle.brute_force_best_transfer(quadratic_cost, grid_cells=20, value_levels=2,
                                                           lambda_ref=LAMBDA_STAR_GAUSSIAN, rng=make_rng(3))
        assert result["mode"] == "coordinate_ascent"
        assert result["lambda"] <= LAMBDA_STAR_GAUSSIAN + 1e-3

    def test_certify_output(self, gaussian_oracle, quadratic_cost):
        m = build_output_model("exponential_mean_e", e_max=5.0)
        report = gaussian_oracle.certify_output(m, quadratic_cost, grid_cells=8, value_levels=2)
        assert report["certified"]

    def test_counterexample_refused_for_gaussian(self, gaussian_oracle):
        with pytest.raises(PreconditionError):
            gaussian_oracle.build_counterexample(1.0, 0.5, 0.2, 0.8)

    def test_counterexample(self, exp_inverse_oracle):
        """Matched band masses and a strictly positive slope gap."""
        result = exp_inverse_oracle.build_counterexample(1.0, 0.5, 0.2, 0.8)
        assert result["delta1"] == pytest.approx(0.002)
        assert result["delta2"] == pytest.approx(0.085, abs=0.01)
        assert abs(result["mass1"] - result["mass2"]) < 1e-10
        assert result["slope_gap_fd"] > 0
        assert result["slope_gap_fd"] == pytest.approx(result["slope_gap_closed"], rel=1e-3)
        assert not result["t"].is_symmetric_unimodal()

    def test_refute(self, exp_inverse_oracle):
        """Both the counterexample and the brute force beat every cutoff under the tangent cost."""
        report = exp_inverse_oracle.refute(1.0, 0.5, kappa=0.05, x1=0.2, x2=0.8)
        assert report["best_cutoff_lambda"] == pytest.approx(1.0, abs=1e-3)
        assert report["counterexample_margin"] > 0
        assert report["brute_force_margin"] > 0
        assert report["refuted"]

    def test_tangent_cost(self, gaussian_oracle):
        c = gaussian_oracle.tangent_cost(1.0, 0.5)
        assert c(1.0) == pytest.approx(gaussian_oracle.agent.expected_transfer_cutoff(1.0, 0.5))
        assert c.limit_at_zero() == pytest.approx(0.05)

    @pytest.mark.parametrize("lam,d,sign", [(1.0, 1.0, 0), (0.5, 1.0, 1), (2.0, 1.0, -1)])
    def test_cross_derivative_gaussian(self, gaussian_oracle, lam, d, sign):
        check = gaussian_oracle.cross_derivative_check(lam, d)
        assert check["fd"] == pytest.approx(check["closed_form"], abs=1e-4)
        if sign == 0:
            assert abs(check["closed_form"]) < 1e-9
        else:
            assert np.sign(check["closed_form"]) == sign

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_cross_derivative_sign_law(self, n):
        """sign of d^2 E / d lambda d d equals sign(n - eta(lambda d)) in R^n."""
        oracle = OracleAgent(PrincipalAgent(InformationAgent(gaussian(n))))
        rng = make_rng(100 + n)
        checked = 0
        for lam, d in zip(rng.uniform(0.2, 2.0, 60), rng.uniform(0.2, 2.0, 60)):
            r = lam * d
            if abs(n - r * r) <= 0.05:
                continue
            check = oracle.cross_derivative_check(float(lam), float(d), dim=n)
            assert np.sign(check["fd"]) == np.sign(n - r * r)
            assert check["fd"] == pytest.approx(check["closed_form"], abs=1e-4)
            checked += 1
        assert checked > 30


    @pytest.mark.slow
    def test_pipeline_on_many_random_transfers(self, gaussian_oracle, quadratic_cost):
        summary, _ = gaussian_oracle.improve_random(quadratic_cost, 50, 64, 3.0, make_rng(2024))
        assert len(summary) == 50
        assert summary["improved"].all()

    @pytest.mark.slow
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_cross_derivative_sign_law_full(self, n):
        oracle = OracleAgent(PrincipalAgent(InformationAgent(gaussian(n))))
        rng = make_rng(500 + n)
        for lam, d in zip(rng.uniform(0.2, 2.0, 500), rng.uniform(0.2, 2.0, 500)):
            r = lam * d
            if abs(n - r * r) <= 1e-2:
                continue
            check = oracle.cross_derivative_check(float(lam), float(d), dim=n)
            assert np.sign(check["fd"]) == np.sign(n - r * r)
            assert check["fd"] == pytest.approx(check["closed_form"], abs=1e-4)

class TestOracleUtils:
    """Tests for candidate decoding and scoring."""

    def test_decode_levels(self):
        values = decode_levels(np.arange(4), 2, 2)
        assert np.array_equal(values, [[0, 0], [0, 1], [1, 0], [1, 1]])
        assert np.allclose(decode_levels(np.array([5]), 2, 3), [[0.5, 1.0]])

    def test_score_rows_prefers_largest_argmax(self):
        grid = np.array([1.0, 2.0, 3.0])
        band = np.array([[0.0, 1.0, 1.0]])
        chosen, best = score_rows(np.array([[1.0], [0.0]]), band, np.zeros(3), grid, 1e-12, 1e-12)
        assert chosen[0] == 3.0
        assert best[0] == 1.0
        assert chosen[1] == 3.0
