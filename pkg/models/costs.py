import logging
from typing import Callable, Dict, Optional

import numpy as np

from utils.errors import ConfigError
from utils.helpers import read_two_column_csv

logger = logging.getLogger(__name__)


class CostFunction:
    """
    Cost of precision c(lambda) with c(0) = 0. Positive precisions are priced
    by `evaluator`; `zero_limit` is c(0+), which differs from c(0) only for
    fixed costs or the tangent construction.
    """

    def __init__(self, kind: str, evaluator: Callable[[np.ndarray], np.ndarray],
                 zero_limit: float = 0.0, params: Optional[Dict[str, float]] = None):
        self.kind = kind
        self._evaluator = evaluator
        self.zero_limit = float(zero_limit)
        self.params = dict(params or {})

    def __repr__(self) -> str:
        return f"CostFunction(kind={self.kind!r}, params={self.params})"

    def __call__(self, lam):
        arr = np.asarray(lam, dtype=float)
        positive = arr > 0
        safe = np.where(positive, arr, 1.0)
        out = np.where(positive, self._evaluator(safe), 0.0)
        if np.ndim(lam) == 0:
            return float(out)
        return out

    def limit_at_zero(self) -> float:
        return self.zero_limit

    # Constructors

    @classmethod
    def power(cls, a: float = 0.125, p: float = 2.0) -> "CostFunction":
        if a < 0 or p <= 0:
            raise ConfigError(f"power cost needs a >= 0 and p > 0, got a={a}, p={p}")
        return cls("power", lambda lam: a * lam ** p, 0.0, {"a": a, "p": p})

    @classmethod
    def affine_power(cls, c0: float = 0.0, a: float = 0.125, p: float = 2.0) -> "CostFunction":
        if c0 < 0 or a < 0 or p <= 0:
            raise ConfigError(f"affine_power cost needs c0, a >= 0 and p > 0, got c0={c0}, a={a}, p={p}")
        return cls("affine_power", lambda lam: c0 + a * lam ** p, c0, {"c0": c0, "a": a, "p": p})

    @classmethod
    def constant(cls, c0: float) -> "CostFunction":
        return cls.affine_power(c0=c0, a=0.0, p=1.0)

    @classmethod
    def tabulated(cls, points) -> "CostFunction":
        """Piecewise-linear through (lambda, cost); precisions beyond the last knot cost +inf."""
        table = np.asarray(points, dtype=float)
        if table.ndim != 2 or table.shape[1] != 2 or len(table) < 2:
            raise ConfigError("tabulated cost needs at least two (lambda, cost) pairs")
        table = table[np.argsort(table[:, 0])]
        if table[0, 0] < 0 or np.any(table[:, 1] < 0):
            raise ConfigError("tabulated cost needs nonnegative precisions and costs")
        if table[0, 0] == 0 and table[0, 1] != 0:
            raise ConfigError("tabulated cost must satisfy c(0) = 0")
        if table[0, 0] > 0:
            table = np.vstack([[0.0, 0.0], table])
        knots, costs = table[:, 0], table[:, 1]
        last = knots[-1]

        def evaluate(lam):
            return np.where(lam <= last, np.interp(lam, knots, costs), np.inf)

        return cls("tabulated", evaluate, 0.0, {"knots": float(len(knots)), "lambda_last": float(last)})

    @classmethod
    def from_csv(cls, path: str) -> "CostFunction":
        return cls.tabulated(read_two_column_csv(path))

    @classmethod
    def tangent(cls, expected_transfer: Callable[[np.ndarray], np.ndarray], lambda_ref: float,
                kappa: float) -> "CostFunction":
        """E(lambda; d*) + kappa (lambda - lambda*)^2 for lambda > 0: touches E(.; d*) only at lambda*."""
        def evaluate(lam):
            return expected_transfer(lam) + kappa * (lam - lambda_ref) ** 2
        return cls("tangent", evaluate, kappa * lambda_ref ** 2, {"lambda_ref": lambda_ref, "kappa": kappa})

    # Transformations

    def scaled(self, k: float) -> "CostFunction":
        """k * c; a budget of 1/k is equivalent to this cost with budget one."""
        base = self
        return CostFunction(f"{self.kind}*{k:g}", lambda lam: k * base._evaluator(lam),
                            k * self.zero_limit, {**self.params, "scale": k})

    def noise_scaled(self, k: float) -> "CostFunction":
        """c(k lambda): the cost of precision when the noise is multiplied by k."""
        base = self
        return CostFunction(f"{self.kind}(k*lambda)", lambda lam: base._evaluator(k * lam),
                            self.zero_limit, {**self.params, "noise_scale": k})

    def dominated_by(self, other: "CostFunction", grid: np.ndarray, tol: float = 1e-12) -> bool:
        return bool(np.all(self(grid) <= other(grid) + tol))

    def difference_nondecreasing(self, other: "CostFunction", grid: np.ndarray, tol: float = 1e-10) -> bool:
        """other - self nondecreasing on the grid."""
        gap = other(grid) - self(grid)
        finite = np.isfinite(gap)
        return bool(np.all(np.diff(gap[finite]) >= -tol))

    def is_convex(self, grid: np.ndarray, tol: float = 1e-10) -> bool:
        grid = np.sort(np.asarray(grid, dtype=float))
        values = self(grid)
        slopes = np.diff(values) / np.diff(grid)
        return bool(np.all(np.diff(slopes) >= -tol * np.maximum(1.0, np.abs(slopes[:-1]))))

    def describe(self) -> Dict[str, float]:
        return {"kind": self.kind, **self.params, "zero_limit": self.zero_limit}


def build_cost(kind: str, a: float = 0.125, p: float = 2.0, c0: float = 0.0,
               points=None, path: Optional[str] = None) -> CostFunction:
    if kind == "power":
        return CostFunction.power(a=a, p=p)
    if kind == "affine_power":
        return CostFunction.affine_power(c0=c0, a=a, p=p)
    if kind == "tabulated":
        if path is not None:
            return CostFunction.from_csv(path)
        return CostFunction.tabulated(points)
    raise ConfigError(f"Unknown cost kind: {kind}")
