import logging
from typing import Any, Dict, Optional

import numpy as np
from scipy import stats
from scipy.integrate import cumulative_trapezoid, trapezoid

from utils.errors import ConfigError, DomainError

logger = logging.getLogger(__name__)


class OutputModel:
    """
    Output y >= 0 with density g(y; e) given effort e. Effort zero is the
    degenerate point mass at y = 0 for the parametric families.
    """

    def __init__(self, family: str = "exponential_mean_e", sigma: float = 1.0, e_max: float = 5.0,
                 y_grid=None, e_grid=None, table=None):
        self.family = family
        self.sigma = float(sigma)
        if family in ("exponential_mean_e", "lognormal_scale_e"):
            self.e_min, self.e_max = 0.0, float(e_max)
            self.y_max = 10.0 * self.e_max
        elif family == "tabulated":
            self._init_table(y_grid, e_grid, table)
        else:
            raise ConfigError(f"Unknown output model family: {family}")

    def __repr__(self) -> str:
        return f"OutputModel(family={self.family!r}, e=[{self.e_min}, {self.e_max}])"

    def _init_table(self, y_grid, e_grid, table) -> None:
        if y_grid is None or e_grid is None or table is None:
            raise ConfigError("tabulated output model needs y_grid, e_grid and table")
        self.y_grid = np.asarray(y_grid, dtype=float)
        self.e_grid = np.asarray(e_grid, dtype=float)
        g = np.asarray(table, dtype=float)
        if g.shape != (len(self.e_grid), len(self.y_grid)):
            raise ConfigError(f"table must have shape (len(e_grid), len(y_grid)), got {g.shape}")
        if np.any(np.diff(self.y_grid) <= 0) or np.any(np.diff(self.e_grid) <= 0) or self.y_grid[0] < 0:
            raise ConfigError("output grids must be increasing and y_grid nonnegative")
        if np.any(g < 0):
            raise ConfigError("output densities must be nonnegative")
        mass = trapezoid(g, self.y_grid, axis=1)
        self.table = g / mass[:, None]
        cumulative = cumulative_trapezoid(self.table, self.y_grid, axis=1, initial=0.0)
        self._survival_table = np.clip(1.0 - cumulative, 0.0, 1.0)
        self.e_min, self.e_max = float(self.e_grid[0]), float(self.e_grid[-1])
        self.y_max = float(self.y_grid[-1])

    def pdf(self, y, e):
        y = np.asarray(y, dtype=float)
        e = np.asarray(e, dtype=float)
        if np.any(e <= 0) and self.family != "tabulated":
            raise DomainError("Output density is degenerate at zero effort")
        if self.family == "exponential_mean_e":
            return np.where(y >= 0, np.exp(-y / e) / e, 0.0)
        if self.family == "lognormal_scale_e":
            return stats.lognorm.pdf(y, s=self.sigma, scale=e)
        return self._interp_table(self.table, y, e, left=0.0, right=0.0)

    def survival(self, y, e):
        """P(output >= y | e), broadcasting y against e."""
        y, e = np.broadcast_arrays(np.asarray(y, dtype=float), np.asarray(e, dtype=float))
        if self.family == "tabulated":
            return self._interp_table(self._survival_table, y, e, left=1.0, right=0.0)
        positive = e > 0
        safe_e = np.where(positive, e, 1.0)
        if self.family == "exponential_mean_e":
            tail = np.exp(-np.maximum(y, 0.0) / safe_e)
        else:
            tail = stats.lognorm.sf(np.maximum(y, 0.0), s=self.sigma, scale=safe_e)
        return np.where(positive, np.where(y <= 0, 1.0, tail), (y <= 0).astype(float))

    def _interp_table(self, table, y, e, left: float, right: float) -> np.ndarray:
        """Interpolate a (len(e_grid), len(y_grid)) table in y per row, then linearly in e."""
        y, e = np.broadcast_arrays(np.asarray(y, dtype=float), np.asarray(e, dtype=float))
        flat_y, flat_e = y.ravel(), e.ravel()
        by_row = np.array([np.interp(flat_y, self.y_grid, row, left=left, right=right) for row in table])
        out = np.array([np.interp(flat_e[i], self.e_grid, by_row[:, i]) for i in range(len(flat_e))])
        return out.reshape(y.shape)

    def check_mlrp(self, y_points: int = 60, e_points: int = 40, tol: float = 1e-7) -> Dict[str, Any]:
        """g(y2; e) / g(y1; e) nondecreasing in e for y1 <= y2: increasing differences of log g."""
        if self.family == "tabulated":
            y, e, g = self.y_grid, self.e_grid, self.table
        else:
            y = np.linspace(self.y_max / y_points, self.y_max, y_points)
            e = np.linspace(self.e_max / e_points, self.e_max, e_points)
            g = self.pdf(y[None, :], e[:, None])
        with np.errstate(divide="ignore"):
            log_g = np.log(g)
        dy = np.diff(log_g, axis=1)
        gap = dy[1:, :] - dy[:-1, :]
        with np.errstate(invalid="ignore"):
            bad = np.nan_to_num(gap < -tol, nan=False)
        if not np.any(bad):
            return {"mlrp": True, "witness": None}
        i, j = np.unravel_index(int(np.argmax(bad)), bad.shape)
        return {"mlrp": False, "witness": {"y1": float(y[j]), "y2": float(y[j + 1]),
                                           "e1": float(e[i]), "e2": float(e[i + 1])}}


def build_output_model(family: str = "exponential_mean_e", sigma: float = 1.0, e_max: float = 5.0,
                       y_grid=None, e_grid=None, table=None) -> OutputModel:
    return OutputModel(family=family, sigma=sigma, e_max=e_max, y_grid=y_grid, e_grid=e_grid, table=table)
