import logging
from typing import Any, Dict, NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd

from models.densities import SignalDensity
from utils.constants import (COMPACT_SCAN_OVERSHOOT, ETA_INVERSE_TOL, ETA_MONOTONE_TOL,
                             ETA_SCAN_POINTS, ETA_SCAN_XMIN_FACTOR, FD_STEP)
from utils.errors import DomainError

logger = logging.getLogger(__name__)


class EtaInverse(NamedTuple):
    value: float
    overflow: bool


def elasticity(density: SignalDensity, x):
    """eta(x) = -x phi'(x) / phi(x) for x > 0, +inf where phi(x) = 0."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("Elasticity is defined for x > 0 only")
    pdf = density.pdf(arr)
    dpdf = density.dpdf(arr)
    with np.errstate(divide="ignore", invalid="ignore"):
        eta = np.where(pdf > 0, -arr * dpdf / np.where(pdf > 0, pdf, 1.0), np.inf)
    if np.ndim(x) == 0:
        return float(eta)
    return eta


def scan_grid(density: SignalDensity, points: int = ETA_SCAN_POINTS) -> np.ndarray:
    x_min = ETA_SCAN_XMIN_FACTOR * density.noise_scale
    x_max = density.support_halfwidth * COMPACT_SCAN_OVERSHOOT if density.is_compact else density.tail_point
    return np.geomspace(x_min, x_max, points)


class ElasticityProfile:
    """
    Elasticity of a density over a log-spaced scan, the threshold eta^-1(n)
    and the monotonicity conditions built on it.
    """

    def __init__(self, density: SignalDensity, n: Optional[float] = None,
                 scan_points: int = ETA_SCAN_POINTS, tol: float = ETA_MONOTONE_TOL):
        self.logger = logging.getLogger(__name__)
        self.density = density
        self.n = float(density.dimension if n is None else n)
        self.tol = tol
        self.grid = scan_grid(density, scan_points)
        self.values = elasticity(density, self.grid)

        inverse = self.eta_inverse(self.n)
        self.eta_inverse_n = inverse.value
        self.eta_inverse_overflow = inverse.overflow
        self.crossing_point = self._crossing_point(self.n)
        iea = self.check_iea(self.n)
        self.iea_holds = iea["iea_holds"]
        self.iea_witness = iea["witness"]
        self.global_mlrp, self.mlrp_witness = self._check_monotone()
        self.strongly_unimodal = self._check_log_concave()
        self.strictly_increasing_above = self._check_strict_above(self.n)

        if self.eta_inverse_overflow:
            self.logger.warning(f"Elasticity of {density.family} never exceeds {self.n} on the scanned domain")
        if not self.iea_holds:
            self.logger.warning(f"Increasing elasticity above {self.n} fails for {density.family}; witness {self.iea_witness}")

    def eta(self, x):
        return elasticity(self.density, x)

    def eta_inverse(self, n: float) -> EtaInverse:
        """inf{x > 0 : eta(x) > n}, scanned then bisected to ETA_INVERSE_TOL."""
        above = np.nonzero(self.values > n)[0]
        if len(above) == 0:
            return EtaInverse(float(self.grid[-1]), True)
        i = int(above[0])
        if i == 0:
            return EtaInverse(float(self.grid[0]), False)
        lo, hi = float(self.grid[i - 1]), float(self.grid[i])
        while hi - lo > ETA_INVERSE_TOL:
            mid = 0.5 * (lo + hi)
            if self.eta(mid) > n:
                hi = mid
            else:
                lo = mid
        return EtaInverse(hi, False)

    def _crossing_point(self, n: float) -> float:
        below = np.nonzero(self.values < n)[0]
        if len(below) == 0:
            return 0.0
        j = int(below[-1])
        if j == len(self.grid) - 1:
            return float(self.grid[-1])
        lo, hi = float(self.grid[j]), float(self.grid[j + 1])
        while hi - lo > ETA_INVERSE_TOL:
            mid = 0.5 * (lo + hi)
            if self.eta(mid) < n:
                lo = mid
            else:
                hi = mid
        return hi

    def check_iea(self, n: float) -> Dict[str, Any]:
        """
        Once eta exceeds n it never drops by more than tol.

        On failure the witness (x_low, x_high) is the largest drop: x_low is the
        scan point above n whose eta exceeds the minimum of all later eta by the
        most, and x_high is where that later minimum sits. For
        truncated_exp_inverse this is close to the ends of [eps, 1], about
        (0.1003, 0.9998); any pair with eta(x_low) > eta(x_high) + tol would
        also witness the failure.
        """
        eta = self.values
        suffix_min = np.minimum.accumulate(eta[::-1])[::-1]
        later_min = np.append(suffix_min[1:], np.inf)
        with np.errstate(invalid="ignore"):
            drop = np.where(eta > n, eta - later_min, -np.inf)
        drop = np.nan_to_num(drop, nan=-np.inf, posinf=np.inf)
        violations = drop > self.tol
        if not np.any(violations):
            return {"iea_holds": True, "witness": None}
        i = int(np.argmax(np.where(violations, drop, -np.inf)))
        j = i + 1 + int(np.argmin(eta[i + 1:]))
        return {"iea_holds": False, "witness": (float(self.grid[i]), float(self.grid[j]))}

    def check_global_mlrp(self) -> bool:
        return self.global_mlrp

    def _check_monotone(self) -> Tuple[bool, Optional[Tuple[float, float]]]:
        a, b = self.values[:-1], self.values[1:]
        with np.errstate(invalid="ignore"):
            bad = b < a - self.tol
        if not np.any(bad):
            return True, None
        i = int(np.argmax(bad))
        return False, (float(self.grid[i]), float(self.grid[i + 1]))

    def _check_log_concave(self) -> bool:
        """-ln phi convex on the line, i.e. phi'/phi nonincreasing on (0, inf)."""
        pdf = self.density.pdf(self.grid)
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = np.where(pdf > 0, self.density.dpdf(self.grid) / np.where(pdf > 0, pdf, 1.0), -np.inf)
            rising = slope[1:] > slope[:-1] + self.tol * np.maximum(1.0, np.abs(slope[:-1]))
        return not bool(np.any(np.nan_to_num(rising, nan=False)))

    def _check_strict_above(self, n: float) -> bool:
        if not self.iea_holds:
            return False
        mask = (self.grid > self.crossing_point) & np.isfinite(self.values)
        tail = self.values[mask]
        return bool(np.all(np.diff(tail) > 0))

    def check_exposed(self, product: float) -> Dict[str, Any]:
        """
        A cutoff whose boundary sits at lambda*d = product is exposed when no
        elasticity below the boundary exceeds one above it.
        """
        inside = self.grid < product
        outside = (self.grid >= product) & np.isfinite(self.values)
        if not np.any(inside) or not np.any(outside):
            return {"exposed": True, "x1": None, "x2": None, "drop": 0.0}
        i = int(np.argmax(np.where(inside, self.values, -np.inf)))
        j = int(np.argmin(np.where(outside, self.values, np.inf)))
        drop = float(self.values[i] - self.values[j])
        return {"exposed": drop <= self.tol, "x1": float(self.grid[i]), "x2": float(self.grid[j]), "drop": drop}

    def likelihood_ratio_slope(self, x1: float, x2: float, lam: float, step: float = FD_STEP) -> Dict[str, float]:
        """d ln[phi(lam x1) / phi(lam x2)] / d ln lam, by central difference and in closed form."""
        def log_ratio(log_lam):
            scale = np.exp(log_lam)
            return np.log(self.density.pdf(scale * x1)) - np.log(self.density.pdf(scale * x2))
        base = np.log(lam)
        fd = float((log_ratio(base + step) - log_ratio(base - step)) / (2 * step))
        closed = float(self.eta(lam * x2) - self.eta(lam * x1))
        return {"fd": fd, "closed_form": closed}

    def summary(self) -> Dict[str, Any]:
        return {
            "family": self.density.family,
            "dimension": self.density.dimension,
            "n": self.n,
            "eta_inverse_n": self.eta_inverse_n,
            "eta_inverse_overflow": self.eta_inverse_overflow,
            "crossing_point": self.crossing_point,
            "iea_holds": self.iea_holds,
            "iea_witness": self.iea_witness,
            "global_mlrp": self.global_mlrp,
            "strongly_unimodal": self.strongly_unimodal,
            "strictly_increasing_above": self.strictly_increasing_above,
        }

    def profile_table(self) -> pd.DataFrame:
        return pd.DataFrame({"x": self.grid, "phi": self.density.pdf(self.grid), "eta": self.values})
