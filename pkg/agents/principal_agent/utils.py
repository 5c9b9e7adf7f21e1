from typing import Callable, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar


def scan_grid(lo: float, hi: float, points: int) -> np.ndarray:
    """Points on [lo, hi], geometrically denser near lo."""
    if hi <= lo:
        return np.array([lo])
    u = np.concatenate([[0.0], np.geomspace(1e-6, 1.0, points - 1)])
    return lo + (hi - lo) * u


def first_crossing(grid: np.ndarray, predicate: Callable[[float], bool]) -> Optional[int]:
    """Index of the first grid point satisfying predicate, scanning upward."""
    for k, x in enumerate(grid):
        if predicate(float(x)):
            return k
    return None


def bisect_predicate(lo: float, hi: float, predicate: Callable[[float], bool], tol: float) -> float:
    """Smallest x in (lo, hi] with predicate(x), assuming predicate(hi) and not predicate(lo)."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            hi = mid
        else:
            lo = mid
    return hi


def largest_argmax(grid: np.ndarray, objective: Callable[[np.ndarray], np.ndarray], tol: float) -> Tuple[float, float]:
    """Grid search plus bounded refinement around the best point; ties go to the largest argument."""
    values = objective(grid)
    best = float(np.max(values))
    ties = np.nonzero(values >= best - tol)[0]
    i = int(ties[-1])
    x_best, v_best = float(grid[i]), float(values[i])
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        res = minimize_scalar(lambda x: -float(objective(np.array([x]))[0]), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10 * max(1.0, abs(x_best))})
        if -res.fun > v_best + tol:
            x_best, v_best = float(res.x), float(-res.fun)
    return x_best, v_best
