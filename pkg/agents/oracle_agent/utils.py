from typing import List, Tuple

import numpy as np


def decode_levels(codes: np.ndarray, cells: int, levels: int) -> np.ndarray:
    """Integer candidate codes to value vectors in {0, 1/(L-1), ..., 1}, first cell most significant."""
    powers = levels ** np.arange(cells - 1, -1, -1)
    digits = (codes[:, None] // powers[None, :]) % levels
    return digits / (levels - 1)


def score_rows(values: np.ndarray, band: np.ndarray, cost: np.ndarray, grid: np.ndarray,
               tie_tol: float, participation_tol: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    For each candidate row, the largest grid argument maximizing
    values @ band - cost, and the maximal payoff. Rows whose best payoff is
    negative induce argument zero.
    """
    payoff = values @ band - cost[None, :]
    best = np.max(payoff, axis=1)
    ties = payoff >= best[:, None] - tie_tol
    last = payoff.shape[1] - 1 - np.argmax(ties[:, ::-1], axis=1)
    chosen = np.where(best >= -participation_tol, grid[last], 0.0)
    return chosen, best


def top_candidates(chosen: np.ndarray, best: np.ndarray, values: np.ndarray, k: int) -> List[int]:
    """Row indices ordered by argument, then payoff, then lexicographically smallest values."""
    keys = [values[:, j] for j in range(values.shape[1] - 1, -1, -1)] + [-best, -chosen]
    order = np.lexsort(keys)
    return [int(i) for i in order[:k]]


def band_matrix(cdf, precisions: np.ndarray, half_edges: np.ndarray) -> np.ndarray:
    """B[j, q] = truthful mass of the mirrored cell j at precision q: 2 (Phi(L h_{j+1}) - Phi(L h_j))."""
    probs = cdf(np.outer(half_edges, precisions))
    return 2.0 * np.diff(probs, axis=0)


def survival_band_matrix(survival, efforts: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """B[j, q] = P(y in [y_j, y_{j+1}) | e_q); the last edge may be +inf."""
    surv = np.array([survival(y, efforts) if np.isfinite(y) else np.zeros_like(efforts) for y in edges])
    return surv[:-1] - surv[1:]
