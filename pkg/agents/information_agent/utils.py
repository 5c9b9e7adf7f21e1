from typing import Callable, Optional

import numpy as np

PrecisionMap = Callable[[np.ndarray], np.ndarray]


def identity_precision(lam):
    return np.asarray(lam, dtype=float)


def gaussian_prior_precision(lambda0: float) -> PrecisionMap:
    """Posterior precision sqrt(lambda0^2 + lambda^2) with a Gaussian prior of precision lambda0."""
    return lambda lam: np.sqrt(lambda0 ** 2 + np.asarray(lam, dtype=float) ** 2)


def unobserved_state_precision(lambda_p: float, lambda0: Optional[float] = None) -> PrecisionMap:
    """
    Precision of s_p - a when the principal only sees a signal of precision
    lambda_p: (1/lambda_p^2 + 1/lambda^2)^(-1/2), with lambda^2 + lambda0^2 in
    place of lambda^2 under a Gaussian prior.
    """
    def precision(lam):
        lam = np.asarray(lam, dtype=float)
        agent = lam ** 2 + (lambda0 ** 2 if lambda0 is not None else 0.0)
        with np.errstate(divide="ignore"):
            inv = 1.0 / lambda_p ** 2 + np.where(agent > 0, 1.0 / np.where(agent > 0, agent, 1.0), np.inf)
        return np.where(np.isfinite(inv), 1.0 / np.sqrt(inv), 0.0)
    return precision


def step_values(cdf: Callable, lam, edges: np.ndarray, values: np.ndarray) -> np.ndarray:
    """sum_j v_j [Phi(lam e_{j+1}) - Phi(lam e_j)] for an array of precisions."""
    lam = np.asarray(lam, dtype=float)
    if len(values) == 0:
        return np.zeros_like(lam)
    probs = np.diff(cdf(lam[..., None] * edges), axis=-1)
    return probs @ values


def offset_values(cdf: Callable, lam: float, edges: np.ndarray, values: np.ndarray, offsets) -> np.ndarray:
    """Expected transfer when reporting a = s + b, for each offset b."""
    offsets = np.asarray(offsets, dtype=float)
    if len(values) == 0:
        return np.zeros_like(offsets)
    probs = np.diff(cdf(lam * (edges[None, :] + offsets[..., None])), axis=-1)
    return probs @ values


def offset_grid(x_max: float, step: float, max_points: int, min_points: int = 65) -> np.ndarray:
    """Offsets on [-2 x_max, 2 x_max] at the tabulation step or finer, always containing 0."""
    if x_max <= 0 or step <= 0:
        return np.zeros(1)
    half = min(max(int(np.ceil(2.0 * x_max / step)), min_points // 2), max_points // 2)
    return np.linspace(-2.0 * x_max, 2.0 * x_max, 2 * half + 1)
