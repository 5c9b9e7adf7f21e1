import logging
from typing import Callable, List, Optional, Tuple

import numpy as np
import pandas as pd

from utils.errors import DomainError

logger = logging.getLogger(__name__)

VALUE_TOL = 1e-12


class Transfer:
    """
    Step transfer t(x) of the report error x = theta - a: value values[j] on
    [edges[j], edges[j+1]) and zero outside [edges[0], edges[-1]). Values lie
    in [0, 1]; a cutoff d is the single cell [-d, d] with value one.
    """

    def __init__(self, edges, values, kind: str = "tabulated", d: Optional[float] = None):
        edges = np.asarray(edges, dtype=float)
        values = np.asarray(values, dtype=float)
        if len(edges) != len(values) + 1 and not (len(edges) == 0 and len(values) == 0):
            raise DomainError(f"Transfer needs len(edges) == len(values) + 1, got {len(edges)} and {len(values)}")
        if len(edges) and np.any(np.diff(edges) <= 0):
            raise DomainError("Transfer edges must be strictly increasing")
        if np.any(~np.isfinite(edges)):
            raise DomainError("Transfer must vanish at infinity (finite edges only)")
        if np.any(values < -VALUE_TOL) or np.any(values > 1 + VALUE_TOL):
            raise DomainError("Transfer values must lie in [0, 1]")
        self.edges = edges
        self.values = np.clip(values, 0.0, 1.0)
        self.kind = kind
        self.d = d

    def __repr__(self) -> str:
        if self.kind == "cutoff":
            return f"Transfer(cutoff d={self.d:.6g})"
        return f"Transfer({self.kind}, cells={len(self.values)})"

    @classmethod
    def cutoff(cls, d: float) -> "Transfer":
        if d < 0:
            raise DomainError(f"Cutoff must be nonnegative, got d={d}")
        if d == 0:
            return cls([], [], kind="cutoff", d=0.0)
        return cls([-d, d], [1.0], kind="cutoff", d=float(d))

    @classmethod
    def zero(cls) -> "Transfer":
        return cls([], [])

    @classmethod
    def symmetric_cells(cls, half_edges, values) -> "Transfer":
        """Mirror cells [h_j, h_{j+1}) on the half line (h_0 = 0) to a symmetric transfer."""
        half_edges = np.asarray(half_edges, dtype=float)
        values = np.asarray(values, dtype=float)
        if half_edges[0] != 0.0:
            raise DomainError("Symmetric cells must start at 0")
        edges = np.concatenate([-half_edges[:0:-1], half_edges])
        full = np.concatenate([values[::-1], values])
        return cls(edges, full, kind="symmetric").canonical()

    @classmethod
    def random(cls, rng: np.random.Generator, cells: int, x_max: float) -> "Transfer":
        """Values i.i.d. uniform on [0, 1] over equal cells of [-x_max, x_max]."""
        edges = np.linspace(-x_max, x_max, cells + 1)
        return cls(edges, rng.random(cells), kind="random")

    # Evaluation

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if len(self.values) == 0:
            return np.zeros_like(x)
        idx = np.searchsorted(self.edges, x, side="right") - 1
        inside = (idx >= 0) & (idx < len(self.values))
        return np.where(inside, self.values[np.clip(idx, 0, len(self.values) - 1)], 0.0)

    @property
    def x_max(self) -> float:
        return float(np.max(np.abs(self.edges))) if len(self.edges) else 0.0

    @property
    def step(self) -> float:
        return float(np.min(np.diff(self.edges))) if len(self.edges) > 1 else 0.0

    @property
    def is_cutoff(self) -> bool:
        return self.kind == "cutoff"

    def bands(self) -> List[Tuple[float, float, float]]:
        return [(float(l), float(r), float(v)) for l, r, v in zip(self.edges[:-1], self.edges[1:], self.values)]

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        if len(self.edges) == 0:
            return True
        if not np.allclose(self.edges, -self.edges[::-1], atol=tol, rtol=0):
            return False
        return bool(np.allclose(self.values, self.values[::-1], atol=tol, rtol=0))

    def is_symmetric_unimodal(self, tol: float = 1e-12) -> bool:
        """Symmetric and nonincreasing in |x|; such transfers induce truthful reports."""
        if not self.is_symmetric(tol):
            return False
        mids = 0.5 * (self.edges[:-1] + self.edges[1:])
        outward = self.values[mids >= 0]
        return bool(np.all(np.diff(outward) <= tol))

    # Transformations

    def shifted(self, b: float) -> "Transfer":
        """x -> t(x - b)."""
        if len(self.edges) == 0 or b == 0:
            return self
        return Transfer(self.edges + b, self.values, kind="shifted")

    def combine(self, other: "Transfer", op: Callable[[np.ndarray, np.ndarray], np.ndarray],
                kind: str = "tabulated") -> "Transfer":
        """Pointwise op(t, other) on the union of both edge sets."""
        edges = np.union1d(self.edges, other.edges)
        if len(edges) < 2:
            return Transfer.zero()
        mids = 0.5 * (edges[:-1] + edges[1:])
        return Transfer(edges, op(self(mids), other(mids)), kind=kind).canonical()

    def symmetrize(self) -> "Transfer":
        """(t(x) + t(-x)) / 2."""
        mirror = Transfer(-self.edges[::-1], self.values[::-1]) if len(self.edges) else Transfer.zero()
        return self.combine(mirror, lambda a, b: 0.5 * (a + b), kind="symmetrized")

    def canonical(self) -> "Transfer":
        """Merge equal neighbouring cells and trim zero cells at both ends."""
        if len(self.values) == 0:
            return self
        keep = np.concatenate([[True], np.abs(np.diff(self.values)) > VALUE_TOL])
        edges = np.append(self.edges[:-1][keep], self.edges[-1])
        values = self.values[keep]
        nonzero = np.nonzero(values > VALUE_TOL)[0]
        if len(nonzero) == 0:
            return Transfer.zero()
        lo, hi = nonzero[0], nonzero[-1]
        edges, values = edges[lo:hi + 2], values[lo:hi + 1]
        if len(values) == 1 and values[0] >= 1 - VALUE_TOL and np.isclose(edges[0], -edges[1], atol=1e-15, rtol=1e-12):
            return Transfer.cutoff(float(edges[1]))
        return Transfer(edges, values, kind=self.kind, d=self.d)

    def to_frame(self, stage: str) -> pd.DataFrame:
        rows = [{"stage": stage, "x_left": l, "x_right": r, "value": v} for l, r, v in self.bands()]
        return pd.DataFrame(rows, columns=["stage", "x_left", "x_right", "value"])
