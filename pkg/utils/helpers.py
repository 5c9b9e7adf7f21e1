import json
import math
from pathlib import Path
from typing import Any, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

from utils.constants import CSV_FLOAT_FORMAT


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator so restarts reproduce across platforms."""
    return np.random.Generator(np.random.Philox(seed))


def _to_serializable(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return _to_serializable(value.model_dump())
    if isinstance(value, dict):
        return {str(k): _to_serializable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_serializable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_to_serializable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return float(f"{value:.12g}")
    return value


def write_json(payload: Any, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(_to_serializable(payload), f, indent=2)
    return path


def write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, header=True, float_format=CSV_FLOAT_FORMAT)
    return path


def read_two_column_csv(path: Union[str, Path]) -> np.ndarray:
    """Load a headed or headless two-column numeric CSV as an (m, 2) array."""
    frame = pd.read_csv(path, header=None)
    if not np.issubdtype(frame.dtypes.iloc[0], np.number):
        frame = pd.read_csv(path)
    table = frame.iloc[:, :2].to_numpy(dtype=float)
    return table
