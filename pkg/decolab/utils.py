import contextlib
import csv
import json
import logging
import os
import shutil
import tempfile
from typing import Dict, Iterable, Iterator, List, Sequence

import numpy as np

from .settings import decolab_settings

logger = logging.getLogger(__name__)


def flatten_dict(data: dict, parent_key: str = "") -> dict:
    """
    Flatten a nested dictionary into a single-level dictionary according to
    the specified FIELDS_SEPARATOR in your settings (default to '.').
    """
    sep = decolab_settings.FIELDS_SEPARATOR

    items: list = []
    for k, v in data.items():
        k = str(k)
        flat_k = sep.join([parent_key, k]) if parent_key and sep else k
        if isinstance(v, dict):
            items.extend(flatten_dict(v, flat_k).items())
        else:
            items.append((flat_k, v))

    return dict(items)


def format_float(value: float) -> str:
    """Shortest decimal string that round-trips to the same binary float."""
    return repr(float(value))


def time_grid(
    t_max: float, n_points: int, spacing: str = "linear", t_min: float = None
) -> np.ndarray:
    """
    Strictly increasing sample times on [t_min, t_max].

    Linear grids start at 0 by default. Log grids need a positive start and
    default to t_max * 1e-4.
    """
    if spacing == "linear":
        start = 0.0 if t_min is None else t_min
        return np.linspace(start, t_max, n_points)
    if spacing == "log":
        start = t_max * 1e-4 if t_min is None else t_min
        return np.geomspace(start, t_max, n_points)
    raise ValueError("Unknown spacing '%s'." % spacing)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[float]]):
    with open(path, "w", encoding="utf-8", newline="") as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(value) for value in row])


def write_json(path: str, data: Dict):
    with open(path, "w", encoding="utf-8", newline="") as fp:
        json.dump(jsonable(data), fp, indent=2, sort_keys=True)
        fp.write("\n")


def jsonable(value):
    """Convert numpy scalars and non-finite floats to JSON-safe values."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if np.isinf(value):
            return "inf" if value > 0 else "-inf"
        if np.isnan(value):
            return None
        return value
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


@contextlib.contextmanager
def staged_directory(target: str) -> Iterator[str]:
    """
    Yield a temporary directory next to `target` and move its files into
    `target` only when the block exits cleanly.

    Nothing is written to `target` on failure.
    """
    parent = os.path.dirname(os.path.abspath(target))
    os.makedirs(parent, exist_ok=True)
    staging = tempfile.mkdtemp(prefix=".decolab-", dir=parent)
    try:
        yield staging
        os.makedirs(target, exist_ok=True)
        for name in sorted(os.listdir(staging)):
            os.replace(os.path.join(staging, name), os.path.join(target, name))
        logger.debug("Moved staged outputs into %s" % target)
    finally:
        shutil.rmtree(staging, ignore_errors=True)


def as_complex_pair(value: complex) -> List[float]:
    value = complex(value)
    return [value.real, value.imag]
