"""Tidy CSV emission: ``#``-prefixed metadata header lines then one table.

Floats are written in shortest round-trip form so repeated runs are
byte-identical.
"""

import os
from typing import Dict, Iterable, Mapping, Optional

import numpy as np
import pandas as pd

from hawkes_lift.common.logging import get_logger

logger = get_logger(__name__)

MISSING = "NA"


def format_number(value) -> str:
    """Shortest round-trip decimal for floats, plain text otherwise."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if np.isnan(value):
            return MISSING
        return repr(value)
    if value is None:
        return MISSING
    return str(value)


def write_table(
    path: str,
    frame: pd.DataFrame,
    metadata: Optional[Mapping[str, object]] = None,
) -> str:
    """Write ``frame`` to ``path`` with optional ``# key: value`` header lines.

    Returns:
        The path written.
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    formatted = frame.apply(lambda column: column.map(format_number)) if len(frame) else frame
    with open(path, "w", newline="") as handle:
        for key, value in (metadata or {}).items():
            handle.write(f"# {key}: {format_number(value)}\n")
        formatted.to_csv(handle, index=False, lineterminator="\n")
    logger.debug(f"Wrote {len(frame)} rows to {path}")
    return path


def write_key_values(path: str, rows: Iterable[tuple], metadata: Optional[Dict[str, object]] = None) -> str:
    """Write ``key, value`` rows (used for rendered reports)."""
    frame = pd.DataFrame(list(rows), columns=["key", "value"])
    return write_table(path, frame, metadata)


def read_table(path: str) -> pd.DataFrame:
    """Read a table written by :func:`write_table` (metadata lines skipped)."""
    return pd.read_csv(path, comment="#", na_values=[MISSING], float_precision="round_trip")
