"""Formatting helpers for reports and convergence tables."""

import json
from typing import Any, Dict, List, Sequence

import numpy as np
import pandas as pd


def fitted_order(resolutions: Sequence[float], errors: Sequence[float]) -> float:
    """Log-log slope of ``errors`` against ``resolutions``.

    Returns NaN when fewer than two errors are positive.
    """
    x = np.asarray(resolutions, dtype=float)
    y = np.asarray(errors, dtype=float)
    keep = y > 0
    if np.count_nonzero(keep) < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def to_clean_csv(df: pd.DataFrame) -> str:
    """Drop all-NaN columns and write CSV with a header row and round-trippable floats."""
    return df.loc[:, df.notna().any()].to_csv(index=False, float_format="%.12g")


def records_to_csv(records: List[Dict[str, Any]]) -> str:
    return to_clean_csv(pd.DataFrame.from_records(records))


def to_report_json(payload: Dict[str, Any]) -> str:
    """Stable JSON: sorted keys, NaN written as null."""

    def clean(obj: Any) -> Any:
        if isinstance(obj, float) and not np.isfinite(obj):
            return None
        if isinstance(obj, dict):
            return {k: clean(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [clean(v) for v in obj]
        return obj

    return json.dumps(clean(payload), indent=2, sort_keys=True)
