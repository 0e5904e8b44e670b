"""Regression evaluation statistics: MSE, MAE, MAPE, RMSE and R-squared.

MAPE is a fraction (no x100).  R-squared uses the mean of the actual values
in its denominator and is not clamped, so a fit worse than the mean
predictor reports a negative value.  When a statistic is undefined for the
given data (a zero actual for MAPE, zero-variance actuals for R-squared)
its field is None rather than a silently substituted number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class MetricReport:
    mse: float
    mae: float
    mape: Optional[float]
    rmse: float
    r2: Optional[float]
    n: int


def compute_metrics(actual: Sequence[float], predicted: Sequence[float]) -> MetricReport:
    """Five-statistic report for one model on one data split."""
    a = np.asarray(actual, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if a.ndim != 1 or p.ndim != 1 or a.shape != p.shape:
        raise ValueError(f"actual/predicted shapes differ: {a.shape} vs {p.shape}")
    if a.size == 0:
        raise ValueError("cannot compute metrics on empty sequences")

    diff = a - p
    mse = float(np.mean(diff ** 2))
    mae = float(np.mean(np.abs(diff)))
    rmse = math.sqrt(mse)

    mape: Optional[float]
    if np.any(a == 0.0):
        mape = None
    else:
        with np.errstate(over="ignore"):  # tiny actuals may push terms to inf
            mape = float(np.mean(np.abs(diff / a)))

    ss_tot = float(np.sum((a - a.mean()) ** 2))
    r2: Optional[float]
    if ss_tot == 0.0:
        r2 = None
    else:
        r2 = 1.0 - float(np.sum(diff ** 2)) / ss_tot

    return MetricReport(mse=mse, mae=mae, mape=mape, rmse=rmse, r2=r2, n=int(a.size))
