"""
Decay-rate fits for width and greedy error curves.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from errors import InputRejected

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecayFit:
    """err(N) ~ C exp(-c N^exponent), fitted on a log scale."""
    constant: float
    rate: float
    exponent: float
    r_squared: float

    def predict(self, n: Sequence[float]) -> np.ndarray:
        return self.constant * np.exp(-self.rate * np.asarray(n, dtype=float) ** self.exponent)


def _positive_pairs(n: Sequence[float], values: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    n = np.asarray(n, dtype=float)
    values = np.asarray(values, dtype=float)
    if n.shape != values.shape:
        raise InputRejected(f"{n.size} abscissae for {values.size} values", field="values")
    keep = (values > 0.0) & np.isfinite(values)
    if keep.sum() < 2:
        raise InputRejected("need at least two positive values to fit a rate", field="values")
    return n[keep], values[keep]


def fit_subexponential_decay(n: Sequence[float], errors: Sequence[float], exponent: float) -> DecayFit:
    """
    Least-squares fit of log err = log C - c N^exponent.

    Non-positive errors are skipped.
    """
    if not exponent > 0.0:
        raise InputRejected(f"exponent must be positive, got {exponent}", field="exponent")
    n, errors = _positive_pairs(n, errors)
    fit = stats.linregress(n ** exponent, np.log(errors))
    return DecayFit(float(np.exp(fit.intercept)), float(-fit.slope), exponent, float(fit.rvalue ** 2))


def loglog_slope(n: Sequence[float], values: Sequence[float]) -> float:
    """Slope of log(values) against log(n)."""
    n, values = _positive_pairs(n, values)
    if np.any(n <= 0.0):
        raise InputRejected("log-log fit needs positive abscissae", field="n")
    return float(stats.linregress(np.log(n), np.log(values)).slope)


def greedy_rate_from_width(constant: float, rate: float, alpha: float, gamma: float) -> tuple[float, float]:
    """
    Weak-greedy error constants inherited from a width decay.

    If d_N <= C exp(-c N^alpha), a weak greedy with parameter gamma yields
    errors <= sqrt(2C)/gamma * exp(-c' N^alpha) with c' = 2^(-1-2 alpha) c.

    Returns:
        (sqrt(2C)/gamma, c')
    """
    if not constant > 0.0 or not rate > 0.0 or not alpha > 0.0:
        raise InputRejected("constant, rate and alpha must be positive", field="rate")
    if not 0.0 < gamma <= 1.0:
        raise InputRejected(f"gamma must lie in (0, 1], got {gamma}", field="gamma")
    return float(np.sqrt(2.0 * constant) / gamma), float(2.0 ** (-1.0 - 2.0 * alpha) * rate)
