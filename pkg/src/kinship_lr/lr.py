"""Likelihood-ratio values with explicit degenerate states.

A likelihood ratio here is always P(E | H1) / P(E | H0), alternative on top.
Degenerate ratios are ordinary floats: ``math.inf`` when only the null
likelihood vanishes, ``math.nan`` for 0/0.  :func:`lr_state` names them.
"""

from __future__ import annotations

import math

FINITE = "finite"
INFINITE = "+infinity"
UNDEFINED = "undefined"


def likelihood_ratio(alt_likelihood: float, null_likelihood: float) -> float:
    if alt_likelihood < 0 or null_likelihood < 0:
        raise ValueError("likelihoods must be nonnegative")
    if null_likelihood == 0.0:
        return math.nan if alt_likelihood == 0.0 else math.inf
    return alt_likelihood / null_likelihood


def log_likelihood_ratio(log_alt: float, log_null: float) -> float:
    """Same rules as :func:`likelihood_ratio`, for log-likelihood inputs."""
    if log_null == -math.inf:
        return math.nan if log_alt == -math.inf else math.inf
    return math.exp(log_alt - log_null)


def lr_state(value: float) -> str:
    if math.isnan(value):
        return UNDEFINED
    if math.isinf(value):
        return INFINITE
    return FINITE


def inverse(value: float) -> float:
    """H0-over-H1 orientation of a ratio, keeping the flag rules."""
    if math.isnan(value):
        return math.nan
    if value == 0.0:
        return math.inf
    if math.isinf(value):
        return 0.0
    return 1.0 / value


def lr_to_json(value: float):
    """JSON-safe encoding: finite floats as numbers, flags as strings."""
    state = lr_state(value)
    return value if state == FINITE else state
