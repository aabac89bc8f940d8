"""Matching estimates to ground truth and aggregating errors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..spectrum import normalize_spectrum

__all__ = ["Score", "match_and_score", "rmse", "normalize_spectrum"]


@dataclass(frozen=True)
class Score:
    assignment: list
    """For each truth, the index of its matched estimate or ``None`` (miss)."""
    angle_errors: list
    """Absolute angle error per truth; ``None`` for a miss."""
    range_errors: list
    """Relative range error per truth; ``None`` for misses and far-field truths."""
    misses: int
    false_alarms: int


def match_and_score(estimates, truth, est_ranges=None, true_ranges=None):
    """Pair estimates with truths to minimize the summed absolute angle error.

    Fewer estimates than truths leaves the surplus truths unmatched (misses);
    surplus estimates count as false alarms.
    """
    est = np.asarray(estimates, dtype=float).ravel()
    tru = np.asarray(truth, dtype=float).ravel()
    assignment = [None] * tru.size
    if est.size and tru.size:
        cost = np.abs(tru[:, None] - est[None, :])
        rows, cols = linear_sum_assignment(cost)
        for r, c in zip(rows, cols):
            assignment[int(r)] = int(c)
    angle_errors, range_errors = [], []
    for t, e in enumerate(assignment):
        if e is None:
            angle_errors.append(None)
            range_errors.append(None)
            continue
        angle_errors.append(float(abs(est[e] - tru[t])))
        if est_ranges is None or true_ranges is None or math.isinf(true_ranges[t]):
            range_errors.append(None)
        else:
            range_errors.append(float(abs(est_ranges[e] - true_ranges[t]) / true_ranges[t]))
    matched = sum(e is not None for e in assignment)
    return Score(assignment, angle_errors, range_errors, tru.size - matched, est.size - matched)


def rmse(errors):
    """Root mean square over the non-``None`` entries; ``None`` if there are none."""
    vals = [e for e in errors if e is not None]
    if not vals:
        return None
    return float(math.sqrt(sum(e * e for e in vals) / len(vals)))
