"""Post-processing and dummy-injection defenses."""

from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy.stats import norm

from ..baselines import HashedReports
from ..engine import FrequencyEstimate


def _unwrap(estimate):
    if isinstance(estimate, FrequencyEstimate):
        return np.asarray(estimate.estimates, dtype=float), estimate
    return np.asarray(estimate, dtype=float), None


def _wrap(values, original):
    if original is None:
        return values
    return dataclasses.replace(original, estimates=values)


def significance_threshold(estimate, variance_per_item, d=None, alpha_sig=0.05):
    """Zero out estimates indistinguishable from 0 and spread the leftover mass.

    The threshold is the Bonferroni-corrected normal quantile times the
    per-item standard deviation. Items above it keep their value; the rest
    share ``1 - kept mass`` equally, clamped at zero.
    """
    values, original = _unwrap(estimate)
    d = values.shape[-1] if d is None else d
    if variance_per_item <= 0:
        raise ValueError("variance_per_item must be > 0")
    threshold = norm.ppf(1 - alpha_sig / d) * math.sqrt(variance_per_item)
    keep = values > threshold
    out = np.where(keep, values, 0.0)
    below = (~keep).sum(axis=-1, keepdims=True)
    leftover = np.clip(1.0 - out.sum(axis=-1, keepdims=True), 0.0, None)
    share = np.divide(leftover, below, out=np.zeros_like(leftover), where=below > 0)
    out = np.where(keep, out, share)
    return _wrap(out, original)


def normalize_defense(estimate):
    """Shift so the smallest entry is 0, then rescale to sum to 1.

    A constant vector (nothing left after the shift) becomes uniform.
    """
    values, original = _unwrap(estimate)
    shifted = values - values.min(axis=-1, keepdims=True)
    total = shifted.sum(axis=-1, keepdims=True)
    d = values.shape[-1]
    out = np.where(total > 0, shifted / np.where(total > 0, total, 1.0), 1.0 / d)
    return _wrap(out, original)


def apply_defense(estimate, defense, variance_per_item=None, alpha_sig=0.05):
    """Apply ``"threshold"``, ``"normalize"`` or ``"threshold+normalize"``."""
    if defense in (None, "", "none"):
        return estimate
    steps = defense.split("+")
    unknown = set(steps) - {"threshold", "normalize"}
    if unknown:
        raise ValueError(f"unknown defense step(s) {sorted(unknown)}")
    for step in steps:
        if step == "threshold":
            if variance_per_item is None:
                raise ValueError("the threshold defense needs variance_per_item")
            estimate = significance_threshold(estimate, variance_per_item, alpha_sig=alpha_sig)
        else:
            estimate = normalize_defense(estimate)
    return estimate


def wang_dummy_defense(messages, a, mechanism, rng):
    """Append ``floor(a * n)`` messages drawn uniformly from the output space.

    ``mechanism`` is the local randomizer whose output space is sampled.
    Returns the augmented messages and the number of dummies added.
    """
    if a < 0:
        raise ValueError("a must be >= 0")
    n = len(messages)
    count = int(math.floor(a * n))
    if count == 0:
        return messages, 0
    dummies = mechanism.uniform_dummies(count, rng)
    if isinstance(messages, HashedReports):
        return HashedReports.concat(messages, dummies), count
    return np.concatenate((np.asarray(messages), dummies)), count


def wang_estimate(mechanism, messages, n_genuine, n_dummies):
    """Estimate from reports padded by :func:`wang_dummy_defense`.

    Runs the standard estimator on all messages, then removes the expected
    contribution of the uniform dummies and rescales to the genuine users.
    """
    total = n_genuine + n_dummies
    mixed = mechanism.estimate(messages, total)
    return (total * mixed - n_dummies * mechanism.dummy_contribution()) / n_genuine
