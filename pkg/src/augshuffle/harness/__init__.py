"""Experiment harness: datasets, defenses, sweeps and the command line.

Sweeps live in :mod:`augshuffle.harness.experiments` and the command line in
:mod:`augshuffle.harness.cli`; they import the adversary, so they are not
re-exported here.
"""

from .costs import comm_cost, expected_l2
from .datasets import load_dataset, save_dataset, synth_zipf
from .defenses import (
    apply_defense,
    normalize_defense,
    significance_threshold,
    wang_dummy_defense,
    wang_estimate,
)

__all__ = [
    "apply_defense",
    "comm_cost",
    "expected_l2",
    "load_dataset",
    "normalize_defense",
    "save_dataset",
    "significance_threshold",
    "synth_zipf",
    "wang_dummy_defense",
    "wang_estimate",
]
