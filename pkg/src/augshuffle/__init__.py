"""Frequency estimation in the augmented shuffle model.

The shuffler subsamples user reports and injects dummy items before
shuffling, so users send their true item with no local noise. The package
provides the dummy-count laws, the privacy accountant, the protocol engine,
baseline shuffle protocols, adversaries and an experiment harness.
"""

from .accountant import (
    ALL_PROTOCOLS,
    MULTI_MESSAGE,
    PROPOSED,
    SINGLE_MESSAGE,
    PrivacyBudget,
    ProtocolConfig,
    exact_dp_profile,
    invert_amplification,
    proposed_mechanism,
    solve_binomial_trials,
)
from .distributions import AGeoDist, BinomialDist, DummyCountDistribution, OneSidedGeoDist
from .engine import Dataset, FrequencyEstimate, analyze, augmented_shuffle, noisy_histogram, run_protocol
from .errors import (
    ConfigError,
    DegenerateConfigError,
    DomainError,
    InfeasibleError,
    IngestionError,
    IntegrityError,
    ValidityError,
)

__version__ = "0.1.0"

__all__ = [
    "AGeoDist",
    "ALL_PROTOCOLS",
    "BinomialDist",
    "ConfigError",
    "Dataset",
    "DegenerateConfigError",
    "DomainError",
    "DummyCountDistribution",
    "FrequencyEstimate",
    "InfeasibleError",
    "IngestionError",
    "IntegrityError",
    "MULTI_MESSAGE",
    "OneSidedGeoDist",
    "PROPOSED",
    "PrivacyBudget",
    "ProtocolConfig",
    "SINGLE_MESSAGE",
    "ValidityError",
    "analyze",
    "augmented_shuffle",
    "exact_dp_profile",
    "invert_amplification",
    "noisy_histogram",
    "proposed_mechanism",
    "run_protocol",
    "solve_binomial_trials",
]
