"""scikit-learn style wrappers over the functional core.

The protocols are one-shot randomized releases rather than learned models, so
only ``fit`` (run the protocol on the data) and the post-processing
transformers map naturally onto the estimator API.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .accountant import PROPOSED, SINGLE_MESSAGE, ProtocolConfig, baseline_parameters
from .baselines import local_randomizer, multi_message_estimate, multi_message_round
from .engine import Dataset, run_protocol
from .harness.costs import comm_cost, expected_l2
from .harness.defenses import normalize_defense, significance_threshold


def _items_from(X):
    values = np.asarray(X)
    if values.ndim == 2:
        if values.shape[1] != 1:
            raise ValueError(f"expected a single column of items, got shape {values.shape}")
        values = values[:, 0]
    if values.ndim != 1:
        raise ValueError("expected a 1-D array of item indices")
    return values


def estimate_once(kind, dataset: Dataset, epsilon, delta, beta=1.0, rng=None, local_epsilon=None):
    """One protocol run on ``dataset``; returns the frequency vector."""
    rng = np.random.default_rng(rng)
    if kind in PROPOSED:
        config = ProtocolConfig(kind, epsilon, delta, beta)
        return run_protocol(kind, config, dataset, rng).estimates
    params = baseline_parameters(kind, epsilon, dataset.n, dataset.d, delta, local_epsilon)
    if kind in SINGLE_MESSAGE:
        local = local_randomizer(kind, params["eps_local"], dataset.d)
        return local.estimate(local.randomize(dataset.values, rng), dataset.n)
    report = multi_message_round(kind, dataset, params, rng, materialize=False)
    return multi_message_estimate(kind, report, params).estimates


class FrequencyEstimator(BaseEstimator):
    """Release differentially private item frequencies of ``X``.

    ``X`` holds one item index in ``1..n_items`` per user. After ``fit`` the
    estimate is in ``frequencies_`` with its analytic expected squared error
    in ``expected_l2_`` and total communication in ``communication_bits_``.
    """

    def __init__(self, protocol="sageo", epsilon=1.0, delta=1e-12, beta=1.0, n_items=None,
                 local_epsilon=None, alpha_bits=2048, random_state=None):
        self.protocol = protocol
        self.epsilon = epsilon
        self.delta = delta
        self.beta = beta
        self.n_items = n_items
        self.local_epsilon = local_epsilon
        self.alpha_bits = alpha_bits
        self.random_state = random_state

    def fit(self, X, y=None):
        dataset = Dataset.from_values(_items_from(X), self.n_items)
        config = ProtocolConfig(self.protocol, self.epsilon, self.delta, self.beta, dataset.n, dataset.d,
                                self.alpha_bits, self.local_epsilon)
        self.frequencies_ = estimate_once(self.protocol, dataset, self.epsilon, self.delta, self.beta,
                                          self.random_state, self.local_epsilon)
        self.n_users_ = dataset.n
        self.n_items_ = dataset.d
        self.expected_l2_ = expected_l2(self.protocol, self.epsilon, self.delta, dataset.n, dataset.d,
                                        self.beta, self.local_epsilon)
        self.communication_bits_ = comm_cost(self.protocol, config)
        return self

    def score(self, X, y=None):
        """Negative squared error of ``frequencies_`` against the true frequencies of ``X``."""
        check_is_fitted(self, "frequencies_")
        truth = Dataset.from_values(_items_from(X), self.n_items_).true_frequencies()
        return -float(((self.frequencies_ - truth) ** 2).sum())


class SignificanceThreshold(TransformerMixin, BaseEstimator):
    """Keep significant estimates, spread the remaining mass over the rest."""

    def __init__(self, variance_per_item=1e-4, alpha_sig=0.05):
        self.variance_per_item = variance_per_item
        self.alpha_sig = alpha_sig

    def fit(self, X, y=None):
        self.n_features_in_ = np.atleast_2d(X).shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        return significance_threshold(np.atleast_2d(np.asarray(X, float)), self.variance_per_item,
                                      alpha_sig=self.alpha_sig)


class MinNormalizer(TransformerMixin, BaseEstimator):
    """Shift each row so its minimum is 0 and rescale it to sum to 1."""

    def fit(self, X, y=None):
        self.n_features_in_ = np.atleast_2d(X).shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        return normalize_defense(np.atleast_2d(np.asarray(X, float)))
