import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from augshuffle.estimators import FrequencyEstimator, MinNormalizer, SignificanceThreshold
from augshuffle.harness.datasets import synth_zipf

DATA = synth_zipf(3000, 15, 1.0, seed=8)


@pytest.mark.parametrize("protocol", ["sbin", "sageo", "s1geo", "grr", "olh", "cm22"])
def test_fit_produces_a_frequency_vector(protocol):
    est = FrequencyEstimator(protocol=protocol, epsilon=2.0, delta=1e-8, n_items=15, random_state=0).fit(DATA.values)
    assert est.frequencies_.shape == (15,)
    assert est.n_users_ == 3000 and est.n_items_ == 15
    assert est.expected_l2_ > 0 and est.communication_bits_ >= 2048 * 3000
    assert est.score(DATA.values) > -50 * est.expected_l2_


def test_seeded_fits_are_reproducible_and_clonable():
    est = FrequencyEstimator(protocol="sageo", random_state=4)
    a = est.fit(DATA.values.reshape(-1, 1)).frequencies_.copy()
    b = clone(est).fit(DATA.values).frequencies_
    assert np.array_equal(a, b)
    assert est.get_params()["protocol"] == "sageo"
    assert est.set_params(epsilon=0.5).epsilon == 0.5


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        FrequencyEstimator().fit(np.ones((4, 2), dtype=int))
    with pytest.raises(ValueError):
        FrequencyEstimator(n_items=3).fit(np.array([1, 5]))
    with pytest.raises(NotFittedError):
        FrequencyEstimator().score(DATA.values)


def test_defense_transformers_pipeline():
    raw = np.array([[0.6, -0.1, 0.1], [0.3, 0.3, 0.4]])
    out = make_pipeline(SignificanceThreshold(variance_per_item=1e-4), MinNormalizer()).fit_transform(raw)
    assert np.allclose(out.sum(axis=1), 1) and out.min() >= 0
    assert np.allclose(MinNormalizer().fit_transform(raw[:1]), np.array([[0.7, 0.0, 0.2]]) / 0.9)
