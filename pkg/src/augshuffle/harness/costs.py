"""Analytic loss and communication cost for every protocol kind."""

from __future__ import annotations

from ..accountant import PROPOSED, ProtocolConfig, proposed_mechanism
from ..baselines import baseline_communication_bits, baseline_expected_l2
from ..engine import communication_bits, expected_l2_loss


def expected_l2(kind, eps, delta, n, d, beta=1.0, local_epsilon=None):
    """Expected squared error summed over items for any protocol kind.

    Proposed protocols use the exact variance of the instantiated dummy law;
    baselines use their standard loss at the inverted parameters.
    """
    if kind in PROPOSED:
        mech = proposed_mechanism(kind, eps, delta, beta)
        return expected_l2_loss(n, d, mech.beta, mech.dist.variance())
    return baseline_expected_l2(kind, eps, delta, n, d, local_epsilon)


def comm_cost(kind, config: ProtocolConfig):
    """Total bits sent, users to shuffler plus shuffler to analyzer."""
    if config.n is None or config.d is None:
        raise ValueError("comm_cost needs n and d in the config")
    if kind in PROPOSED:
        mech = proposed_mechanism(kind, config.epsilon, config.delta, config.beta)
        return communication_bits(config.n, config.d, mech.beta, mech.dist.mean(), config.alpha_bits)
    return baseline_communication_bits(
        kind, config.epsilon, config.delta, config.n, config.d, config.alpha_bits, config.local_epsilon
    )
