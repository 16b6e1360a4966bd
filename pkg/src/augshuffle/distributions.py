"""Distributions for the number of dummy values the shuffler adds per item.

All laws live on the non-negative integers. Each exposes an exact PMF, a
seedable sampler, the mean, an exact variance and the variance bound used by
the loss formulas, plus tail helpers needed for exact privacy accounting.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from functools import cached_property

import numpy as np
from scipy.special import gammaln

from ._validation import check_count, check_probability

_COIN_FLIP_LIMIT = 64
_EXACT_COMB_LIMIT = 60


def binomial_pmf(trials, k):
    """Probability that a fair-coin binomial with ``trials`` flips equals ``k``.

    Exact rational evaluation for up to 60 trials, log-space above that.
    Out-of-range ``k`` yields 0.
    """
    trials = check_count(trials, "trials")
    k = int(k)
    if k < 0 or k > trials:
        return 0.0
    if trials <= _EXACT_COMB_LIMIT:
        return math.comb(trials, k) / 2**trials
    log_p = (
        math.lgamma(trials + 1)
        - math.lgamma(k + 1)
        - math.lgamma(trials - k + 1)
        - trials * math.log(2.0)
    )
    return math.exp(log_p)


class DummyCountDistribution(ABC):
    """Common interface of the dummy-count laws."""

    @abstractmethod
    def pmf(self, k):
        """PMF at ``k`` (scalar or array)."""

    @abstractmethod
    def sample(self, rng, size=None):
        """Draw one count (``size=None``) or an array of counts."""

    @abstractmethod
    def mean(self) -> float: ...

    @abstractmethod
    def variance(self) -> float:
        """Exact variance."""

    @abstractmethod
    def variance_upper(self) -> float:
        """Variance value used by the closed-form loss expressions."""

    @abstractmethod
    def tail(self, k) -> float:
        """``P(X > k)``."""

    @abstractmethod
    def support_upper(self, tail_mass=1e-15) -> int:
        """Smallest ``K`` with ``P(X > K) < tail_mass``."""

    @property
    def geometric_tail_ratio(self):
        """Ratio ``pmf(k + 1) / pmf(k)`` that holds for every ``k`` past the
        mode, or None when the support is finite."""
        return None

    @property
    def mode(self) -> int:
        return 0

    def pmf_array(self, upper):
        """PMF evaluated on ``0..upper`` inclusive."""
        return np.asarray(self.pmf(np.arange(int(upper) + 1)), dtype=float)


class BinomialDist(DummyCountDistribution):
    """Binomial law ``B(trials, 1/2)``."""

    def __init__(self, trials):
        self.trials = check_count(trials, "trials")

    def __repr__(self):
        return f"BinomialDist(trials={self.trials})"

    def __eq__(self, other):
        return isinstance(other, BinomialDist) and other.trials == self.trials

    def __hash__(self):
        return hash(("binomial", self.trials))

    @cached_property
    def _pmf_table(self):
        m = self.trials
        if m <= _EXACT_COMB_LIMIT:
            table = [math.comb(m, k) / 2**m for k in range(m + 1)]
            return np.array(table, dtype=float)
        k = np.arange(m + 1, dtype=float)
        log_p = gammaln(m + 1) - gammaln(k + 1) - gammaln(m - k + 1) - m * math.log(2.0)
        return np.exp(log_p)

    @cached_property
    def _cdf_table(self):
        return np.cumsum(self._pmf_table)

    @cached_property
    def _sf_table(self):
        # sf[k] = P(X > k), accumulated from the upper end for accuracy
        rev = np.cumsum(self._pmf_table[::-1])[::-1]
        return np.append(rev[1:], 0.0)

    def pmf(self, k):
        k_arr = np.asarray(k)
        inside = (k_arr >= 0) & (k_arr <= self.trials)
        idx = np.clip(k_arr, 0, self.trials).astype(np.int64)
        out = np.where(inside, self._pmf_table[idx], 0.0)
        return float(out) if out.ndim == 0 else out

    def sample(self, rng, size=None):
        shape = () if size is None else size
        m = self.trials
        if m == 0:
            draws = np.zeros(shape, dtype=np.int64)
        elif m <= _COIN_FLIP_LIMIT:
            # M fair coin flips packed into the low bits of one uniform word
            words = rng.integers(0, 2**m, size=shape, dtype=np.uint64)
            draws = np.bitwise_count(words).astype(np.int64)
        else:
            u = rng.random(shape)
            draws = np.searchsorted(self._cdf_table, u, side="right")
            draws = np.minimum(draws, m).astype(np.int64)
        return int(draws) if size is None else draws

    def mean(self):
        return self.trials / 2

    def variance(self):
        return self.trials / 4

    def variance_upper(self):
        return self.trials / 4

    def tail(self, k):
        k = int(k)
        if k < 0:
            return 1.0
        if k >= self.trials:
            return 0.0
        return float(self._sf_table[k])

    def support_upper(self, tail_mass=1e-15):
        below = np.nonzero(self._sf_table < tail_mass)[0]
        return int(below[0])


class AGeoDist(DummyCountDistribution):
    """Asymmetric two-sided geometric law truncated to the non-negative integers.

    The PMF peaks at ``mode`` and decays by ``left_ratio`` per step towards 0
    and by ``right_ratio`` per step towards infinity.
    """

    def __init__(self, mode, left_ratio, right_ratio):
        self._mode = check_count(mode, "mode")
        self.left_ratio = check_probability(left_ratio, "left_ratio", open_high=True)
        self.right_ratio = check_probability(right_ratio, "right_ratio", open_low=True, open_high=True)

    def __repr__(self):
        return (
            f"{type(self).__name__}(mode={self._mode}, left_ratio={self.left_ratio!r}, "
            f"right_ratio={self.right_ratio!r})"
        )

    @property
    def mode(self):
        return self._mode

    @property
    def geometric_tail_ratio(self):
        return self.right_ratio

    @cached_property
    def _left_weight(self):
        # sum_{j=1..nu} q_l^j, zero when q_l = 0
        q, nu = self.left_ratio, self._mode
        if q == 0.0 or nu == 0:
            return 0.0
        return q * (1.0 - q**nu) / (1.0 - q)

    @cached_property
    def normalizer(self):
        """The constant kappa that makes the truncated PMF sum to one."""
        return self._left_weight + 1.0 / (1.0 - self.right_ratio)

    @property
    def untruncated_normalizer(self):
        """kappa*, the normalizer of the law before truncation at zero."""
        return self.left_ratio / (1.0 - self.left_ratio) + 1.0 / (1.0 - self.right_ratio)

    @property
    def right_mass(self):
        """Probability of landing at or above the mode."""
        return (1.0 / (1.0 - self.right_ratio)) / self.normalizer

    def pmf(self, k):
        k_arr = np.asarray(k, dtype=np.int64)
        nu = self._mode
        left = np.power(self.left_ratio, np.maximum(nu - k_arr, 0).astype(float))
        right = np.power(self.right_ratio, np.maximum(k_arr - nu, 0).astype(float))
        out = np.where(k_arr < nu, left, right) / self.normalizer
        out = np.where(k_arr < 0, 0.0, out)
        return float(out) if out.ndim == 0 else out

    def sample(self, rng, size=None):
        shape = () if size is None else size
        nu, q_l, q_r = self._mode, self.left_ratio, self.right_ratio
        side = rng.random(shape)
        u = 1.0 - rng.random(shape)  # in (0, 1]
        steps_right = np.floor(np.log(u) / math.log(q_r))
        draws = nu + steps_right
        if nu > 0 and q_l > 0.0:
            go_left = side >= self.right_mass
            truncation = 1.0 - q_l**nu
            steps_left = np.floor(np.log1p(-(1.0 - u) * truncation) / math.log(q_l))
            steps_left = np.clip(steps_left, 0, nu - 1)
            draws = np.where(go_left, nu - 1 - steps_left, draws)
        draws = draws.astype(np.int64)
        return int(draws) if size is None else draws

    def mean(self):
        nu, q_l, q_r = self._mode, self.left_ratio, self.right_ratio
        left_sum = 0.0
        if nu > 0 and q_l > 0.0:
            k = np.arange(nu, dtype=float)
            left_sum = math.fsum(k * q_l ** (nu - k))
        right_sum = (q_r + (1.0 - q_r) * nu) / (1.0 - q_r) ** 2
        return (left_sum + right_sum) / self.normalizer

    def variance(self):
        nu, q_l, q_r = self._mode, self.left_ratio, self.right_ratio
        mu = self.mean()
        left = 0.0
        if nu > 0 and q_l > 0.0:
            k = np.arange(nu, dtype=float)
            left = math.fsum((k - mu) ** 2 * q_l ** (nu - k))
        c = nu - mu
        # sum_{j>=0} (c + j)^2 q^j in closed form
        right = c * c / (1 - q_r) + 2 * c * q_r / (1 - q_r) ** 2 + q_r * (1 + q_r) / (1 - q_r) ** 3
        return (left + right) / self.normalizer

    def variance_upper(self):
        q_l, q_r = self.left_ratio, self.right_ratio
        spread = q_l * (1 + q_l) / (1 - q_l) ** 3 + q_r * (1 + q_r) / (1 - q_r) ** 3
        return spread / self.untruncated_normalizer

    def tail(self, k):
        k = int(k)
        nu = self._mode
        if k < 0:
            return 1.0
        if k >= nu:
            return self.right_ratio ** (k + 1 - nu) * self.right_mass
        left_part = math.fsum(self.left_ratio ** (nu - j) for j in range(k + 1, nu))
        return left_part / self.normalizer + self.right_mass

    def support_upper(self, tail_mass=1e-15):
        nu = self._mode
        if self.tail(nu - 1) < tail_mass:
            k = nu - 1
            while k >= 0 and self.tail(k - 1) < tail_mass:
                k -= 1
            return max(k, 0)
        ratio = math.log(tail_mass / self.right_mass) / math.log(self.right_ratio)
        k = max(nu - 1 + max(int(math.floor(ratio)), 0), nu - 1)
        while self.tail(k) >= tail_mass:
            k += 1
        while k > nu - 1 and self.tail(k - 1) < tail_mass:
            k -= 1
        return max(k, 0)


class OneSidedGeoDist(AGeoDist):
    """Geometric law ``P(k) = (1 - q) q^k``; the ``mode = 0`` edge of AGeo."""

    def __init__(self, right_ratio):
        super().__init__(0, 0.0, right_ratio)

    def __repr__(self):
        return f"OneSidedGeoDist(right_ratio={self.right_ratio!r})"

    def mean(self):
        q = self.right_ratio
        return q / (1.0 - q)

    def variance(self):
        q = self.right_ratio
        return q / (1.0 - q) ** 2

    def variance_upper(self):
        return self.variance()
