"""Closed-form privacy accounting.

Covers the parameter solvers for the three proposed dummy laws, an exact
hockey-stick evaluation of the one-bit mechanism ``a * x + z``, the shuffle
amplification bounds used by the baseline protocols (and their inversion),
and the collusion-adjusted epsilon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._validation import check_count, check_positive, check_probability
from .distributions import AGeoDist, BinomialDist, DummyCountDistribution, OneSidedGeoDist
from .errors import DomainError, InfeasibleError, ValidityError

MAX_TRIALS = 2**62
PROPOSED = ("sbin", "sageo", "s1geo")
SINGLE_MESSAGE = ("grr", "oue", "olh", "rappor")
MULTI_MESSAGE = ("bc20", "cm22", "lwy22")
ALL_PROTOCOLS = PROPOSED + SINGLE_MESSAGE + MULTI_MESSAGE


@dataclass(frozen=True)
class PrivacyBudget:
    epsilon: float
    delta: float

    def __post_init__(self):
        if not math.isfinite(self.epsilon) or self.epsilon < 0:
            raise ValueError(f"epsilon must be finite and >= 0, got {self.epsilon!r}")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"delta must lie in [0, 1], got {self.delta!r}")


class AmplificationBoundKind(str, Enum):
    GENERAL_CLOSED_FORM = "general_closed_form"
    GRR_SPECIFIC = "grr_specific"
    BC20 = "bc20"
    CM22 = "cm22"
    LWY22 = "lwy22"


BOUND_FOR_PROTOCOL = {
    "grr": AmplificationBoundKind.GRR_SPECIFIC,
    "oue": AmplificationBoundKind.GENERAL_CLOSED_FORM,
    "olh": AmplificationBoundKind.GENERAL_CLOSED_FORM,
    "rappor": AmplificationBoundKind.GENERAL_CLOSED_FORM,
    "bc20": AmplificationBoundKind.BC20,
    "cm22": AmplificationBoundKind.CM22,
    "lwy22": AmplificationBoundKind.LWY22,
}


@dataclass(frozen=True)
class BinaryInputMechanism:
    """The one-bit mechanism ``x -> a * x + z`` with ``a ~ Ber(beta)``, ``z ~ dist``."""

    dist: DummyCountDistribution
    beta: float

    def output_pmf(self, x, upper):
        """PMF of the output on ``0..upper`` for input bit ``x``."""
        base = self.dist.pmf_array(upper)
        if x == 0:
            return base
        shifted = np.concatenate(([0.0], base[:-1]))
        return (1.0 - self.beta) * base + self.beta * shifted


# ---------------------------------------------------------------- binomial


def sbin_local_epsilon(eps, beta):
    """Per-item epsilon ``eps0`` of the binomial mechanism that yields ``eps``."""
    eps = check_positive(eps, "eps")
    beta = check_probability(beta, "beta", open_low=True)
    return math.log1p(math.expm1(eps / 2) / beta)


def sbin_privacy(trials, beta, eps0) -> PrivacyBudget:
    """Protocol-level (epsilon, delta) of binomial dummies with ``trials`` coins.

    The one-bit mechanism is then (epsilon/2, delta/2)-DP.
    """
    trials = check_count(trials, "trials", minimum=1)
    beta = check_probability(beta, "beta")
    growth = math.expm1(eps0)
    eta = growth / (growth + 2) - 2 / (trials * (growth + 2))
    if eta < 0 and not math.isclose(eta, 0.0, abs_tol=1e-15):
        raise DomainError(
            f"eps0={eps0} is below log(2/M + 1) for M={trials}; the gap eta must be >= 0"
        )
    eta = max(eta, 0.0)
    epsilon = 2 * math.log1p(beta * growth)
    delta = 4 * beta * math.exp(-eta * eta * trials / 2)
    # a delta at or above one is vacuous; report it as 1
    return PrivacyBudget(epsilon, min(delta, 1.0))


def _sbin_delta(trials, beta, eps0):
    growth = math.expm1(eps0)
    eta = growth / (growth + 2) - 2 / (trials * (growth + 2))
    if eta < 0:
        return math.inf
    return 4 * beta * math.exp(-eta * eta * trials / 2)


def _minimal_integer(predicate, low, limit):
    """Smallest integer ``m`` in ``[low, limit)`` with ``predicate(m)`` true,
    assuming the predicate is monotone."""
    if predicate(low):
        return low
    hi = max(low + 1, 2 * low)
    while not predicate(hi):
        if hi >= limit:
            return None
        hi = min(2 * hi, limit)
    lo = low  # predicate(lo) is false
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if predicate(mid):
            hi = mid
        else:
            lo = mid
    return hi


def solve_binomial_trials(eps, delta, beta=1.0):
    """Fewest coin flips ``M`` meeting the (eps, delta) target."""
    delta = check_probability(delta, "delta", open_low=True, open_high=True)
    eps0 = sbin_local_epsilon(eps, beta)
    m = _minimal_integer(lambda m: _sbin_delta(m, beta, eps0) <= delta, 1, MAX_TRIALS)
    if m is None:
        raise InfeasibleError(f"no binomial trial count below 2^62 reaches delta={delta}")
    return m


def _asykm18_constants(delta, d):
    c1 = 4 * math.sqrt(2 * math.log(1.25 / delta))
    c2 = (8 / (1 - delta / 10)) * (
        (7 * math.sqrt(2) / 4) * math.sqrt(math.log(10 / delta)) + 1 / 3
    ) + (16 / 3) * (math.log(1.25 / delta) + math.log(20 * d / delta) * math.log(10 / delta))
    return c1, c2


def competing_binomial_trials(kind, eps, delta, d):
    """Trial counts demanded by earlier binomial-noise analyses.

    ``kind="dkmmn08"`` inverts ``delta = 4 exp(-eps^2 M / 256)``; ``"asykm18"``
    takes the smallest ``M`` above the floor ``4 max(23 log(10 d / delta), 4)``
    whose epsilon ``c1 / sqrt(M) + c2 / M`` is within budget.
    """
    eps = check_positive(eps, "eps")
    delta = check_probability(delta, "delta", open_low=True, open_high=True)
    if kind == "dkmmn08":
        m = _minimal_integer(
            lambda m: 4 * math.exp(-eps * eps * m / 256) <= delta,
            1,
            MAX_TRIALS,
        )
    elif kind == "asykm18":
        d = check_count(d, "d", minimum=1)
        c1, c2 = _asykm18_constants(delta, d)
        floor = math.ceil(4 * max(23 * math.log(10 * d / delta), 4))
        m = _minimal_integer(lambda m: c1 / math.sqrt(m) + c2 / m <= eps, floor, MAX_TRIALS)
    else:
        raise ValueError(f"unknown competing bound {kind!r}")
    if m is None:
        raise InfeasibleError(f"{kind}: no trial count below 2^62 reaches the target")
    return m


# ------------------------------------------------------------------- AGeo


def sageo_min_beta(eps):
    """Smallest sampling rate the AGeo construction accepts."""
    return -math.expm1(-eps / 2)


def sageo_ratios(eps, beta):
    """Left and right decay ratios ``(q_l, q_r)`` of the AGeo dummy law."""
    eps = float(eps)
    if not eps > 0 or not math.isfinite(eps):
        raise DomainError(f"eps must be finite and > 0 (right ratio must stay below 1), got {eps}")
    beta = check_probability(beta, "beta", open_low=True)
    floor = sageo_min_beta(eps)
    if beta < floor * (1 - 1e-12):
        raise DomainError(f"beta={beta} is below 1 - exp(-eps/2) = {floor}")
    if beta == 1.0:
        q = math.exp(-eps / 2)
        return q, q
    q_left = max((beta - floor) / beta, 0.0)
    q_right = beta / (math.expm1(eps / 2) + beta)
    return q_left, q_right


def sageo_delta(eps, beta, mode):
    """Protocol-level delta of AGeo dummies with the given mode."""
    q_l, q_r = sageo_ratios(eps, beta)
    slack = 1 - math.exp(eps / 2) * (1 - beta)
    if q_l == 0.0 or slack <= 0:
        return 0.0
    kappa = AGeoDist(mode, q_l, q_r).normalizer
    return (2 / kappa) * q_l**mode * slack


def solve_sageo_mode(eps, beta, delta):
    """Smallest mode whose delta does not exceed ``delta``."""
    q_l, _ = sageo_ratios(eps, beta)
    if q_l == 0.0:
        return 0
    delta = check_probability(delta, "delta", open_low=True)
    mode = _minimal_integer(lambda nu: sageo_delta(eps, beta, nu) <= delta, 0, MAX_TRIALS)
    if mode is None:  # pragma: no cover - q_l < 1 makes delta vanish
        raise InfeasibleError("no AGeo mode reaches the target delta")
    return mode


def s1geo_ratio(eps):
    eps = check_positive(eps, "eps")
    return 1 / (1 + math.exp(eps / 2))


# ------------------------------------------------------------- mechanisms


@dataclass(frozen=True)
class ProtocolConfig:
    """Everything the accountant needs to instantiate a protocol."""

    kind: str
    epsilon: float
    delta: float
    beta: float = 1.0
    n: int | None = None
    d: int | None = None
    alpha_bits: int = 2048
    local_epsilon: float | None = None  # cm22 override

    def __post_init__(self):
        if self.kind not in ALL_PROTOCOLS:
            raise ValueError(f"unknown protocol {self.kind!r}; choose from {ALL_PROTOCOLS}")
        check_positive(self.epsilon, "epsilon")
        check_probability(self.delta, "delta", open_high=True)
        check_probability(self.beta, "beta")
        check_count(self.alpha_bits, "alpha_bits", minimum=1)


def proposed_mechanism(kind, eps, delta, beta=1.0) -> BinaryInputMechanism:
    """Instantiate the dummy law and sampling rate of a proposed protocol."""
    if kind == "sbin":
        m = solve_binomial_trials(eps, delta, beta)
        return BinaryInputMechanism(BinomialDist(m), float(beta))
    if kind == "sageo":
        q_l, q_r = sageo_ratios(eps, beta)
        if q_l == 0.0:
            return BinaryInputMechanism(AGeoDist(0, 0.0, q_r), float(beta))
        mode = solve_sageo_mode(eps, beta, delta)
        return BinaryInputMechanism(AGeoDist(mode, q_l, q_r), float(beta))
    if kind == "s1geo":
        return BinaryInputMechanism(OneSidedGeoDist(s1geo_ratio(eps)), sageo_min_beta(eps))
    raise ValueError(f"{kind!r} is not a proposed protocol; choose from {PROPOSED}")


def _hockey_stick(p, q, threshold):
    gap = p - threshold * q
    return math.fsum(gap[gap > 0])


def exact_dp_profile(mech: BinaryInputMechanism, eps_half, rtol=1e-12, tail_mass=1e-15):
    """Tight delta of the one-bit mechanism at level ``eps_half``.

    Takes the larger hockey-stick divergence of the two output laws over both
    orderings. Finite supports are enumerated completely. A geometric right
    tail is summed in closed form, since past the mode both laws decay with
    the same ratio. Any other unbounded law has its truncated mass added.

    Likelihood ratios are compared against ``exp(eps_half) * (1 + rtol)``, so
    ratios equal to the budget up to rounding count as within budget. The
    returned delta therefore certifies ``eps_half + log1p(rtol)``.
    """
    eps_half = check_positive(eps_half, "eps_half", allow_zero=True)
    if mech.beta == 0.0:
        return 0.0
    dist = mech.dist
    threshold = math.exp(eps_half) * (1.0 + rtol)
    ratio = dist.geometric_tail_ratio
    upper = dist.support_upper(tail_mass)
    if ratio is not None:
        upper = max(upper, dist.mode + 1)
    else:
        upper += 1  # room for the shifted law
    p0 = mech.output_pmf(0, upper)
    p1 = mech.output_pmf(1, upper)
    forward = _hockey_stick(p0, p1, threshold)
    backward = _hockey_stick(p1, p0, threshold)
    if ratio is not None:
        rest = dist.tail(upper)
        # beyond the mode P(o | 1) = c * P(o | 0) with a fixed c
        c = (1.0 - mech.beta) + mech.beta / ratio
        forward += rest * max(1.0 - threshold * c, 0.0)
        backward += rest * max(c - threshold, 0.0)
    elif dist.tail(upper - 1) > 0:
        rest = dist.tail(upper - 1)
        forward += rest
        backward += rest
    return max(forward, backward)


# ---------------------------------------------------- shuffle amplification


def general_bound_limit(n, delta):
    """Largest local epsilon covered by the general closed-form bound."""
    return math.log(n / (16 * math.log(2 / delta)))


def shuffle_amplification(eps_local, n, delta):
    """Central epsilon after shuffling ``n`` eps_local-LDP reports."""
    eps_local = check_positive(eps_local, "eps_local", allow_zero=True)
    n = check_count(n, "n", minimum=1)
    delta = check_probability(delta, "delta", open_low=True, open_high=True)
    if n <= 16 * math.log(2 / delta) or eps_local > general_bound_limit(n, delta):
        return eps_local
    e = math.exp(eps_local)
    shrink = (e - 1) / (e + 1)
    spread = 8 * math.sqrt(e * math.log(4 / delta)) / math.sqrt(n) + 8 * e / n
    return math.log1p(shrink * spread)


def grr_amplification(eps_local, n, d, delta):
    """Central epsilon for shuffled generalized randomized response.

    The bound is capped at ``eps_local``, which the shuffled output satisfies
    trivially.
    """
    eps_local = check_positive(eps_local, "eps_local", allow_zero=True)
    n = check_count(n, "n", minimum=1)
    d = check_count(d, "d", minimum=2)
    delta = check_probability(delta, "delta", open_low=True, open_high=True)
    e = math.exp(eps_local)
    spread = 4 * math.sqrt(2 * (d + 1) * math.log(4 / delta)) / math.sqrt((e + d - 1) * d * n)
    spread += 4 * (d + 1) / (d * n)
    return min(math.log1p(math.expm1(eps_local) * spread), eps_local)


def bc20_epsilon(q1, n, delta):
    if q1 >= 1:
        return math.inf
    return math.sqrt(200 * math.log(4 / delta) / ((1 - q1) * n))


def cm22_epsilon(q2, xi, n, delta):
    c0 = math.sqrt(5 * n * xi * q2 * (1 - q2) / (33 * math.log(4 / delta)))
    if c0 <= 1:
        return math.inf
    return math.log1p(2 / (c0 - 1))


def lwy22_epsilon(q3, n, d, delta):
    if q3 <= 0:
        return math.inf
    return math.sqrt(32 * d * math.log(2 / delta) / (q3 * n))


def _bisect_local_epsilon(forward, eps_target, upper, tol=1e-10):
    lo, hi = 1e-12, upper
    if forward(hi) <= eps_target:
        return hi
    if forward(lo) >= eps_target:
        return lo
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        value = forward(mid)
        if abs(value - eps_target) <= tol:
            return mid
        if value < eps_target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    return 0.5 * (lo + hi)


def bc20_q1(eps, n, delta):
    if not 0 < eps <= 2:
        raise ValidityError(f"bc20 requires eps in (0, 2], got {eps}")
    need = 400 * math.log(4 / delta) / eps**2
    if n < need:
        raise ValidityError(f"bc20 requires n >= 400 log(4/delta)/eps^2 = {need:.6g}, got n={n}")
    return 1 - 200 * math.log(4 / delta) / (eps**2 * n)


def lwy22_q3(eps, n, d, delta):
    if not 0 < eps <= 3:
        raise ValidityError(f"lwy22 requires eps in (0, 3], got {eps}")
    need = 32 * d * math.log(2 / delta) / eps**2
    if n < need:
        raise ValidityError(f"lwy22 requires n >= 32 d log(2/delta)/eps^2 = {need:.6g}, got n={n}")
    return 32 * d * math.log(2 / delta) / (eps**2 * n)


def _cm22_requirement(eps, n, delta):
    """Right-hand side of the CM22 flip-rate condition times xi."""
    ratio = (math.exp(eps) + 1) / math.expm1(eps)
    return 33 / (5 * n) * ratio**2 * math.log(4 / delta)


def cm22_params(eps, n, delta, local_epsilon=None):
    """Dummy-vector count ``xi`` and flip rate ``q2`` for CM22.

    Without ``local_epsilon`` the flip rate is the smallest one meeting the
    privacy condition at ``xi = max(10, xi_min)``; ``xi_min`` is the fewest
    dummies for which some flip rate in ``(0, 1/2]`` is feasible. With
    ``local_epsilon`` the flip rate is ``1 / (exp(local_epsilon/2) + 1)`` and
    ``xi_min`` is taken at that rate.
    """
    need = _cm22_requirement(eps, n, delta)
    if local_epsilon is None:
        xi = max(10, math.ceil(need / 0.25))
        rhs = need / xi
        q2 = 0.5 * (1 - math.sqrt(max(1 - 4 * rhs, 0.0)))
        # guard against rounding pushing the product just below the requirement
        while q2 * (1 - q2) < rhs:
            q2 = math.nextafter(q2, 1.0)
        return {"xi": xi, "q2": q2}
    q2 = 1 / (math.exp(local_epsilon / 2) + 1)
    xi = max(10, math.ceil(need / (q2 * (1 - q2))))
    return {"xi": xi, "q2": q2}


def invert_amplification(kind, eps_target, n, d, delta, local_epsilon=None):
    """Protocol parameters that make the amplification bound hit ``eps_target``.

    Returns a dict: ``{"eps_local"}`` for the single-message bounds,
    ``{"q1"}`` for bc20, ``{"xi", "q2"}`` for cm22 and ``{"q3"}`` for lwy22.
    """
    kind = AmplificationBoundKind(kind)
    eps_target = check_positive(eps_target, "eps_target")
    n = check_count(n, "n", minimum=1)
    delta = check_probability(delta, "delta", open_low=True, open_high=True)
    if kind is AmplificationBoundKind.GENERAL_CLOSED_FORM:
        if n <= 16 * math.log(2 / delta):
            return {"eps_local": eps_target}
        limit = general_bound_limit(n, delta)
        if eps_target >= limit:
            return {"eps_local": eps_target}
        upper = min(50.0, limit)
        if shuffle_amplification(upper, n, delta) <= eps_target:
            # no in-branch solution reaches the target; use the branch edge
            return {"eps_local": upper}
        eps_local = _bisect_local_epsilon(
            lambda e: shuffle_amplification(e, n, delta), eps_target, upper
        )
        return {"eps_local": eps_local}
    if kind is AmplificationBoundKind.GRR_SPECIFIC:
        d = check_count(d, "d", minimum=2)
        eps_local = _bisect_local_epsilon(
            lambda e: grr_amplification(e, n, d, delta), eps_target, 50.0
        )
        return {"eps_local": eps_local}
    if kind is AmplificationBoundKind.BC20:
        return {"q1": bc20_q1(eps_target, n, delta)}
    if kind is AmplificationBoundKind.CM22:
        return cm22_params(eps_target, n, delta, local_epsilon)
    d = check_count(d, "d", minimum=1)
    return {"q3": lwy22_q3(eps_target, n, d, delta)}


def baseline_parameters(kind, eps, n, d, delta, local_epsilon=None):
    """Inverted parameters for a baseline protocol name."""
    if kind not in BOUND_FOR_PROTOCOL:
        raise ValueError(f"{kind!r} is not a baseline protocol")
    return invert_amplification(BOUND_FOR_PROTOCOL[kind], eps, n, d, delta, local_epsilon)


def amplified_epsilon(kind, params, n, d, delta):
    """Forward bound of a baseline protocol with fixed parameters and ``n`` users."""
    bound = BOUND_FOR_PROTOCOL[kind]
    if n < 1:
        return math.inf
    if bound is AmplificationBoundKind.GENERAL_CLOSED_FORM:
        return shuffle_amplification(params["eps_local"], n, delta)
    if bound is AmplificationBoundKind.GRR_SPECIFIC:
        return grr_amplification(params["eps_local"], n, d, delta)
    if bound is AmplificationBoundKind.BC20:
        return bc20_epsilon(params["q1"], n, delta)
    if bound is AmplificationBoundKind.CM22:
        return cm22_epsilon(params["q2"], params["xi"], n, delta)
    return lwy22_epsilon(params["q3"], n, d, delta)


def collusion_epsilon(kind, target_eps, n, omega_size, d, delta, local_epsilon=None):
    """Epsilon that survives when ``omega_size`` users collude with the receiver.

    The proposed protocols add their noise at the shuffler, so colluders learn
    nothing that weakens it. For the pure shuffle protocols, the remaining
    ``n - omega_size`` honest reports are all that hides a victim.
    """
    n = check_count(n, "n", minimum=1)
    omega_size = check_count(omega_size, "omega_size")
    if omega_size >= n:
        raise ValueError("omega_size must be smaller than n")
    if kind in PROPOSED:
        return float(target_eps)
    params = baseline_parameters(kind, target_eps, n, d, delta, local_epsilon)
    return amplified_epsilon(kind, params, n - omega_size, d, delta)
