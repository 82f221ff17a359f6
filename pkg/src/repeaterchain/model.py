"""Closed-form performance model of a semihierarchical repeater chain.

A chain of total length ``L`` km is split into ``n`` elementary links.
Every link repeatedly attempts heralded entanglement creation (EC), each
attempt succeeding with probability ``p`` set by fiber loss over half a
link, detector efficiency, source emission probability, and the number of
parallel modes.  Once every link has succeeded, a central controller
triggers all Bell-state measurements (entanglement swapping, ES) at once;
if any swap or the final retrieval fails, the whole round restarts.

This module evaluates the resulting quantities deterministically:

* per-attempt EC probability (single mode and multimode),
* the waiting-time distribution of one link and of the slowest of ``n``
  links (a maximum of independent geometric variables),
* the expected number of attempts until all links are ready,
* chain-level metrics: EC time, classical-signalling time, swap success
  probability, average distribution time, and the mean and standard
  deviation of the memory storage time per round.

Units are km, seconds, and dB/km throughout; probabilities are
dimensionless.  All functions are pure and all returned objects immutable,
so values can be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from mpmath import mp

from .errors import (
    BeyondRepresentable,
    ConfigError,
    ModelError,
    NonTerminatingProcess,
    UnreachableConfiguration,
)

__all__ = [
    "DEFAULT_TOL",
    "AttemptDistribution",
    "ChainConfig",
    "ChannelParams",
    "HardwareParams",
    "RepeaterMetrics",
    "combined_attempt_dist",
    "ec_prob",
    "ec_prob_single_mode",
    "expected_max_attempts",
    "expected_max_attempts_closed_form",
    "memory_time_std",
    "metrics",
    "single_link_attempt_dist",
]

#: Default relative truncation tolerance for all infinite series.
DEFAULT_TOL = 1e-12

# Series with more terms than this are evaluated through the
# arbitrary-precision closed form instead of explicit summation.
_MAX_EXPLICIT_TERMS = 5_000_000

# Hard cap on materialized distribution arrays (~256 MB of float64).
_MAX_DIST_TERMS = 1 << 25

_CHUNK = 1 << 16


def _check_prob(value: float, name: str) -> float:
    if not (0.0 <= value <= 1.0):
        raise ConfigError(f"{name} must be in [0, 1], got {value}")
    return float(value)


def _check_tol(tol: float) -> float:
    if not (0.0 < tol < 1.0):
        raise ConfigError(f"tol must be in (0, 1), got {tol}")
    return float(tol)


@dataclass(frozen=True)
class ChannelParams:
    """Fiber properties: attenuation in dB/km and signal speed in km/s."""

    attenuation: float = 0.2
    signal_speed: float = 2.0e5

    def __post_init__(self) -> None:
        if self.attenuation < 0.0:
            raise ConfigError(f"attenuation must be >= 0, got {self.attenuation}")
        if self.signal_speed <= 0.0:
            raise ConfigError(f"signal_speed must be > 0, got {self.signal_speed}")


@dataclass(frozen=True)
class HardwareParams:
    """Station hardware: detector/memory efficiencies, source emission
    probability, and the number of parallel modes per attempt."""

    detector_eff: float = 0.9
    memory_eff: float = 0.9
    emission_prob: float = 0.9
    mode_count: int = 100

    def __post_init__(self) -> None:
        _check_prob(self.detector_eff, "detector_eff")
        _check_prob(self.memory_eff, "memory_eff")
        _check_prob(self.emission_prob, "emission_prob")
        if int(self.mode_count) != self.mode_count or self.mode_count < 1:
            raise ConfigError(f"mode_count must be a positive integer, got {self.mode_count}")


@dataclass(frozen=True)
class ChainConfig:
    """Total distance in km, number of elementary links, and the derived
    per-link length ``link_length = total_length / link_count``."""

    total_length: float
    link_count: int
    link_length: float = field(default=0.0)

    def __post_init__(self) -> None:
        if self.total_length <= 0.0:
            raise ConfigError(f"total_length must be > 0, got {self.total_length}")
        if int(self.link_count) != self.link_count or self.link_count < 1:
            raise ConfigError(f"link_count must be a positive integer, got {self.link_count}")
        if self.link_length == 0.0:
            object.__setattr__(self, "link_length", self.total_length / self.link_count)
        else:
            expected = self.total_length / self.link_count
            if not math.isclose(self.link_length, expected, rel_tol=1e-12):
                raise ConfigError(
                    f"link_length {self.link_length} is inconsistent with "
                    f"total_length / link_count = {expected}"
                )


@dataclass(frozen=True)
class AttemptDistribution:
    """Truncated probability distribution over attempt numbers k >= 1.

    ``probs[i]`` is the probability that success happens at attempt
    ``i + 1``; ``tail_mass`` is the probability left beyond the truncation
    point, so ``sum(probs) + tail_mass == 1`` up to rounding.
    """

    probs: np.ndarray
    tail_mass: float

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64)
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)
        if probs.size == 0:
            raise ModelError("empty attempt distribution")
        if float(probs.min()) < 0.0 or float(probs.max()) > 1.0 + 1e-12:
            raise ModelError("attempt distribution entries outside [0, 1]")
        total = float(probs.sum()) + self.tail_mass
        if abs(total - 1.0) > 1e-10:
            raise ModelError(f"attempt distribution not normalized: sum = {total}")

    @property
    def attempt_numbers(self) -> np.ndarray:
        """Attempt indices k = 1 .. len(probs)."""
        return np.arange(1, self.probs.size + 1)

    def expectation(self) -> float:
        """Mean attempt number of the truncated distribution (tail ignored)."""
        return float(np.dot(self.attempt_numbers, self.probs))


@dataclass(frozen=True)
class RepeaterMetrics:
    """All chain-level figures of merit for one configuration.

    Times in seconds: ``t_ec`` (expected entanglement-creation time over
    all links), ``t_cc`` (classical signalling to and from the central
    controller), ``t_tot`` (average end-to-end distribution time), and the
    per-round memory storage time statistics.  ``mem_time_avg`` equals
    ``t_ec + t_cc`` by construction.
    """

    ec_prob: float
    expected_attempts: float
    t_ec: float
    t_cc: float
    p_es: float
    t_tot: float
    mem_time_avg: float
    mem_time_std: float

    def __post_init__(self) -> None:
        if not (0.0 < self.p_es <= 1.0):
            raise ModelError(f"p_es must be in (0, 1], got {self.p_es}")
        for name in ("t_ec", "t_cc", "t_tot", "mem_time_avg", "mem_time_std"):
            if getattr(self, name) < 0.0:
                raise ModelError(f"{name} must be >= 0")


def ec_prob_single_mode(hw: HardwareParams, chain: ChainConfig, ch: ChannelParams) -> float:
    """Per-attempt success probability of the midpoint Bell-state measurement
    for a single optical mode.

    Both photons of a link survive half the link length each, so the loss
    exponent uses half the per-link distance; the 1/2 prefactor is the
    linear-optics BSM ceiling.  The result is in [0, 1/2].
    """
    exponent = -ch.attenuation * chain.total_length / (20.0 * chain.link_count)
    amplitude = hw.detector_eff * hw.emission_prob * 10.0**exponent
    return 0.5 * amplitude * amplitude


def ec_prob(hw: HardwareParams, chain: ChainConfig, ch: ChannelParams) -> float:
    """Per-attempt EC probability with ``mode_count`` parallel modes:
    the chance that at least one mode yields a successful BSM."""
    p1 = ec_prob_single_mode(hw, chain, ch)
    if p1 == 0.0:
        return 0.0
    return -math.expm1(hw.mode_count * math.log1p(-p1))


def _require_success_prob(p: float) -> float:
    if p == 0.0:
        raise NonTerminatingProcess("non-terminating process: success probability is zero")
    if not (0.0 < p <= 1.0):
        raise ConfigError(f"success probability must be in (0, 1], got {p}")
    return float(p)


def _check_links(n: int) -> int:
    if int(n) != n or n < 1:
        raise ConfigError(f"link count must be a positive integer, got {n}")
    return int(n)


def single_link_attempt_dist(p: float, tol: float = DEFAULT_TOL) -> AttemptDistribution:
    """Geometric distribution of the attempt number of one link,
    truncated once the remaining tail mass drops to ``tol``."""
    p = _require_success_prob(p)
    tol = _check_tol(tol)
    if p == 1.0:
        return AttemptDistribution(probs=np.array([1.0]), tail_mass=0.0)
    log_q = math.log1p(-p)
    length = max(1, math.ceil(math.log(tol) / log_q))
    if length > _MAX_DIST_TERMS:
        raise ModelError(
            f"attempt distribution needs {length} terms at tol={tol}; "
            "success probability too small to materialize"
        )
    ks = np.arange(length, dtype=np.float64)
    probs = np.exp(math.log(p) + ks * log_q)
    tail = math.exp(length * log_q)
    return AttemptDistribution(probs=probs, tail_mass=tail)


def _combined_dist_length(p: float, n: int, tol: float) -> int:
    # Smallest K with 1 - (1 - q^K)^n <= tol.
    log_q = math.log1p(-p)
    threshold = -math.expm1(math.log1p(-tol) / n)  # about tol / n
    return max(1, math.ceil(math.log(threshold) / log_q))


def combined_attempt_dist(p: float, n: int, tol: float = DEFAULT_TOL) -> AttemptDistribution:
    """Distribution of the attempt number at which the slowest of ``n``
    independent links succeeds: P(k) = (1 - q^k)^n - (1 - q^(k-1))^n.

    Powers are taken through log1p/expm1 so the result stays accurate for
    small ``p`` and large ``n``.
    """
    p = _require_success_prob(p)
    n = _check_links(n)
    tol = _check_tol(tol)
    if p == 1.0:
        return AttemptDistribution(probs=np.array([1.0]), tail_mass=0.0)
    length = _combined_dist_length(p, n, tol)
    if length > _MAX_DIST_TERMS:
        raise ModelError(
            f"attempt distribution needs {length} terms at tol={tol}; "
            "success probability too small to materialize"
        )
    log_q = math.log1p(-p)
    ks = np.arange(length + 1, dtype=np.float64)
    with np.errstate(divide="ignore"):
        cdf = np.exp(n * np.log1p(-np.exp(ks * log_q)))
    probs = np.diff(cdf)
    np.maximum(probs, 0.0, out=probs)  # guard 1-ulp inversions of the CDF
    tail = -math.expm1(n * math.log1p(-math.exp(length * log_q)))
    return AttemptDistribution(probs=probs, tail_mass=max(tail, 0.0))


def _explicit_feasible(p: float, n: int, tol: float) -> bool:
    lam = -math.log1p(-p)
    bound = (math.log(max(n, 2)) + math.log(1.0 / tol)) / lam
    return bound <= _MAX_EXPLICIT_TERMS


def _survival_tail(p: float, n: int, k_start: int) -> float:
    # sum_{k >= k_start} [1 - (1 - q^k)^n]
    #   = sum_i (-1)^(i+1) C(n, i) q^(i k_start) / (1 - q^i),
    # convergent term-by-term once n q^k_start < 1.
    log_q = math.log1p(-p)
    tail = 0.0
    for i in range(1, n + 1):
        power = math.exp(i * k_start * log_q)
        if power == 0.0:
            break
        term = math.comb(n, i) * power / -math.expm1(i * log_q)
        if i % 2 == 0:
            term = -term
        tail += term
        if abs(term) <= 1e-17 * abs(tail):
            break
    return max(tail, 0.0)


def _survival_sum_mean(p: float, n: int, tol: float) -> float:
    # <k> = sum_{k >= 0} P(max > k) = sum_{k >= 0} [1 - (1 - q^k)^n],
    # summed explicitly until the summand is negligible, then completed
    # with the analytic geometric tail.
    lam = -math.log1p(-p)
    total = 0.0
    k0 = 0
    while True:
        ks = np.arange(k0, k0 + _CHUNK, dtype=np.float64)
        x = np.exp(-lam * ks)  # q^k
        with np.errstate(divide="ignore"):
            summand = -np.expm1(n * np.log1p(-x))
        total += float(summand.sum())
        k0 += _CHUNK
        converged = summand[-1] <= tol * total and n * x[-1] <= 0.25
        if converged:
            break
        if k0 > _MAX_EXPLICIT_TERMS:
            if n * x[-1] <= 0.25:
                break  # analytic tail still valid, just short of the tol stop
            return _closed_form_moments(p, n)[0]
    return total + _survival_tail(p, n, k0)


def _closed_form_moments(p: float, n: int) -> tuple[float, float]:
    # Inclusion-exclusion closed forms for the mean and variance of the
    # maximum of n geometric variables.  The alternating binomial sums
    # cancel ~n bits, and 1 - p must stay distinguishable from 1, so the
    # working precision covers both.
    prec = 70 + n + max(0, math.ceil(-math.log2(p)))
    with mp.workprec(prec):
        q = mp.one - mp.mpf(p)
        mean = mp.mpf(0)
        second = mp.mpf(0)
        for i in range(1, n + 1):
            qi = q**i
            denom = mp.one - qi
            term = mp.mpf(math.comb(n, i))
            if i % 2 == 0:
                term = -term
            mean += term / denom
            second += term * (mp.one + qi) / (denom * denom)
        variance = second - mean * mean
        return float(mean), max(float(variance), 0.0)


def _attempts_mean(p: float, n: int, tol: float) -> float:
    if p == 1.0:
        return 1.0
    if _explicit_feasible(p, n, tol):
        return _survival_sum_mean(p, n, tol)
    return _closed_form_moments(p, n)[0]


def _attempts_moments(p: float, n: int, tol: float) -> tuple[float, float]:
    """Mean and variance of the slowest link's attempt number."""
    if p == 1.0:
        return 1.0, 0.0
    if not _explicit_feasible(p, n, tol):
        return _closed_form_moments(p, n)
    mean = _survival_sum_mean(p, n, tol)
    dist = combined_attempt_dist(p, n, tol)
    deviations = dist.attempt_numbers - mean
    variance = float(np.dot(deviations * deviations, dist.probs))
    return mean, variance


def expected_max_attempts(p: float, n: int, tol: float = DEFAULT_TOL) -> float:
    """Expected number of attempts until all ``n`` links have succeeded.

    Evaluated through the survival-function sum; configurations whose
    series would be impractically long fall back to the closed form taken
    at boosted precision.  Equals ``1 / p`` for a single link.
    """
    if p == 0.0:
        raise NonTerminatingProcess("divergent expectation: success probability is zero")
    p = _require_success_prob(p)
    n = _check_links(n)
    tol = _check_tol(tol)
    return _attempts_mean(p, n, tol)


def expected_max_attempts_closed_form(p: float, n: int) -> float:
    """Inclusion-exclusion closed form sum_i (-1)^(i+1) C(n,i) / (1 - q^i).

    Independent cross-check route for :func:`expected_max_attempts`.  Plain
    double precision: the alternating sum loses accuracy beyond n ~ 20, so
    keep it to small link counts.
    """
    p = _require_success_prob(p)
    n = _check_links(n)
    if p == 1.0:
        return 1.0
    log_q = math.log1p(-p)
    total = 0.0
    for i in range(1, n + 1):
        term = math.comb(n, i) / -math.expm1(i * log_q)
        total += term if i % 2 == 1 else -term
    return total


def metrics(
    hw: HardwareParams,
    chain: ChainConfig,
    ch: ChannelParams,
    tol: float = DEFAULT_TOL,
) -> RepeaterMetrics:
    """Evaluate every chain-level metric for one configuration.

    Raises :class:`NonTerminatingProcess` when the EC probability is zero
    and :class:`UnreachableConfiguration` when the end-to-end success
    probability underflows.
    """
    tol = _check_tol(tol)
    p = ec_prob(hw, chain, ch)
    if p == 0.0:
        raise NonTerminatingProcess(
            "non-terminating process: entanglement creation never succeeds"
        )
    n = chain.link_count
    mean, variance = _attempts_moments(p, n, tol)
    clock = chain.link_length / ch.signal_speed
    t_ec = clock * mean
    t_cc = chain.total_length / ch.signal_speed
    retrieval = (hw.memory_eff * hw.detector_eff) ** 2
    p_es = (0.5 * retrieval) ** (n - 1)
    if retrieval == 0.0 or p_es == 0.0:
        raise UnreachableConfiguration(
            "unreachable configuration: end-to-end success probability underflows"
        )
    t_tot = (t_ec + t_cc) / (p_es * retrieval)
    if not math.isfinite(t_tot):
        raise BeyondRepresentable("total distribution time beyond representable")
    return RepeaterMetrics(
        ec_prob=p,
        expected_attempts=mean,
        t_ec=t_ec,
        t_cc=t_cc,
        p_es=p_es,
        t_tot=t_tot,
        mem_time_avg=t_ec + t_cc,
        mem_time_std=clock * math.sqrt(variance),
    )


def memory_time_std(
    hw: HardwareParams,
    chain: ChainConfig,
    ch: ChannelParams,
    tol: float = DEFAULT_TOL,
) -> float:
    """Standard deviation of the per-round memory storage time in seconds.

    Only the EC attempt count fluctuates; the classical-communication part
    is a constant offset, so the spread is ``(L0/c) * std(attempts)``.
    """
    tol = _check_tol(tol)
    p = ec_prob(hw, chain, ch)
    if p == 0.0:
        raise NonTerminatingProcess(
            "non-terminating process: entanglement creation never succeeds"
        )
    _, variance = _attempts_moments(p, chain.link_count, tol)
    return (chain.link_length / ch.signal_speed) * math.sqrt(variance)
