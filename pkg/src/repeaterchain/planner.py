"""Scenario-level planning on top of the chain model.

Covers the questions an operator actually asks: how many links minimize
the distribution time for a given distance, what happens when station
spacing is frozen and the leftover distance is bridged with plain fiber,
where the repeater starts beating direct transmission, and how the
metrics behave across parameter sweeps.

Every sweep point is a pure function of its inputs, so grids can be
evaluated in any order or in parallel; records are returned in grid
order regardless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import (
    BeyondRepresentable,
    ConfigError,
    ModelError,
    NoCrossoverInRange,
    UnreachableConfiguration,
)
from .model import (
    DEFAULT_TOL,
    ChainConfig,
    ChannelParams,
    HardwareParams,
    RepeaterMetrics,
    metrics,
)

__all__ = [
    "FixedLinkPlan",
    "OptimizationResult",
    "SweepRecord",
    "SweepSpec",
    "crossover_with_direct",
    "direct_transmission_time",
    "optimize_link_count",
    "plan_fixed_link",
    "run_sweep",
]

# Below ~25 km links the swap overhead 2^(n-1)/(eta^4)^n always dominates,
# so the scan never needs finer splits than this.
_MIN_USEFUL_LINK_KM = 25.0
_MAX_SCAN_LINKS = 128

_SWEEPABLE = ("total_length", "mode_count", "emission_prob")


def direct_transmission_time(L: float, ch: ChannelParams, source_rate: float) -> float:
    """Mean time in seconds until one photon from a ``source_rate`` Hz
    source survives ``L`` km of fiber: 10^(attenuation * L / 10) / rate."""
    if L < 0.0:
        raise ConfigError(f"distance must be >= 0, got {L}")
    if source_rate <= 0.0:
        raise ConfigError(f"source_rate must be > 0, got {source_rate}")
    try:
        t = 10.0 ** (ch.attenuation * L / 10.0) / source_rate
    except OverflowError:
        raise BeyondRepresentable("direct transmission time beyond representable") from None
    if not math.isfinite(t):
        raise BeyondRepresentable("direct transmission time beyond representable")
    return t


@dataclass(frozen=True)
class OptimizationResult:
    """Outcome of an exhaustive link-count scan.

    ``runner_up_ratio`` is the second-best total time over the best one
    (infinite when only a single link count was feasible).
    """

    best_n: int
    metrics: RepeaterMetrics
    scanned_range: tuple[int, int]
    runner_up_ratio: float


def _default_n_max(total_length: float) -> int:
    return min(_MAX_SCAN_LINKS, max(1, math.ceil(total_length / _MIN_USEFUL_LINK_KM)))


def optimize_link_count(
    hw: HardwareParams,
    total_length: float,
    ch: ChannelParams,
    n_max: int | None = None,
    tol: float = DEFAULT_TOL,
) -> OptimizationResult:
    """Scan link counts 1..n_max exhaustively and return the one with the
    smallest total distribution time (ties go to fewer links)."""
    if n_max is None:
        n_max = _default_n_max(total_length)
    if n_max < 1:
        raise ConfigError(f"n_max must be >= 1, got {n_max}")
    best: tuple[int, RepeaterMetrics] | None = None
    second_t = math.inf
    for n in range(1, n_max + 1):
        try:
            m = metrics(hw, ChainConfig(total_length=total_length, link_count=n), ch, tol)
        except ModelError:
            continue
        if best is None or m.t_tot < best[1].t_tot:
            if best is not None:
                second_t = min(second_t, best[1].t_tot)
            best = (n, m)
        else:
            second_t = min(second_t, m.t_tot)
    if best is None:
        raise UnreachableConfiguration(
            f"no feasible link count in [1, {n_max}] for L = {total_length} km"
        )
    return OptimizationResult(
        best_n=best[0],
        metrics=best[1],
        scanned_range=(1, n_max),
        runner_up_ratio=second_t / best[1].t_tot,
    )


@dataclass(frozen=True)
class FixedLinkPlan:
    """A chain built from fixed-length links plus a passive fiber extension.

    ``node_count`` is the number of elementary links; the far node sits at
    ``node_span = node_count * link_length`` km.  ``extension`` is the
    signed leftover distance to the target: positive when the chain stops
    short of it (``side = "below"``) and negative when the chain overshoots
    and the photon travels back (``side = "above"``).  ``metrics`` already
    includes the extension's transmission loss and propagation delay.
    """

    link_length: float
    node_count: int
    node_span: float
    extension: float
    side: str
    metrics: RepeaterMetrics

    def __post_init__(self) -> None:
        if self.side not in ("below", "above"):
            raise ConfigError(f"side must be 'below' or 'above', got {self.side!r}")
        if abs(self.extension) >= self.link_length:
            raise ModelError("fiber extension is longer than one link")


def _extended_metrics(
    hw: HardwareParams,
    ch: ChannelParams,
    base: RepeaterMetrics,
    n: int,
    extension_km: float,
) -> RepeaterMetrics:
    # The extension adds propagation delay to the controller signalling and
    # to the storage span, and one photon has to survive the extra fiber,
    # which scales the expected repetition count by 1/transmission.
    extra = extension_km / ch.signal_speed
    transmission = 10.0 ** (-ch.attenuation * extension_km / 10.0)
    retrieval = (hw.memory_eff * hw.detector_eff) ** 2
    t_cc = base.t_cc + extra
    t_tot = (base.t_ec + t_cc) / (base.p_es * retrieval * transmission)
    if not math.isfinite(t_tot):
        raise BeyondRepresentable("total distribution time beyond representable")
    return replace(
        base,
        t_cc=t_cc,
        t_tot=t_tot,
        mem_time_avg=base.t_ec + t_cc,
    )


def plan_fixed_link(
    hw: HardwareParams,
    total_length: float,
    ch: ChannelParams,
    link_length: float = 125.0,
    tol: float = DEFAULT_TOL,
) -> FixedLinkPlan:
    """Plan a chain whose links all have the given fixed length.

    When the target distance is not a multiple of ``link_length``, both
    flanking node counts are evaluated and the residual distance is
    bridged with plain fiber; the side with the smaller resulting total
    time wins.
    """
    if link_length <= 0.0:
        raise ConfigError(f"link_length must be > 0, got {link_length}")
    if total_length < link_length:
        raise ConfigError(
            f"total_length {total_length} km is shorter than one link ({link_length} km)"
        )
    ratio = total_length / link_length
    nearest = round(ratio)
    if abs(ratio - nearest) < 1e-9 and nearest >= 1:
        candidates = [int(nearest)]
    else:
        candidates = [int(math.floor(ratio)), int(math.floor(ratio)) + 1]
    best: FixedLinkPlan | None = None
    for n in candidates:
        span = n * link_length
        extension = total_length - span
        base = metrics(hw, ChainConfig(total_length=span, link_count=n), ch, tol)
        adjusted = _extended_metrics(hw, ch, base, n, abs(extension))
        plan = FixedLinkPlan(
            link_length=link_length,
            node_count=n,
            node_span=span,
            extension=extension,
            side="below" if extension >= 0.0 else "above",
            metrics=adjusted,
        )
        if best is None or plan.metrics.t_tot < best.metrics.t_tot:
            best = plan
    assert best is not None
    return best


def crossover_with_direct(
    hw: HardwareParams,
    ch: ChannelParams,
    source_rate: float = 1.0e10,
    tol: float = DEFAULT_TOL,
    bracket: tuple[float, float] = (10.0, 1.0e4),
) -> float:
    """Distance in km at which the optimized chain and direct transmission
    take equally long, found by bisection to within 1 km."""
    lo, hi = bracket
    if not (0.0 < lo < hi):
        raise ConfigError(f"invalid bracket {bracket}")

    def gap(L: float) -> float:
        repeater = optimize_link_count(hw, L, ch, tol=tol).metrics.t_tot
        return repeater - direct_transmission_time(L, ch, source_rate)

    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if math.copysign(1.0, g_lo) == math.copysign(1.0, g_hi):
        raise NoCrossoverInRange(
            f"no crossover in range [{lo}, {hi}] km at source rate {source_rate} Hz"
        )
    while hi - lo > 1.0:
        mid = 0.5 * (lo + hi)
        g_mid = gap(mid)
        if g_mid == 0.0:
            return mid
        if math.copysign(1.0, g_mid) == math.copysign(1.0, g_lo):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class SweepSpec:
    """A one-dimensional parameter sweep.

    ``swept_parameter`` is one of ``total_length`` (km), ``mode_count``,
    or ``emission_prob``; ``grid`` must be strictly increasing.  When the
    swept parameter is not the distance, ``total_length`` fixes it.  With
    ``fixed_link_length`` set, each point is planned at that link length
    instead of optimizing the link count.  A ``source_rate`` adds the
    direct-transmission baseline time to every record.
    """

    swept_parameter: str
    grid: tuple[float, ...]
    hw: HardwareParams
    ch: ChannelParams
    total_length: float | None = None
    fixed_link_length: float | None = None
    n_max: int | None = None
    source_rate: float | None = None

    def __post_init__(self) -> None:
        if self.swept_parameter not in _SWEEPABLE:
            raise ConfigError(
                f"swept_parameter must be one of {_SWEEPABLE}, got {self.swept_parameter!r}"
            )
        grid = tuple(float(v) for v in self.grid)
        if not grid:
            raise ConfigError("sweep grid must not be empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("sweep grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        if self.swept_parameter != "total_length" and self.total_length is None:
            raise ConfigError("total_length is required when it is not the swept parameter")
        if self.swept_parameter == "mode_count" and any(int(v) != v for v in grid):
            raise ConfigError("mode_count grid values must be integers")


@dataclass(frozen=True)
class SweepRecord:
    """One grid point of a sweep; ``error`` is set instead of ``metrics``
    when the point is infeasible."""

    value: float
    metrics: RepeaterMetrics | None
    total_length: float
    best_n: int | None = None
    plan: FixedLinkPlan | None = None
    direct_time: float | None = None
    error: str | None = None


def _sweep_point(spec: SweepSpec, value: float, tol: float) -> SweepRecord:
    hw = spec.hw
    if spec.swept_parameter == "total_length":
        total_length = value
    else:
        total_length = spec.total_length  # type: ignore[assignment]
        if spec.swept_parameter == "mode_count":
            hw = replace(hw, mode_count=int(value))
        else:
            hw = replace(hw, emission_prob=value)
    direct = None
    if spec.source_rate is not None:
        try:
            direct = direct_transmission_time(total_length, spec.ch, spec.source_rate)
        except BeyondRepresentable:
            direct = None  # baseline overflows long before the chain does
    try:
        if spec.fixed_link_length is not None:
            plan = plan_fixed_link(hw, total_length, spec.ch, spec.fixed_link_length, tol)
            return SweepRecord(
                value=value,
                metrics=plan.metrics,
                total_length=total_length,
                best_n=plan.node_count,
                plan=plan,
                direct_time=direct,
            )
        result = optimize_link_count(hw, total_length, spec.ch, spec.n_max, tol)
        return SweepRecord(
            value=value,
            metrics=result.metrics,
            total_length=total_length,
            best_n=result.best_n,
            direct_time=direct,
        )
    except (ModelError, ConfigError) as exc:
        return SweepRecord(
            value=value,
            metrics=None,
            total_length=total_length,
            direct_time=direct,
            error=str(exc),
        )


def run_sweep(spec: SweepSpec, tol: float = DEFAULT_TOL) -> list[SweepRecord]:
    """Evaluate the sweep point by point; infeasible points are recorded
    inline and the sweep continues."""
    return [_sweep_point(spec, value, tol) for value in spec.grid]
