"""Waiting-time summaries of a simulation trace.

``compute_stats`` discards a warm-up prefix of customers, then reports
plug-in estimators for the waiting-time law (mean, unbiased variance,
second moment conditional on waiting, fraction who wait) together with
batch-means standard errors (the retained customers are cut into 20
contiguous batches; the spread of per-batch means/variances estimates the
error of the overall figures, which a correlated stationary stream would
otherwise understate).

It also measures everything a Little's-law audit needs: the time average of
the number-in-system step function over the retained horizon, the mean
sojourn, and the effective arrival rate (retained customers divided by the
horizon length).  The horizon runs from the first retained arrival to the
last retained departure, and customers are clipped to it, so the estimate
is self-consistent rather than assuming stationarity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EmptyAfterWarmupError
from .simulate import SimTrace

__all__ = ["WaitStats", "compute_stats", "DEFAULT_WARMUP", "DEFAULT_BATCHES"]

DEFAULT_WARMUP = 0.1
DEFAULT_BATCHES = 20


@dataclass(frozen=True)
class WaitStats:
    """Flat summary of the retained portion of one run.

    ``se_mean_wait``/``se_var_wait`` are batch-means standard errors, or
    ``None`` when fewer than two customers per batch are available;
    ``second_moment_given_wait`` is ``None`` when nobody waited.  The exact
    identity ``mean_sojourn == mean_wait + mean_service`` is enforced by
    construction (the sojourn mean is computed as that sum).
    """

    count: int
    warmup_discarded: int
    mean_wait: float
    var_wait: float
    se_mean_wait: float | None
    se_var_wait: float | None
    second_moment_given_wait: float | None
    frac_waiting: float
    mean_service: float
    mean_sojourn: float
    time_avg_in_system: float
    horizon: float
    effective_arrival_rate: float

    def to_dict(self) -> dict[str, object]:
        return {
            "count": self.count,
            "warmup_discarded": self.warmup_discarded,
            "mean_wait": self.mean_wait,
            "var_wait": self.var_wait,
            "se_mean_wait": self.se_mean_wait,
            "se_var_wait": self.se_var_wait,
            "second_moment_given_wait": self.second_moment_given_wait,
            "frac_waiting": self.frac_waiting,
            "mean_service": self.mean_service,
            "mean_sojourn": self.mean_sojourn,
            "time_avg_in_system": self.time_avg_in_system,
            "horizon": self.horizon,
            "effective_arrival_rate": self.effective_arrival_rate,
        }


def _batch_errors(
    waits: np.ndarray, batches: int
) -> tuple[float | None, float | None]:
    """Batch-means standard errors for the mean and the (ddof=1) variance."""
    if len(waits) < 2 * batches:
        return None, None
    chunks = np.array_split(waits, batches)
    means = np.array([c.mean() for c in chunks])
    variances = np.array([c.var(ddof=1) for c in chunks])
    se_mean = float(means.std(ddof=1) / np.sqrt(batches))
    se_var = float(variances.std(ddof=1) / np.sqrt(batches))
    return se_mean, se_var


def _time_average_in_system(
    arrivals: np.ndarray, departures: np.ndarray, t0: float, t1: float
) -> float:
    """Mean of the number-in-system step function over [t0, t1].

    Every customer contributes the overlap of its [arrival, departure]
    interval with the window; dividing the summed overlap by the window
    length gives the time average.
    """
    lo = np.maximum(arrivals, t0)
    hi = np.minimum(departures, t1)
    occupied = np.clip(hi - lo, 0.0, None)
    return float(occupied.sum() / (t1 - t0))


def compute_stats(
    trace: SimTrace,
    warmup_fraction: float = DEFAULT_WARMUP,
    batches: int = DEFAULT_BATCHES,
) -> WaitStats:
    """Summarize ``trace`` after dropping the first ``warmup_fraction`` customers.

    The discard count is ``floor(n * warmup_fraction)``.  The occupancy
    window (and hence the effective arrival rate) runs from the first
    retained arrival to the last retained departure; all customers are
    clipped to it, so early arrivals that linger into the window still
    count toward occupancy.
    """
    if not 0.0 <= warmup_fraction < 1.0:
        raise ConfigError(
            f"warmup_fraction must lie in [0, 1), got {warmup_fraction!r}"
        )
    if batches < 1:
        raise ConfigError(f"batches must be >= 1, got {batches}")
    skip = int(trace.n * warmup_fraction)
    if skip >= trace.n:
        raise EmptyAfterWarmupError(
            f"warm-up of {skip} customers leaves none of {trace.n}"
        )
    arrivals = trace.arrivals[skip:]
    starts = trace.service_starts[skip:]
    departures = trace.departures[skip:]
    waits = starts - arrivals
    services = departures - starts
    count = len(waits)

    mean_wait = float(waits.mean())
    var_wait = float(waits.var(ddof=1)) if count >= 2 else 0.0
    se_mean, se_var = _batch_errors(waits, batches)
    positive = waits[waits > 0.0]
    second_moment = float(np.mean(positive**2)) if len(positive) else None
    frac_waiting = float(len(positive) / count)
    mean_service = float(services.mean())
    mean_sojourn = mean_wait + mean_service

    t0 = float(arrivals[0])
    t1 = float(departures.max())
    horizon = t1 - t0
    if horizon <= 0.0:
        # Single retained customer with zero wait; occupancy is undefined,
        # report zeros rather than dividing by zero.
        time_avg = 0.0
        eff_rate = 0.0
    else:
        # Occupancy counts *every* customer overlapping the window, warm-up
        # ones included, so the Little's-law comparison against
        # (retained rate) x (retained mean sojourn) stays a genuine
        # two-route check rather than an identity.
        time_avg = _time_average_in_system(trace.arrivals, trace.departures, t0, t1)
        eff_rate = count / horizon
    return WaitStats(
        count=count,
        warmup_discarded=skip,
        mean_wait=mean_wait,
        var_wait=var_wait,
        se_mean_wait=se_mean,
        se_var_wait=se_var,
        second_moment_given_wait=second_moment,
        frac_waiting=frac_waiting,
        mean_service=mean_service,
        mean_sojourn=mean_sojourn,
        time_avg_in_system=time_avg,
        horizon=horizon,
        effective_arrival_rate=eff_rate,
    )
