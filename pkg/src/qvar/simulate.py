"""Single-server queue simulator with pluggable service disciplines.

The event loop tracks exactly two candidate events -- the next arrival and
the completion of the customer in service -- so no event calendar is
needed.  Ties (completion at the instant of an arrival) process the
completion first; the arriving customer then finds either a free server or
the freshly started successor, never a stale state.

Disciplines choose who enters service when the server frees up with
customers waiting: first-come takes the oldest waiter, last-come the
newest, random-order a uniform pick driven by the dedicated decision
stream.  Arrivals, service durations, and decisions come from three
independent streams (see :mod:`qvar.variates`), so switching discipline
changes *only* who waits how long, never the workload itself.

Service-time coupling decides which pre-drawn duration a service uses:

* ``position``: the k-th service started (in time order) uses draw k.  All
  disciplines then share one server-busy trajectory path by path -- the
  same busy periods, the same multiset of service-start times -- which is
  the coupling under which the variance comparison is a per-busy-period
  statement.
* ``customer``: customer i carries draw i regardless of when it is served.
  Marginal per-discipline laws are unchanged; the path-by-path coupling is
  deliberately broken.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from math import inf, isfinite
from pathlib import Path

import numpy as np

from .busy_period import BusyPeriod, Permutation, is_realizable, validate_busy_period
from .errors import (
    ConfigError,
    InvalidRateError,
    MalformedInputError,
    MalformedTraceError,
)
from .variates import Distribution, draw_variates, make_streams

__all__ = [
    "Discipline",
    "Coupling",
    "SimConfig",
    "SimTrace",
    "run_simulation",
    "extract_busy_periods",
    "per_period_wait_sums",
    "write_trace_jsonl",
    "read_trace_jsonl",
]


class Discipline(str, Enum):
    FCFS = "fcfs"
    LCFS = "lcfs"
    RANDOM_ORDER = "random"


class Coupling(str, Enum):
    POSITION = "position"
    CUSTOMER = "customer"


_MEAN_MATCH_RTOL = 1e-9


@dataclass(frozen=True)
class SimConfig:
    """Immutable description of one simulation run.

    ``arrival_rate``/``service_rate`` are authoritative: any explicitly
    supplied distribution must have mean ``1/rate`` (checked to one part in
    1e9), defaulting to exponentials at those rates.  The first customer
    arrives at t=0; ``num_arrivals`` customers are generated and all are
    served to completion, so unstable configurations still terminate.
    """

    arrival_rate: float
    service_rate: float
    num_arrivals: int
    seed: int
    discipline: Discipline = Discipline.FCFS
    coupling: Coupling = Coupling.POSITION
    arrival_dist: Distribution | None = None
    service_dist: Distribution | None = None

    def __post_init__(self) -> None:
        for name, rate in (
            ("arrival_rate", self.arrival_rate),
            ("service_rate", self.service_rate),
        ):
            if not isinstance(rate, (int, float)) or not isfinite(rate) or rate <= 0:
                raise InvalidRateError(
                    f"{name} must be a positive finite number, got {rate!r}"
                )
        if not isinstance(self.num_arrivals, int) or self.num_arrivals < 1:
            raise ConfigError(
                f"num_arrivals must be a positive int, got {self.num_arrivals!r}"
            )
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError(
                f"seed must be an unsigned 64-bit int, got {self.seed!r}"
            )
        object.__setattr__(self, "discipline", Discipline(self.discipline))
        object.__setattr__(self, "coupling", Coupling(self.coupling))
        if self.arrival_dist is None:
            object.__setattr__(
                self, "arrival_dist", Distribution.exponential(self.arrival_rate)
            )
        if self.service_dist is None:
            object.__setattr__(
                self, "service_dist", Distribution.exponential(self.service_rate)
            )
        for name, dist, rate in (
            ("arrival_dist", self.arrival_dist, self.arrival_rate),
            ("service_dist", self.service_dist, self.service_rate),
        ):
            assert dist is not None
            target = 1.0 / rate
            if abs(dist.mean - target) > _MEAN_MATCH_RTOL * target:
                raise ConfigError(
                    f"{name} has mean {dist.mean!r} but the configured rate "
                    f"{rate!r} requires mean {target!r}"
                )

    @property
    def utilization(self) -> float:
        return self.arrival_rate / self.service_rate

    @property
    def is_stable(self) -> bool:
        return self.arrival_rate < self.service_rate

    def with_(self, **changes: object) -> "SimConfig":
        # A rate change invalidates the auto-filled exponential default for
        # that rate; drop it so __post_init__ refills at the new rate.
        for side in ("arrival", "service"):
            rate_key, dist_key = f"{side}_rate", f"{side}_dist"
            if rate_key in changes and dist_key not in changes:
                dist = getattr(self, dist_key)
                if dist is not None and dist.kind == "exponential" and dist.rate == getattr(self, rate_key):
                    changes[dist_key] = None
        return replace(self, **changes)

    def to_dict(self) -> dict[str, object]:
        assert self.arrival_dist is not None and self.service_dist is not None
        return {
            "arrival_rate": self.arrival_rate,
            "service_rate": self.service_rate,
            "num_arrivals": self.num_arrivals,
            "seed": self.seed,
            "discipline": self.discipline.value,
            "coupling": self.coupling.value,
            "arrival_dist": self.arrival_dist.to_dict(),
            "service_dist": self.service_dist.to_dict(),
        }


@dataclass(frozen=True, eq=False)
class SimTrace:
    """Per-customer times of one run, in arrival order, plus period heads.

    ``period_starts`` holds the 0-based customer index opening each busy
    period (always starting with 0).  Arrays are float64/int64 and frozen
    read-only; a customer's wait is ``service_starts - arrivals`` and its
    sojourn ``departures - arrivals``.
    """

    arrivals: np.ndarray
    service_starts: np.ndarray
    departures: np.ndarray
    period_starts: np.ndarray
    config: SimConfig | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        for name, dtype in (
            ("arrivals", np.float64),
            ("service_starts", np.float64),
            ("departures", np.float64),
            ("period_starts", np.int64),
        ):
            arr = np.asarray(getattr(self, name), dtype=dtype)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        n = len(self.arrivals)
        if not (len(self.service_starts) == n and len(self.departures) == n):
            raise MalformedTraceError("trace arrays must have equal lengths")
        if n == 0:
            raise MalformedTraceError("a trace must contain at least one customer")
        if len(self.period_starts) == 0 or self.period_starts[0] != 0:
            raise MalformedTraceError("the first customer must open a busy period")

    @property
    def n(self) -> int:
        return len(self.arrivals)

    @property
    def num_periods(self) -> int:
        return len(self.period_starts)

    def waits(self) -> np.ndarray:
        return self.service_starts - self.arrivals

    def sojourns(self) -> np.ndarray:
        return self.departures - self.arrivals

    def service_times(self) -> np.ndarray:
        return self.departures - self.service_starts

    def period_bounds(self) -> list[tuple[int, int]]:
        """Half-open customer-index ranges [lo, hi) of each busy period."""
        starts = self.period_starts.tolist()
        return list(zip(starts, starts[1:] + [self.n]))


def run_simulation(config: SimConfig) -> SimTrace:
    """Simulate ``config.num_arrivals`` customers and return the full trace.

    Deterministic: equal configs give bitwise-equal traces.  The decision
    stream is consumed only when the configured discipline is random-order,
    and then only when a completion finds waiters to choose from.
    """
    arrival_rng, service_rng, decision_rng = make_streams(config.seed)
    n = config.num_arrivals
    assert config.arrival_dist is not None and config.service_dist is not None

    arrivals = np.zeros(n, dtype=np.float64)
    if n > 1:
        gaps = draw_variates(config.arrival_dist, arrival_rng, n - 1)
        np.cumsum(gaps, out=arrivals[1:])
    durations = draw_variates(config.service_dist, service_rng, n).tolist()
    decisions = (
        decision_rng.random(n).tolist()
        if config.discipline is Discipline.RANDOM_ORDER
        else None
    )
    arr = arrivals.tolist()

    by_position = config.coupling is Coupling.POSITION
    fcfs = config.discipline is Discipline.FCFS
    lcfs = config.discipline is Discipline.LCFS

    service_starts = [0.0] * n
    departures = [0.0] * n
    period_heads: list[int] = []
    waiting: deque[int] | list[int] = deque() if fcfs else []

    next_arrival = 0  # index of the next customer to arrive
    started = 0  # services begun so far == index into the position stream
    served = 0
    busy = False
    completion = inf
    while served < n:
        t_arr = arr[next_arrival] if next_arrival < n else inf
        if busy and completion <= t_arr:
            served += 1
            if waiting:
                if fcfs:
                    cust = waiting.popleft()  # type: ignore[union-attr]
                elif lcfs:
                    cust = waiting.pop()
                else:
                    pick = int(decisions[started] * len(waiting))  # type: ignore[index]
                    waiting[pick], waiting[-1] = waiting[-1], waiting[pick]
                    cust = waiting.pop()
                service_starts[cust] = completion
                dur = durations[started if by_position else cust]
                completion = completion + dur
                departures[cust] = completion
                started += 1
            else:
                busy = False
                completion = inf
        else:
            cust = next_arrival
            next_arrival += 1
            if busy:
                waiting.append(cust)
            else:
                period_heads.append(cust)
                service_starts[cust] = t_arr
                dur = durations[started if by_position else cust]
                completion = t_arr + dur
                departures[cust] = completion
                busy = True
                started += 1

    return SimTrace(
        arrivals=arrivals,
        service_starts=np.asarray(service_starts),
        departures=np.asarray(departures),
        period_starts=np.asarray(period_heads, dtype=np.int64),
        config=config,
    )


def extract_busy_periods(trace: SimTrace) -> list[tuple[BusyPeriod, Permutation]]:
    """Split a trace into validated busy periods with their service orders.

    For each period the service starts are sorted into slot order and each
    customer is assigned the rank of its own start.  Work conservation is
    verified exactly: the first slot coincides with the period-opening
    arrival, every later slot equals the previous departure, and periods do
    not overlap.  Violations raise :class:`MalformedTraceError`.
    """
    out: list[tuple[BusyPeriod, Permutation]] = []
    prev_end = -inf
    for lo, hi in trace.period_bounds():
        a = trace.arrivals[lo:hi]
        starts = trace.service_starts[lo:hi]
        deps = trace.departures[lo:hi]
        if a[0] < prev_end:
            raise MalformedTraceError(
                f"busy period opening at t={a[0]!r} overlaps the previous "
                f"period ending at t={prev_end!r}"
            )
        order = np.argsort(starts)
        slots = starts[order]
        if slots[0] != a[0]:
            raise MalformedTraceError(
                f"first service of the period at t={slots[0]!r} does not "
                f"coincide with the opening arrival at t={a[0]!r}"
            )
        deps_in_slot_order = deps[order]
        for k in range(1, len(slots)):
            if slots[k] != deps_in_slot_order[k - 1]:
                raise MalformedTraceError(
                    f"service slot {k + 1} opens at t={slots[k]!r} but the "
                    f"previous service ended at t={deps_in_slot_order[k - 1]!r}; "
                    f"the server idled inside a busy period"
                )
        prev_end = float(deps_in_slot_order[-1])
        ranks = np.empty(len(order), dtype=np.int64)
        ranks[order] = np.arange(1, len(order) + 1)
        bp = validate_busy_period(a.tolist(), slots.tolist())
        perm = Permutation(tuple(int(r) for r in ranks))
        if not is_realizable(bp, perm):
            raise MalformedTraceError(
                f"period opening at t={a[0]!r} serves a customer before it "
                f"arrives under the recorded order {perm.mapping}"
            )
        out.append((bp, perm))
    return out


def per_period_wait_sums(trace: SimTrace) -> np.ndarray:
    """Total wait in each busy period, summed in a discipline-free order.

    Within a period the k-th smallest service start is never earlier than
    the k-th arrival, so the sorted-start-minus-arrival differences are
    small and nonnegative; summing those (instead of differencing two
    large timestamp sums) avoids cancellation.  Traces sharing timestamps
    but not service orders reduce in the exact same sequence and agree
    bitwise.
    """
    gaps = np.sort(trace.service_starts) - trace.arrivals
    return np.add.reduceat(gaps, trace.period_starts)


def write_trace_jsonl(trace: SimTrace, path: str | Path) -> None:
    """One JSON object per customer, in arrival order, 1-based ``customer``."""
    p = Path(path)
    with p.open("w", encoding="utf-8") as fh:
        a = trace.arrivals.tolist()
        s = trace.service_starts.tolist()
        d = trace.departures.tolist()
        for i in range(trace.n):
            fh.write(
                json.dumps(
                    {
                        "customer": i + 1,
                        "arrival": a[i],
                        "service_start": s[i],
                        "departure": d[i],
                    }
                )
            )
            fh.write("\n")


def read_trace_jsonl(path: str | Path) -> SimTrace:
    """Load a trace written by :func:`write_trace_jsonl`.

    Busy-period boundaries are reconstructed from the zero-wait signature
    ``service_start == arrival``, which in a work-conserving trace holds
    exactly for period-opening customers and (almost surely) no one else.
    """
    arrivals: list[float] = []
    starts: list[float] = []
    deps: list[float] = []
    p = Path(path)
    with p.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                customer = rec["customer"]
                a, s, d = rec["arrival"], rec["service_start"], rec["departure"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise MalformedInputError(f"{p}:{lineno}: {exc}") from None
            if customer != len(arrivals) + 1:
                raise MalformedInputError(
                    f"{p}:{lineno}: expected customer {len(arrivals) + 1}, "
                    f"got {customer!r}"
                )
            try:
                arrivals.append(float(a))
                starts.append(float(s))
                deps.append(float(d))
            except (TypeError, ValueError):
                raise MalformedInputError(
                    f"{p}:{lineno}: times must be numbers"
                ) from None
    if not arrivals:
        raise MalformedInputError(f"{p}: empty trace")
    for i in range(1, len(arrivals)):
        if not arrivals[i] > arrivals[i - 1]:
            raise MalformedInputError(
                f"{p}: arrivals must be strictly increasing "
                f"(customer {i + 1} at t={arrivals[i]!r})"
            )
    heads = [i for i in range(len(arrivals)) if starts[i] == arrivals[i]]
    if not heads or heads[0] != 0:
        raise MalformedInputError(
            f"{p}: the first customer must have service_start == arrival"
        )
    return SimTrace(
        arrivals=np.asarray(arrivals),
        service_starts=np.asarray(starts),
        departures=np.asarray(deps),
        period_starts=np.asarray(heads, dtype=np.int64),
    )
