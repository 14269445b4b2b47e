"""Busy periods and service-order permutations.

A *busy period* is one maximal stretch of uninterrupted work in a
single-server queue: ``n`` customers arrive at times ``a_1 < ... < a_n``
and the server begins ``n`` services at times ``b_1 < ... < b_n``, starting
the moment the first customer walks in (``b_1 == a_1``) and never idling
until all ``n`` are done.  The timestamps alone do not say *who* got which
service slot -- that is a permutation: customer ``i`` is the ``p(i)``-th
customer to enter service.

Any non-preemptive, work-conserving discipline produces a permutation that

* keeps customer 1 in slot 1 (nobody else is present when service begins), and
* never starts a customer before that customer has arrived
  (``a_i < b_{p(i)}``).

We call such permutations *realizable*.  Mean waiting time is the same for
every realizable order; the mean **squared** wait is not, and
``pairing_objective`` is the quantity that separates them: over one busy
period,

    mean square wait = (mean of b_j^2) - (2/n) * pairing_objective
                       + (mean of a_i^2)

so orders pairing early arrivals with early slots (large objective) give the
smallest second moment, and vice versa.

Invariants enforced at construction:

* equal lengths, at least one customer,
* all timestamps finite,
* both sequences strictly increasing, with no value shared between them
  after the common start,
* ``arrivals[0] == service_starts[0]``,
* ``arrivals[i] < service_starts[i]`` for every later ``i`` (otherwise no
  schedule could keep the server busy: by the time the ``i``-th slot opens,
  fewer than ``i`` customers would have arrived).
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

from .errors import (
    DuplicateTimestampError,
    FirstServiceNotImmediateError,
    InfeasibleError,
    LengthMismatchError,
    MalformedInputError,
    NotRealizableError,
    NotSortedError,
    SizeMismatchError,
    ValidationError,
)

__all__ = [
    "BusyPeriod",
    "Permutation",
    "validate_busy_period",
    "is_realizable",
    "pairing_objective",
    "waiting_times",
    "mean_square_wait",
]


def _check_strictly_increasing(values: tuple[float, ...], label: str) -> None:
    for k in range(1, len(values)):
        if not values[k] > values[k - 1]:
            raise NotSortedError(
                f"{label} must be strictly increasing: "
                f"{label}[{k}]={values[k]!r} does not exceed "
                f"{label}[{k - 1}]={values[k - 1]!r}"
            )


@dataclass(frozen=True)
class BusyPeriod:
    """Validated arrival and service-start times of one busy period.

    Both sequences are strictly increasing tuples of floats of equal length
    with a shared first element; see the module docstring for the full set
    of invariants.  Instances are immutable and safe to share.
    """

    arrivals: tuple[float, ...]
    service_starts: tuple[float, ...]

    def __post_init__(self) -> None:
        a, b = self.arrivals, self.service_starts
        if len(a) != len(b):
            raise LengthMismatchError(
                f"got {len(a)} arrivals but {len(b)} service starts"
            )
        if not a:
            raise ValidationError("a busy period needs at least one customer")
        for t in a:
            if not math.isfinite(t):
                raise ValidationError(f"non-finite arrival time {t!r}")
        for t in b:
            if not math.isfinite(t):
                raise ValidationError(f"non-finite service start {t!r}")
        _check_strictly_increasing(a, "arrivals")
        _check_strictly_increasing(b, "service_starts")
        if a[0] != b[0]:
            raise FirstServiceNotImmediateError(
                f"first service starts at t={b[0]!r} but the period opens "
                f"with an arrival at t={a[0]!r}"
            )
        seen = set(a)
        for t in b[1:]:
            if t in seen:
                raise DuplicateTimestampError(
                    f"timestamp {t!r} is both an arrival and a later service start"
                )
        for i in range(1, len(a)):
            if not a[i] < b[i]:
                raise InfeasibleError(i + 1, a[i], b[i])

    @property
    def n(self) -> int:
        return len(self.arrivals)

    def to_dict(self) -> dict[str, list[float]]:
        """JSON-friendly form: ``{"arrivals": [...], "service_starts": [...]}``."""
        return {
            "arrivals": list(self.arrivals),
            "service_starts": list(self.service_starts),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, object]) -> "BusyPeriod":
        if not isinstance(data, Mapping):
            raise MalformedInputError(
                f"expected an object with 'arrivals' and 'service_starts', "
                f"got {type(data).__name__}"
            )
        try:
            raw_a = data["arrivals"]
            raw_b = data["service_starts"]
        except KeyError as exc:
            raise MalformedInputError(f"missing key {exc.args[0]!r}") from None
        if not isinstance(raw_a, Sequence) or isinstance(raw_a, (str, bytes)):
            raise MalformedInputError("'arrivals' must be an array of numbers")
        if not isinstance(raw_b, Sequence) or isinstance(raw_b, (str, bytes)):
            raise MalformedInputError("'service_starts' must be an array of numbers")
        return validate_busy_period(raw_a, raw_b)


def validate_busy_period(
    arrivals: Sequence[float], service_starts: Sequence[float]
) -> BusyPeriod:
    """Coerce two timestamp sequences into a validated :class:`BusyPeriod`.

    Raises the :class:`~qvar.errors.ValidationError` subclass naming the
    first violated invariant.
    """
    try:
        a = tuple(float(t) for t in arrivals)
        b = tuple(float(t) for t in service_starts)
    except (TypeError, ValueError) as exc:
        raise MalformedInputError(f"timestamps must be numbers: {exc}") from None
    return BusyPeriod(a, b)


@dataclass(frozen=True)
class Permutation:
    """A service order: customer ``i`` takes service slot ``mapping[i-1]``.

    Stored 1-based to match how positions are written in traces and proofs.
    Construction verifies the mapping is a bijection on ``1..n``.
    """

    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.mapping)
        if n == 0:
            raise ValidationError("a permutation needs at least one element")
        seen = [False] * n
        for v in self.mapping:
            if not isinstance(v, int) or isinstance(v, bool):
                raise ValidationError(f"permutation entries must be ints, got {v!r}")
            if not 1 <= v <= n:
                raise ValidationError(
                    f"permutation entry {v} out of range 1..{n}"
                )
            if seen[v - 1]:
                raise ValidationError(f"permutation repeats the value {v}")
            seen[v - 1] = True

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    def __len__(self) -> int:
        return len(self.mapping)

    def __call__(self, i: int) -> int:
        """Slot taken by customer ``i`` (1-based)."""
        return self.mapping[i - 1]

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.mapping)
        for i, v in enumerate(self.mapping):
            inv[v - 1] = i + 1
        return Permutation(tuple(inv))

    def is_identity(self) -> bool:
        return all(v == i + 1 for i, v in enumerate(self.mapping))


def _check_sizes(bp: BusyPeriod, perm: Permutation) -> None:
    if len(perm) != bp.n:
        raise SizeMismatchError(
            f"permutation of length {len(perm)} cannot order a busy period "
            f"with {bp.n} customers"
        )


def is_realizable(bp: BusyPeriod, perm: Permutation) -> bool:
    """True when some non-preemptive discipline could produce this order.

    Customer 1 must hold slot 1, and each later customer must arrive before
    the slot it is assigned opens.
    """
    _check_sizes(bp, perm)
    if perm.mapping[0] != 1:
        return False
    b = bp.service_starts
    a = bp.arrivals
    for i in range(1, bp.n):
        if not a[i] < b[perm.mapping[i] - 1]:
            return False
    return True


def pairing_objective(bp: BusyPeriod, perm: Permutation) -> float:
    """Sum over customers of (arrival time) * (assigned service-start time).

    The single quantity through which the service order influences the mean
    squared wait of the period -- larger objective, smaller second moment.
    Summed in customer order so equal orders give bitwise-equal results.
    """
    _check_sizes(bp, perm)
    a, b, m = bp.arrivals, bp.service_starts, perm.mapping
    total = 0.0
    for i in range(bp.n):
        total += a[i] * b[m[i] - 1]
    return total


def waiting_times(bp: BusyPeriod, perm: Permutation) -> tuple[float, ...]:
    """Per-customer waits ``b_{p(i)} - a_i``, in arrival order.

    Raises :class:`NotRealizableError` for orders no discipline could produce
    (which would imply a negative wait).
    """
    if not is_realizable(bp, perm):
        raise NotRealizableError(
            f"service order {perm.mapping} is not realizable on this busy period"
        )
    a, b, m = bp.arrivals, bp.service_starts, perm.mapping
    return tuple(b[m[i] - 1] - a[i] for i in range(bp.n))


def mean_square_wait(bp: BusyPeriod, perm: Permutation) -> float:
    """Average of the squared waits over the period's customers."""
    w = waiting_times(bp, perm)
    total = 0.0
    for x in w:
        total += x * x
    return total / len(w)
