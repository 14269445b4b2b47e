"""Service-order combinatorics: extremal orders, exhaustive search, descent.

Within one busy period the realizable service orders form a finite set, and
the pairing objective (see :mod:`qvar.busy_period`) ranks them.  This module
provides

* the two closed-form extremes -- arrival order (first-come-first-served)
  and the stack order produced by last-come-first-served,
* exhaustive enumeration of every realizable order for small periods,
* the *bad pair* certificate and a descent that removes one bad pair per
  swap, walking any order down to the stack order while the objective
  strictly falls, and
* :func:`check_extremality`, which brute-forces a period and raises if the
  two closed forms fail to bracket every other order.

The stack order is computed by bracket matching: interleave the arrival and
service-start timestamps on the time axis, read arrivals as ``(`` and
service starts as ``)``, and match each start with the most recent
unmatched arrival -- exactly the customer a last-come-first-served server
would pull from the waiting room.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .busy_period import (
    BusyPeriod,
    Permutation,
    is_realizable,
    pairing_objective,
)
from .errors import (
    ExtremalityViolationError,
    NoBadPairsError,
    NotRealizableError,
    TooLargeError,
)

__all__ = [
    "BadPair",
    "DescentStep",
    "DescentTrace",
    "ExtremalityReport",
    "fcfs_permutation",
    "lcfs_permutation",
    "enumerate_realizable",
    "bad_pairs",
    "descent_swap",
    "descent_to_lcfs",
    "check_extremality",
]


def fcfs_permutation(bp: BusyPeriod) -> Permutation:
    """Arrival order: customer ``i`` takes slot ``i``.

    This is the order that pairs the sorted arrivals with the sorted slots,
    so it maximizes the pairing objective over all realizable orders.
    """
    return Permutation.identity(bp.n)


def lcfs_permutation(bp: BusyPeriod) -> Permutation:
    """Stack order: each service slot goes to the latest-arrived waiter.

    Runs the bracket matching described in the module docstring in one merge
    pass over the two timestamp sequences.
    """
    n = bp.n
    a, b = bp.arrivals, bp.service_starts
    mapping = [0] * n
    mapping[0] = 1
    stack: list[int] = []
    ai = 1  # next arrival to place on the stack
    for bi in range(1, n):
        while ai < n and a[ai] < b[bi]:
            stack.append(ai)
            ai += 1
        # Feasibility of the period guarantees someone is waiting here.
        mapping[stack.pop()] = bi + 1
    return Permutation(tuple(mapping))


def _slot_floors(bp: BusyPeriod) -> list[int]:
    """For each customer i (0-based), the smallest 0-based slot it may take.

    Slot j is allowed for customer i>0 iff ``a[i] < b[j]``; allowed slots
    form a suffix, and the floors are non-decreasing in i.
    """
    a, b = bp.arrivals, bp.service_starts
    floors = [0] * bp.n
    j = 1
    for i in range(1, bp.n):
        while b[j] <= a[i]:
            j += 1
        floors[i] = j
    return floors


def enumerate_realizable(bp: BusyPeriod, max_n: int = 10) -> list[Permutation]:
    """Every realizable service order, in lexicographic mapping order.

    Backtracking over customers in arrival order; customer ``i``'s candidate
    slots are the still-free ones at or above its floor.  Refuses periods
    with more than ``max_n`` customers (the count can grow factorially).
    """
    if bp.n > max_n:
        raise TooLargeError(
            f"refusing exhaustive enumeration for {bp.n} customers "
            f"(limit {max_n}); raise max_n explicitly if you mean it"
        )
    n = bp.n
    floors = _slot_floors(bp)
    free = [True] * n  # slot availability, 0-based
    free[0] = False
    prefix = [1] + [0] * (n - 1)
    out: list[Permutation] = []

    def extend(i: int) -> None:
        if i == n:
            out.append(Permutation(tuple(prefix)))
            return
        for j in range(floors[i], n):
            if free[j]:
                free[j] = False
                prefix[i] = j + 1
                extend(i + 1)
                free[j] = True

    extend(1)
    return out


@dataclass(frozen=True)
class BadPair:
    """Witness that a realizable order is not yet the stack order.

    Customers ``i < j`` (1-based, so ``a_i < a_j``) form a bad pair when
    ``a_j < b_{p(i)} < b_{p(j)}``: customer j was already waiting when i
    entered service, yet i was served first.  A last-come-first-served
    server never does this, and swapping the two slots strictly lowers the
    pairing objective.
    """

    i: int
    j: int


def bad_pairs(bp: BusyPeriod, perm: Permutation) -> list[BadPair]:
    """All bad pairs of the order, lexicographically by (i, j)."""
    if not is_realizable(bp, perm):
        raise NotRealizableError(
            f"service order {perm.mapping} is not realizable on this busy period"
        )
    a, b, m = bp.arrivals, bp.service_starts, perm.mapping
    n = bp.n
    slot_time = [b[m[i] - 1] for i in range(n)]
    found: list[BadPair] = []
    for i in range(n - 1):
        ti = slot_time[i]
        for j in range(i + 1, n):
            if a[j] < ti < slot_time[j]:
                found.append(BadPair(i + 1, j + 1))
    return found


def _find_swap_site(
    bp: BusyPeriod, perm: Permutation
) -> tuple[int, int, list[tuple[int, int]]]:
    """Locate the descent swap for an order that still has bad pairs.

    Scans the interleaved timeline for the leftmost arrival immediately
    followed by a service start (an innermost ``()`` bracket).  If the order
    already pairs those two, the bracket is inert: remove both and rescan.
    Otherwise the arrival's customer ``k`` and the start's current owner
    ``i`` form a bad pair ``(i, k)``.

    Returns ``(i, k, removed)`` (all 1-based) where ``removed`` lists the
    inert ``(customer, slot)`` brackets deleted along the way.  Must only be
    called when bad pairs exist; the scan cannot exhaust the timeline
    otherwise.
    """
    n = bp.n
    a, b, m = bp.arrivals, bp.service_starts, perm.mapping
    inv = perm.inverse().mapping
    # Timeline of (time, is_start, 1-based index), excluding the shared
    # opening instant which slot 1 / customer 1 always consume.
    events = sorted(
        [(a[i], False, i + 1) for i in range(1, n)]
        + [(b[j], True, j + 1) for j in range(1, n)]
    )
    alive_customer = [True] * (n + 1)
    alive_slot = [True] * (n + 1)
    removed: list[tuple[int, int]] = []
    while True:
        prev: tuple[bool, int] | None = None
        site: tuple[int, int] | None = None
        for _, is_start, idx in events:
            alive = alive_slot[idx] if is_start else alive_customer[idx]
            if not alive:
                continue
            if is_start and prev is not None and not prev[0]:
                site = (prev[1], idx)  # (customer k, slot l)
                break
            prev = (is_start, idx)
        if site is None:
            raise AssertionError("swap site requested for a stack order")
        k, l = site
        if m[k - 1] == l:
            alive_customer[k] = False
            alive_slot[l] = False
            removed.append((k, l))
            continue
        return inv[l - 1], k, removed


def descent_swap(
    bp: BusyPeriod, perm: Permutation
) -> tuple[Permutation, tuple[int, int]]:
    """One descent step: swap the slots of a canonical bad pair.

    Returns the new order and the swapped customers ``(i, k)``, ``i < k``.
    The new order is realizable, its pairing objective is strictly smaller,
    and its bad-pair count is strictly smaller.  Raises
    :class:`NoBadPairsError` at the stack order, which admits no step.
    """
    if not bad_pairs(bp, perm):
        raise NoBadPairsError(
            "the order has no bad pairs; it is already the stack order"
        )
    i, k, _ = _find_swap_site(bp, perm)
    m = list(perm.mapping)
    m[i - 1], m[k - 1] = m[k - 1], m[i - 1]
    return Permutation(tuple(m)), (i, k)


@dataclass(frozen=True)
class DescentStep:
    """One event in a descent run.

    ``kind`` is ``"swap"`` for an objective-lowering exchange of the slots
    of customers ``indices == (i, k)``, or ``"remove-reduction"`` when an
    inert innermost bracket ``indices == (customer, slot)`` was discarded
    to expose the next swap (the order itself does not change then).
    """

    kind: str
    indices: tuple[int, int]
    order_before: tuple[int, ...]
    order_after: tuple[int, ...]
    objective_before: float
    objective_after: float
    bad_pairs_before: int
    bad_pairs_after: int

    def to_dict(self) -> dict[str, object]:
        return {
            "kind": self.kind,
            "indices": list(self.indices),
            "order_before": list(self.order_before),
            "order_after": list(self.order_after),
            "objective_before": self.objective_before,
            "objective_after": self.objective_after,
            "bad_pairs_before": self.bad_pairs_before,
            "bad_pairs_after": self.bad_pairs_after,
        }


@dataclass(frozen=True)
class DescentTrace:
    """Full record of a descent from ``start`` to the stack order."""

    start: tuple[int, ...]
    final: tuple[int, ...]
    steps: tuple[DescentStep, ...]

    @property
    def swap_count(self) -> int:
        return sum(1 for s in self.steps if s.kind == "swap")

    def to_jsonl(self) -> str:
        """One JSON object per step, one per line (1-based indices)."""
        return "\n".join(json.dumps(s.to_dict()) for s in self.steps)


def descent_to_lcfs(bp: BusyPeriod, perm: Permutation) -> DescentTrace:
    """Run descent swaps until the stack order is reached.

    Each swap strictly lowers the pairing objective and the bad-pair count,
    so the number of swaps is at most the starting order's bad-pair count.
    The recorded trace interleaves the inert-bracket removals that the site
    search performed before each swap.
    """
    if not is_realizable(bp, perm):
        raise NotRealizableError(
            f"service order {perm.mapping} is not realizable on this busy period"
        )
    steps: list[DescentStep] = []
    current = perm
    obj = pairing_objective(bp, current)
    nbad = len(bad_pairs(bp, current))
    while nbad:
        i, k, removed = _find_swap_site(bp, current)
        for pair in removed:
            steps.append(
                DescentStep(
                    kind="remove-reduction",
                    indices=pair,
                    order_before=current.mapping,
                    order_after=current.mapping,
                    objective_before=obj,
                    objective_after=obj,
                    bad_pairs_before=nbad,
                    bad_pairs_after=nbad,
                )
            )
        m = list(current.mapping)
        m[i - 1], m[k - 1] = m[k - 1], m[i - 1]
        swapped = Permutation(tuple(m))
        new_obj = pairing_objective(bp, swapped)
        new_bad = len(bad_pairs(bp, swapped))
        steps.append(
            DescentStep(
                kind="swap",
                indices=(i, k),
                order_before=current.mapping,
                order_after=swapped.mapping,
                objective_before=obj,
                objective_after=new_obj,
                bad_pairs_before=nbad,
                bad_pairs_after=new_bad,
            )
        )
        current, obj, nbad = swapped, new_obj, new_bad
    return DescentTrace(start=perm.mapping, final=current.mapping, steps=tuple(steps))


@dataclass(frozen=True)
class ExtremalityReport:
    """Result of brute-forcing one busy period.

    ``argmin``/``argmax`` are the orders attaining the extreme objectives
    (first in lexicographic order if ties were possible; they are not for
    distinct timestamps).
    """

    num_realizable: int
    min_objective: float
    max_objective: float
    argmin: tuple[int, ...]
    argmax: tuple[int, ...]

    def to_dict(self) -> dict[str, object]:
        return {
            "num_realizable": self.num_realizable,
            "min_objective": self.min_objective,
            "max_objective": self.max_objective,
            "argmin": list(self.argmin),
            "argmax": list(self.argmax),
        }


def check_extremality(bp: BusyPeriod, max_n: int = 10) -> ExtremalityReport:
    """Brute-force one period and verify both closed-form extremes.

    Enumerates every realizable order, computes each pairing objective, and
    confirms that arrival order attains the maximum and the stack order the
    minimum.  The comparisons are exact: the extremes are recomputed by the
    same summation as every enumerated candidate.  Raises
    :class:`ExtremalityViolationError` on any strict violation -- which
    would be a counterexample to the theorem, not a data problem.
    """
    perms = enumerate_realizable(bp, max_n=max_n)
    best = worst = None
    argmin = argmax = None
    for p in perms:
        v = pairing_objective(bp, p)
        if best is None or v > best:
            best, argmax = v, p
        if worst is None or v < worst:
            worst, argmin = v, p
    assert best is not None and worst is not None and argmin and argmax
    ident = fcfs_permutation(bp)
    stack = lcfs_permutation(bp)
    v_ident = pairing_objective(bp, ident)
    v_stack = pairing_objective(bp, stack)
    if v_ident != best:
        raise ExtremalityViolationError(
            f"arrival order scores {v_ident!r} but {argmax.mapping} scores "
            f"{best!r}; arrival order is not the maximizer on "
            f"{bp.to_dict()}"
        )
    if v_stack != worst:
        raise ExtremalityViolationError(
            f"stack order scores {v_stack!r} but {argmin.mapping} scores "
            f"{worst!r}; stack order is not the minimizer on "
            f"{bp.to_dict()}"
        )
    return ExtremalityReport(
        num_realizable=len(perms),
        min_objective=worst,
        max_objective=best,
        argmin=argmin.mapping,
        argmax=argmax.mapping,
    )
