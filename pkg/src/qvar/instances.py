"""Random busy periods and random realizable service orders, for search.

These feed the exhaustive and descent checks with instances that are
uniform in the combinatorial sense that matters: which arrivals interleave
with which service starts.  Timestamps are i.i.d. uniform draws, so every
interleaving pattern of the 2(n-1) free timestamps is equally likely and
all timestamps are distinct with probability one.
"""

from __future__ import annotations

from bisect import bisect_left

import numpy as np

from .busy_period import BusyPeriod, Permutation
from .errors import ConfigError

__all__ = ["random_busy_period", "random_realizable_permutation"]


def random_busy_period(rng: np.random.Generator, n: int) -> BusyPeriod:
    """A busy period with ``n`` customers and i.i.d. uniform timestamps.

    The shared opening instant is pinned to 0; the remaining ``n-1``
    arrivals and ``n-1`` service starts are uniform draws on (0, 1),
    relabeled until the interleaving satisfies feasibility (every prefix of
    the time axis holds at least as many arrivals as service starts).
    Rejection keeps the interleaving uniform over feasible patterns; the
    expected number of tries is about ``n``.
    """
    if n < 1:
        raise ConfigError(f"busy period size must be >= 1, got {n}")
    if n == 1:
        return BusyPeriod((0.0,), (0.0,))
    m = n - 1
    while True:
        times = rng.random(2 * m)
        if 0.0 in times or len(set(times.tolist())) != 2 * m:
            continue  # measure-zero collisions; redraw
        times = np.sort(times)
        labels = np.zeros(2 * m, dtype=bool)
        labels[:m] = True  # True = arrival
        rng.shuffle(labels)
        if np.min(np.cumsum(np.where(labels, 1, -1))) < 0:
            continue  # some prefix had more starts than arrivals
        arrivals = (0.0,) + tuple(times[labels].tolist())
        starts = (0.0,) + tuple(times[~labels].tolist())
        return BusyPeriod(arrivals, starts)


def random_realizable_permutation(
    rng: np.random.Generator, bp: BusyPeriod
) -> Permutation:
    """A random realizable service order on ``bp``.

    Slots are assigned to customers in arrival order, choosing uniformly at
    each step among the free slots that (a) open after the customer arrives
    and (b) leave enough high slots for everyone still unassigned.  Every
    realizable order has positive probability (the filter in (b) never
    excludes a completable choice), though the distribution over orders is
    not uniform.
    """
    n = bp.n
    if n == 1:
        return Permutation.identity(1)
    a, b = bp.arrivals, bp.service_starts
    # floors[i]: smallest 0-based slot customer i may take (suffix structure).
    floors = [0] * n
    j = 1
    for i in range(1, n):
        while b[j] <= a[i]:
            j += 1
        floors[i] = j
    free = sorted(range(1, n))  # 0-based slots still unassigned
    mapping = [1] + [0] * (n - 1)
    for i in range(1, n):
        candidates = []
        for pos, slot in enumerate(free):
            if slot < floors[i]:
                continue
            # Completability: after taking `slot`, each later customer r
            # still finds enough free slots at or above its own floor.
            rest = free[:pos] + free[pos + 1 :]
            ok = True
            for r in range(i + 1, n):
                need = n - r
                have = len(rest) - bisect_left(rest, floors[r])
                if have < need:
                    ok = False
                    break
            if ok:
                candidates.append(pos)
        pos = candidates[int(rng.integers(len(candidates)))]
        mapping[i] = free.pop(pos) + 1
    return Permutation(tuple(mapping))
