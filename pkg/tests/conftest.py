"""Shared fixtures for the acceptance battery.

The heavyweight simulation runs are session-scoped and shared across
acceptance tests so each configuration is simulated exactly once.  Only
scalar summaries are retained; traces are dropped as soon as a seed's
bookkeeping is done to keep memory flat.
"""

import numpy as np
import pytest

from qvar import (
    SimConfig,
    compute_stats,
    extract_busy_periods,
    little_check,
    per_period_wait_sums,
    random_busy_period,
    run_simulation,
)

ACCEPT_SEEDS = tuple(range(1, 11))
DISCIPLINES = ("fcfs", "lcfs", "random")
N_ARRIVALS = 10**6


@pytest.fixture(scope="session")
def mm1_battery():
    """Half-load runs shared by several acceptance checks.

    For every seed, all three disciplines are simulated at λ=0.5, μ=1 with
    10^6 arrivals; the fixture records warmed-up statistics, Little's-law
    gaps, and the discipline-invariance evidence (bitwise equality of
    per-period wait sums, relative spread of full-trace mean waits).
    """
    stats = {d: [] for d in DISCIPLINES}
    little_gaps = {d: [] for d in DISCIPLINES}
    sums_bitwise_equal = []
    full_mean_rel_spread = []
    for seed in ACCEPT_SEEDS:
        traces = {
            d: run_simulation(
                SimConfig(
                    arrival_rate=0.5,
                    service_rate=1.0,
                    num_arrivals=N_ARRIVALS,
                    seed=seed,
                    discipline=d,
                )
            )
            for d in DISCIPLINES
        }
        sums = {d: per_period_wait_sums(t) for d, t in traces.items()}
        sums_bitwise_equal.append(
            np.array_equal(sums["fcfs"], sums["lcfs"])
            and np.array_equal(sums["fcfs"], sums["random"])
        )
        means = [float(t.waits().mean()) for t in traces.values()]
        center = sum(means) / len(means)
        full_mean_rel_spread.append(
            (max(means) - min(means)) / center if center else 0.0
        )
        for d, t in traces.items():
            s = compute_stats(t, warmup_fraction=0.1)
            stats[d].append(s)
            little_gaps[d].append(
                little_check(s, s.effective_arrival_rate).relative_gap
            )
    return {
        "stats": stats,
        "little_gaps": little_gaps,
        "sums_bitwise_equal": sums_bitwise_equal,
        "full_mean_rel_spread": full_mean_rel_spread,
    }


@pytest.fixture(scope="session")
def small_instances():
    """Busy periods for the exhaustive-search criteria.

    1000 random periods with 2..7 customers, plus every period with at
    most 7 customers extracted from two heavy-load (ρ=0.8) runs.
    """
    rng = np.random.default_rng(20250817)
    random_part = [
        random_busy_period(rng, int(rng.integers(2, 8))) for _ in range(1000)
    ]
    extracted_part = []
    for seed in (101, 102):
        trace = run_simulation(
            SimConfig(
                arrival_rate=0.8,
                service_rate=1.0,
                num_arrivals=20_000,
                seed=seed,
                discipline="lcfs",
            )
        )
        for bp, _ in extract_busy_periods(trace):
            if bp.n <= 7:
                extracted_part.append(bp)
    return {"random": random_part, "extracted": extracted_part}
