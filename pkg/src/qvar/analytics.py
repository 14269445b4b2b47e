"""Closed forms for the memoryless queue, audits, and discipline comparisons.

For exponential arrivals (rate λ) and exponential service (rate μ > λ) the
stationary waiting-time law is classical: the chance of waiting at all is
the utilization, the mean wait is the same under every work-conserving
non-preemptive discipline, and the second moments under first-come and
last-come service have explicit expressions.  With ρ = λ/μ and time
measured in mean service units (μ = 1):

* ``P(W > 0) = ρ``  and  ``E[W] = ρ / (1 - ρ)``,
* ``E[W² | W > 0] = 2 / (1 - ρ)²``   (first-come-first-served),
* ``E[W² | W > 0] = 2 / (1 - ρ)³``   (last-come-first-served),
* ``Var[W] = ρ(2 - ρ) / (1 - ρ)²``   (first-come),
* ``Var[W] = ρ(2 - ρ + ρ²) / (1 - ρ)³`` (last-come).

General μ follows by dimensional analysis: waits carry 1/μ, second moments
and variances 1/μ².  ``consistency_check`` re-derives each variance from
the other two formulas (``Var = P(W>0)·E[W²|W>0] - E[W]²``), so a typo in
any one of them cannot survive.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import isfinite

from .errors import ConfigError, InvalidRateError, UnstableError
from .simulate import Discipline, SimConfig, run_simulation
from .stats import DEFAULT_WARMUP, WaitStats, compute_stats

__all__ = [
    "MM1Prediction",
    "ConsistencyReport",
    "LittleReport",
    "DisciplineSummary",
    "ComparisonTable",
    "mm1_predict",
    "consistency_check",
    "little_check",
    "compare_disciplines",
    "COMPARISON_CSV_COLUMNS",
]


@dataclass(frozen=True)
class MM1Prediction:
    """Stationary waiting-time figures for an exponential/exponential queue.

    All fields are in actual time units (waits ∝ 1/μ, second moments and
    variances ∝ 1/μ²); ``scale`` records 1/μ and ``lambda_norm`` the
    dimensionless utilization the formulas were evaluated at.
    """

    lambda_norm: float
    scale: float
    p_wait: float
    mean_wait: float
    second_moment_given_wait_fcfs: float
    second_moment_given_wait_lcfs: float
    var_wait_fcfs: float
    var_wait_lcfs: float

    def variance_for(self, discipline: Discipline | str) -> float | None:
        """Predicted Var[W] for a discipline, None where no closed form exists."""
        d = Discipline(discipline)
        if d is Discipline.FCFS:
            return self.var_wait_fcfs
        if d is Discipline.LCFS:
            return self.var_wait_lcfs
        return None

    def to_dict(self) -> dict[str, float]:
        return {
            "lambda_norm": self.lambda_norm,
            "scale": self.scale,
            "p_wait": self.p_wait,
            "mean_wait": self.mean_wait,
            "second_moment_given_wait_fcfs": self.second_moment_given_wait_fcfs,
            "second_moment_given_wait_lcfs": self.second_moment_given_wait_lcfs,
            "var_wait_fcfs": self.var_wait_fcfs,
            "var_wait_lcfs": self.var_wait_lcfs,
        }


def mm1_predict(arrival_rate: float, service_rate: float) -> MM1Prediction:
    """Evaluate the closed forms at ρ = arrival_rate / service_rate.

    Requires both rates positive and ``arrival_rate < service_rate``; the
    stationary law does not exist otherwise.
    """
    for name, rate in (("arrival_rate", arrival_rate), ("service_rate", service_rate)):
        if not isfinite(rate) or rate <= 0:
            raise InvalidRateError(
                f"{name} must be a positive finite number, got {rate!r}"
            )
    if arrival_rate >= service_rate:
        raise UnstableError(
            f"unstable configuration: arrival rate {arrival_rate!r} is not "
            f"below service rate {service_rate!r}, so no stationary law exists"
        )
    rho = arrival_rate / service_rate
    one = 1.0 - rho
    scale = 1.0 / service_rate
    return MM1Prediction(
        lambda_norm=rho,
        scale=scale,
        p_wait=rho,
        mean_wait=(rho / one) * scale,
        second_moment_given_wait_fcfs=(2.0 / one**2) * scale**2,
        second_moment_given_wait_lcfs=(2.0 / one**3) * scale**2,
        var_wait_fcfs=(rho * (2.0 - rho) / one**2) * scale**2,
        var_wait_lcfs=(rho * (2.0 - rho + rho**2) / one**3) * scale**2,
    )


@dataclass(frozen=True)
class ConsistencyReport:
    """Whether each variance matches its moment-based reconstruction."""

    ok: bool
    fcfs_gap: float
    lcfs_gap: float
    tolerance: float

    def to_dict(self) -> dict[str, object]:
        return {
            "ok": self.ok,
            "fcfs_gap": self.fcfs_gap,
            "lcfs_gap": self.lcfs_gap,
            "tolerance": self.tolerance,
        }


def consistency_check(
    pred: MM1Prediction, tolerance: float = 1e-12
) -> ConsistencyReport:
    """Re-derive each variance as ``P(W>0)·E[W²|W>0] - E[W]²`` and compare.

    Gaps are relative to the stated variance; the two routes share no
    algebra, so agreement pins all five formulas together.
    """
    gaps = []
    for smgw, var in (
        (pred.second_moment_given_wait_fcfs, pred.var_wait_fcfs),
        (pred.second_moment_given_wait_lcfs, pred.var_wait_lcfs),
    ):
        rebuilt = pred.p_wait * smgw - pred.mean_wait**2
        gaps.append(abs(rebuilt - var) / var)
    return ConsistencyReport(
        ok=gaps[0] <= tolerance and gaps[1] <= tolerance,
        fcfs_gap=gaps[0],
        lcfs_gap=gaps[1],
        tolerance=tolerance,
    )


@dataclass(frozen=True)
class LittleReport:
    """Both sides of E[K] = λ_eff · E[S] and their relative gap."""

    lhs: float
    rhs: float
    relative_gap: float

    def to_dict(self) -> dict[str, float]:
        return {"lhs": self.lhs, "rhs": self.rhs, "relative_gap": self.relative_gap}


def little_check(stats: WaitStats, lambda_effective: float) -> LittleReport:
    """Compare measured occupancy against arrival rate times mean sojourn.

    ``lambda_effective`` should be the measured rate over the retained
    horizon (``stats.effective_arrival_rate``), not the configured one.
    """
    lhs = stats.time_avg_in_system
    rhs = lambda_effective * stats.mean_sojourn
    if rhs == 0.0:
        gap = 0.0 if lhs == 0.0 else float("inf")
    else:
        gap = abs(lhs - rhs) / rhs
    return LittleReport(lhs=lhs, rhs=rhs, relative_gap=gap)


COMPARISON_CSV_COLUMNS = (
    "discipline",
    "seed_count",
    "mean_wait",
    "se_mean",
    "var_wait",
    "se_var",
    "p_wait",
    "predicted_var",
)


@dataclass(frozen=True)
class DisciplineSummary:
    """One comparison row: seed-averaged statistics for one discipline.

    Standard errors are pooled across seeds (root-sum-square over the
    per-seed batch-means errors, divided by the seed count); ``None`` when
    any per-seed error was unavailable.  ``predicted_var`` is the closed
    form where one exists and was requested, else ``None``.
    """

    discipline: str
    seed_count: int
    mean_wait: float
    se_mean: float | None
    var_wait: float
    se_var: float | None
    p_wait: float
    predicted_var: float | None

    def to_dict(self) -> dict[str, object]:
        return {c: getattr(self, c) for c in COMPARISON_CSV_COLUMNS}


@dataclass(frozen=True)
class ComparisonTable:
    """Aggregated comparison across disciplines, plus the per-seed detail."""

    rows: tuple[DisciplineSummary, ...]
    per_seed: dict[str, tuple[WaitStats, ...]]
    seeds: tuple[int, ...]

    @property
    def ordering_ok(self) -> bool:
        """True when aggregated variances are non-decreasing in
        first-come, random-order, last-come order (for the disciplines
        actually present)."""
        order = {d.value: k for k, d in enumerate(
            (Discipline.FCFS, Discipline.RANDOM_ORDER, Discipline.LCFS)
        )}
        present = sorted(
            (r for r in self.rows if r.discipline in order),
            key=lambda r: order[r.discipline],
        )
        return all(
            a.var_wait <= b.var_wait for a, b in zip(present, present[1:])
        )

    def to_dict(self) -> dict[str, object]:
        return {
            "seeds": list(self.seeds),
            "ordering_ok": self.ordering_ok,
            "rows": [r.to_dict() for r in self.rows],
        }

    def to_csv(self) -> str:
        """Spec'd columns; floats at 17 significant digits, None as blank."""
        def cell(v: object) -> str:
            if v is None:
                return ""
            if isinstance(v, float):
                return format(v, ".17g")
            return str(v)

        lines = [",".join(COMPARISON_CSV_COLUMNS)]
        for r in self.rows:
            d = r.to_dict()
            lines.append(",".join(cell(d[c]) for c in COMPARISON_CSV_COLUMNS))
        return "\n".join(lines) + "\n"


def _pooled_se(errors: list[float | None]) -> float | None:
    if any(e is None for e in errors):
        return None
    total = 0.0
    for e in errors:
        assert e is not None
        total += e * e
    return total**0.5 / len(errors)


def _stats_for(job: tuple[SimConfig, float]) -> WaitStats:
    cfg, warmup = job
    return compute_stats(run_simulation(cfg), warmup)


def _resolve_workers(max_workers: int | None) -> int:
    if max_workers is not None:
        if max_workers < 1:
            raise ConfigError(f"max_workers must be >= 1, got {max_workers}")
        return max_workers
    env = os.environ.get("QVAR_THREADS", "").strip()
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"QVAR_THREADS must be an integer, got {env!r}") from None
        if value < 1:
            raise ConfigError(f"QVAR_THREADS must be >= 1, got {value}")
        return value
    return 1


def compare_disciplines(
    base: SimConfig,
    seeds: list[int] | tuple[int, ...],
    *,
    disciplines: tuple[Discipline, ...] = (
        Discipline.FCFS,
        Discipline.LCFS,
        Discipline.RANDOM_ORDER,
    ),
    warmup_fraction: float = DEFAULT_WARMUP,
    oracle: bool = False,
    max_workers: int | None = None,
) -> ComparisonTable:
    """Run every discipline on every seed and aggregate the wait statistics.

    All runs share ``base`` except for discipline and seed, so matched seeds
    share their arrival and service draws exactly.  With ``oracle=True`` the
    closed-form variances are attached where they exist, which requires
    exponential arrival and service distributions.  Runs may fan out across
    processes (``max_workers``, else the ``QVAR_THREADS`` environment
    variable, else serial); results reduce in (discipline, seed) order
    either way.
    """
    if not seeds:
        raise ConfigError("at least one seed is required")
    if not base.is_stable:
        raise UnstableError(
            f"unstable configuration: arrival rate {base.arrival_rate!r} is "
            f"not below service rate {base.service_rate!r}"
        )
    prediction: MM1Prediction | None = None
    if oracle:
        assert base.arrival_dist is not None and base.service_dist is not None
        if (
            base.arrival_dist.kind != "exponential"
            or base.service_dist.kind != "exponential"
        ):
            raise ConfigError(
                "closed-form predictions exist only for exponential arrivals "
                "and exponential service; drop the oracle or the custom "
                "distributions"
            )
        prediction = mm1_predict(base.arrival_rate, base.service_rate)

    jobs = [
        (base.with_(discipline=d, seed=int(s)), warmup_fraction)
        for d in disciplines
        for s in seeds
    ]
    workers = _resolve_workers(max_workers)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_stats_for, jobs))
    else:
        results = [_stats_for(j) for j in jobs]

    rows = []
    per_seed: dict[str, tuple[WaitStats, ...]] = {}
    count = len(seeds)
    for idx, d in enumerate(disciplines):
        chunk = results[idx * count : (idx + 1) * count]
        per_seed[d.value] = tuple(chunk)
        rows.append(
            DisciplineSummary(
                discipline=d.value,
                seed_count=count,
                mean_wait=sum(s.mean_wait for s in chunk) / count,
                se_mean=_pooled_se([s.se_mean_wait for s in chunk]),
                var_wait=sum(s.var_wait for s in chunk) / count,
                se_var=_pooled_se([s.se_var_wait for s in chunk]),
                p_wait=sum(s.frac_waiting for s in chunk) / count,
                predicted_var=(
                    prediction.variance_for(d) if prediction is not None else None
                ),
            )
        )
    return ComparisonTable(rows=tuple(rows), per_seed=per_seed, seeds=tuple(int(s) for s in seeds))
