import math

import numpy as np
import pytest

from qvar import (
    ConfigError,
    Distribution,
    InvalidRateError,
    MalformedInputError,
    MalformedTraceError,
    SimConfig,
    SimTrace,
    extract_busy_periods,
    fcfs_permutation,
    lcfs_permutation,
    per_period_wait_sums,
    read_trace_jsonl,
    run_simulation,
    write_trace_jsonl,
)


def det_config(interarrival, service, n, discipline="fcfs", **kw):
    return SimConfig(
        arrival_rate=1.0 / interarrival,
        service_rate=1.0 / service,
        num_arrivals=n,
        seed=0,
        discipline=discipline,
        arrival_dist=Distribution.deterministic(interarrival),
        service_dist=Distribution.deterministic(service),
        **kw,
    )


def mm1(arrival_rate, n, seed, discipline="fcfs", **kw):
    return SimConfig(
        arrival_rate=arrival_rate,
        service_rate=1.0,
        num_arrivals=n,
        seed=seed,
        discipline=discipline,
        **kw,
    )


def test_no_queueing_when_gaps_exceed_service():
    trace = run_simulation(det_config(2.0, 1.0, 3))
    assert trace.waits().tolist() == [0.0, 0.0, 0.0]
    # three separate busy periods of one customer each
    assert trace.period_starts.tolist() == [0, 1, 2]
    for bp, perm in extract_busy_periods(trace):
        assert bp.n == 1 and perm.mapping == (1,)


def test_fcfs_hand_trace():
    trace = run_simulation(det_config(1.0, 1.5, 3))
    assert trace.service_starts.tolist() == [0.0, 1.5, 3.0]
    assert trace.waits().tolist() == [0.0, 0.5, 1.0]
    assert trace.period_starts.tolist() == [0]


def test_lcfs_coincides_when_one_waiter():
    # With gaps of 1.0 and service 1.5, each completion finds exactly one
    # customer waiting (the next one arrives only mid-service), so the
    # last-come rule picks the same customer as first-come and the two
    # disciplines produce identical traces.
    f = run_simulation(det_config(1.0, 1.5, 3, discipline="fcfs"))
    l = run_simulation(det_config(1.0, 1.5, 3, discipline="lcfs"))
    assert np.array_equal(f.service_starts, l.service_starts)
    assert np.array_equal(f.waits(), l.waits())
    ((bp, perm),) = extract_busy_periods(l)
    assert perm.is_identity()


def test_lcfs_hand_trace_with_real_queue():
    # A long first service (2.5) leaves both later customers waiting when
    # the second slot opens, so the disciplines genuinely diverge.
    f = run_simulation(det_config(1.0, 2.5, 3, discipline="fcfs"))
    l = run_simulation(det_config(1.0, 2.5, 3, discipline="lcfs"))
    assert f.waits().tolist() == [0.0, 1.5, 3.0]
    assert l.waits().tolist() == [0.0, 4.0, 0.5]
    # same slots either way, only the assignment changes
    assert np.array_equal(f.service_starts, np.sort(l.service_starts))
    ((bp, perm),) = extract_busy_periods(l)
    assert bp.arrivals == (0.0, 1.0, 2.0)
    assert bp.service_starts == (0.0, 2.5, 5.0)
    assert perm.mapping == (1, 3, 2)


def test_completion_processed_before_tied_arrival():
    # service 1.0, arrivals every 1.0: each completion lands exactly on the
    # next arrival; processing completions first means nobody ever waits
    # and every customer opens its own busy period.
    trace = run_simulation(det_config(1.0, 1.0, 4))
    assert trace.waits().tolist() == [0.0, 0.0, 0.0, 0.0]
    assert trace.num_periods == 4


def test_determinism_bitwise():
    cfg = mm1(0.5, 20_000, seed=7, discipline="random")
    t1 = run_simulation(cfg)
    t2 = run_simulation(cfg)
    assert np.array_equal(t1.arrivals, t2.arrivals)
    assert np.array_equal(t1.service_starts, t2.service_starts)
    assert np.array_equal(t1.departures, t2.departures)
    assert np.array_equal(t1.period_starts, t2.period_starts)


def test_position_coupling_shares_slots_across_disciplines():
    traces = {
        d: run_simulation(mm1(0.8, 20_000, seed=3, discipline=d))
        for d in ("fcfs", "lcfs", "random")
    }
    base = traces["fcfs"]
    for other in (traces["lcfs"], traces["random"]):
        assert np.array_equal(base.arrivals, other.arrivals)
        assert np.array_equal(base.period_starts, other.period_starts)
        assert np.array_equal(
            np.sort(base.service_starts), np.sort(other.service_starts)
        )
        assert np.array_equal(np.sort(base.departures), np.sort(other.departures))


def test_customer_coupling_breaks_slot_sharing():
    f = run_simulation(mm1(0.8, 20_000, seed=3, coupling="customer"))
    l = run_simulation(mm1(0.8, 20_000, seed=3, discipline="lcfs", coupling="customer"))
    assert np.array_equal(f.arrivals, l.arrivals)
    assert not np.array_equal(np.sort(f.service_starts), np.sort(l.service_starts))


def test_fcfs_couplings_agree():
    # under first-come service the k-th start belongs to customer k, so the
    # two couplings label the same draws identically
    a = run_simulation(mm1(0.5, 5_000, seed=11, coupling="position"))
    b = run_simulation(mm1(0.5, 5_000, seed=11, coupling="customer"))
    assert np.array_equal(a.departures, b.departures)


def test_extracted_orders_match_disciplines():
    for d, expect in (("fcfs", fcfs_permutation), ("lcfs", lcfs_permutation)):
        trace = run_simulation(mm1(0.8, 10_000, seed=5, discipline=d))
        pairs = extract_busy_periods(trace)
        assert sum(bp.n for bp, _ in pairs) == trace.n
        assert any(bp.n >= 3 for bp, _ in pairs)
        for bp, perm in pairs:
            assert perm == expect(bp)


def test_per_period_wait_sums_match_direct_sums():
    trace = run_simulation(mm1(0.8, 5_000, seed=2, discipline="lcfs"))
    sums = per_period_wait_sums(trace)
    assert len(sums) == trace.num_periods
    waits = trace.waits()
    for (lo, hi), s in zip(trace.period_bounds(), sums):
        assert s == pytest.approx(math.fsum(waits[lo:hi]), rel=1e-12, abs=1e-12)


def test_per_period_wait_sums_identical_across_disciplines():
    sums = [
        per_period_wait_sums(run_simulation(mm1(0.8, 20_000, seed=9, discipline=d)))
        for d in ("fcfs", "lcfs", "random")
    ]
    assert np.array_equal(sums[0], sums[1])
    assert np.array_equal(sums[0], sums[2])


def test_unstable_config_still_terminates():
    cfg = mm1(1.5, 2_000, seed=1)
    assert not cfg.is_stable
    trace = run_simulation(cfg)
    assert trace.n == 2_000
    # queue explodes: late waits dwarf early ones
    w = trace.waits()
    assert w[-100:].mean() > 10 * max(w[:100].mean(), 1e-9)


def test_trace_jsonl_round_trip(tmp_path):
    trace = run_simulation(mm1(0.8, 500, seed=13, discipline="lcfs"))
    path = tmp_path / "trace.jsonl"
    write_trace_jsonl(trace, path)
    again = read_trace_jsonl(path)
    assert np.array_equal(trace.arrivals, again.arrivals)
    assert np.array_equal(trace.service_starts, again.service_starts)
    assert np.array_equal(trace.departures, again.departures)
    assert np.array_equal(trace.period_starts, again.period_starts)


def test_trace_jsonl_shape(tmp_path):
    trace = run_simulation(det_config(2.0, 1.0, 2))
    path = tmp_path / "t.jsonl"
    write_trace_jsonl(trace, path)
    import json

    lines = path.read_text().splitlines()
    assert len(lines) == 2
    first = json.loads(lines[0])
    assert first == {
        "customer": 1,
        "arrival": 0.0,
        "service_start": 0.0,
        "departure": 1.0,
    }


def test_read_trace_rejects_garbage(tmp_path):
    p = tmp_path / "bad.jsonl"
    p.write_text("not json\n")
    with pytest.raises(MalformedInputError):
        read_trace_jsonl(p)
    p.write_text('{"customer": 2, "arrival": 0, "service_start": 0, "departure": 1}\n')
    with pytest.raises(MalformedInputError):
        read_trace_jsonl(p)
    p.write_text('{"customer": 1, "arrival": 0.5, "service_start": 0, "departure": 1}\n')
    with pytest.raises(MalformedInputError):
        read_trace_jsonl(p)
    p.write_text("")
    with pytest.raises(MalformedInputError):
        read_trace_jsonl(p)


def test_extract_detects_idle_inside_period():
    trace = run_simulation(det_config(1.0, 1.5, 3))
    starts = trace.service_starts.copy()
    starts[1] += 0.25  # server now idles between the first two services
    tampered = SimTrace(
        arrivals=trace.arrivals.copy(),
        service_starts=starts,
        departures=trace.departures.copy(),
        period_starts=trace.period_starts.copy(),
    )
    with pytest.raises(MalformedTraceError):
        extract_busy_periods(tampered)


def test_config_validation():
    with pytest.raises(InvalidRateError):
        SimConfig(arrival_rate=0.0, service_rate=1.0, num_arrivals=1, seed=0)
    with pytest.raises(InvalidRateError):
        SimConfig(arrival_rate=0.5, service_rate=-1.0, num_arrivals=1, seed=0)
    with pytest.raises(ConfigError):
        SimConfig(arrival_rate=0.5, service_rate=1.0, num_arrivals=0, seed=0)
    with pytest.raises(ConfigError):
        SimConfig(arrival_rate=0.5, service_rate=1.0, num_arrivals=1, seed=-1)
    with pytest.raises(ValueError):
        SimConfig(
            arrival_rate=0.5, service_rate=1.0, num_arrivals=1, seed=0,
            discipline="sjf",
        )
    with pytest.raises(ConfigError):
        # distribution mean contradicts the declared rate
        SimConfig(
            arrival_rate=0.5, service_rate=1.0, num_arrivals=1, seed=0,
            service_dist=Distribution.deterministic(2.0),
        )


def test_config_fills_exponential_defaults():
    cfg = SimConfig(arrival_rate=0.5, service_rate=1.0, num_arrivals=10, seed=0)
    assert cfg.arrival_dist == Distribution.exponential(0.5)
    assert cfg.service_dist == Distribution.exponential(1.0)
    assert cfg.utilization == 0.5
    assert cfg.is_stable


def test_trace_arrays_read_only():
    trace = run_simulation(det_config(2.0, 1.0, 2))
    with pytest.raises(ValueError):
        trace.arrivals[0] = 5.0
