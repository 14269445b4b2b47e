import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qvar import (
    NoBadPairsError,
    Permutation,
    TooLargeError,
    bad_pairs,
    check_extremality,
    descent_swap,
    descent_to_lcfs,
    enumerate_realizable,
    fcfs_permutation,
    is_realizable,
    lcfs_permutation,
    pairing_objective,
    random_busy_period,
    random_realizable_permutation,
    validate_busy_period,
)

BP = validate_busy_period([0.0, 1.0, 2.0], [0.0, 2.5, 3.0])
# Fully nested instance: everyone arrives before the second slot opens.
NEST5 = validate_busy_period([0, 1, 2, 3, 4], [0, 4.5, 5, 6, 7])


def brute_force_realizable(bp):
    """Oracle: filter all n! orders by the realizability definition."""
    n = bp.n
    out = []
    for tail in itertools.permutations(range(2, n + 1)):
        mapping = (1,) + tail
        if all(bp.arrivals[i] < bp.service_starts[mapping[i] - 1] for i in range(1, n)):
            out.append(mapping)
    return out


def test_fcfs_is_identity():
    assert fcfs_permutation(BP).is_identity()


def test_lcfs_stack_order():
    assert lcfs_permutation(BP).mapping == (1, 3, 2)
    assert lcfs_permutation(NEST5).mapping == (1, 5, 4, 3, 2)


def test_lcfs_single_customer():
    bp = validate_busy_period([0.0], [0.0])
    assert lcfs_permutation(bp).mapping == (1,)


def test_enumerate_small():
    perms = [p.mapping for p in enumerate_realizable(BP)]
    assert perms == [(1, 2, 3), (1, 3, 2)]


def test_enumerate_lexicographic_and_matches_brute_force():
    rng = np.random.default_rng(20240817)
    for _ in range(120):
        bp = random_busy_period(rng, int(rng.integers(2, 7)))
        got = [p.mapping for p in enumerate_realizable(bp)]
        assert got == sorted(got)
        assert got == brute_force_realizable(bp)


def test_enumerate_refuses_large():
    bp = random_busy_period(np.random.default_rng(1), 11)
    with pytest.raises(TooLargeError):
        enumerate_realizable(bp)
    # explicit opt-in works
    assert enumerate_realizable(bp, max_n=11)


def test_bad_pairs_examples():
    assert [(b.i, b.j) for b in bad_pairs(BP, Permutation((1, 2, 3)))] == [(2, 3)]
    assert bad_pairs(BP, Permutation((1, 3, 2))) == []
    # in the nested instance, arrival order leaves every later pair bad
    assert len(bad_pairs(NEST5, Permutation.identity(5))) == 6


def test_bad_pairs_sorted():
    pairs = bad_pairs(NEST5, Permutation.identity(5))
    assert [(b.i, b.j) for b in pairs] == sorted((b.i, b.j) for b in pairs)


def test_stack_order_has_no_bad_pairs():
    assert bad_pairs(NEST5, lcfs_permutation(NEST5)) == []


def test_descent_swap_example():
    new, swapped = descent_swap(BP, Permutation((1, 2, 3)))
    assert new.mapping == (1, 3, 2)
    assert swapped == (2, 3)


def test_descent_swap_nested_first_step():
    new, swapped = descent_swap(NEST5, Permutation.identity(5))
    assert swapped == (2, 5)
    assert new.mapping == (1, 5, 3, 4, 2)


def test_descent_swap_requires_bad_pair():
    with pytest.raises(NoBadPairsError):
        descent_swap(BP, Permutation((1, 3, 2)))


def test_descent_trace_nested():
    trace = descent_to_lcfs(NEST5, Permutation.identity(5))
    assert trace.start == (1, 2, 3, 4, 5)
    assert trace.final == (1, 5, 4, 3, 2)
    kinds = [(s.kind, s.indices) for s in trace.steps]
    assert kinds == [
        ("swap", (2, 5)),
        ("remove-reduction", (5, 2)),
        ("swap", (3, 4)),
    ]
    assert trace.swap_count == 2


def test_descent_from_stack_order_is_empty():
    trace = descent_to_lcfs(BP, Permutation((1, 3, 2)))
    assert trace.steps == ()
    assert trace.final == (1, 3, 2)
    assert trace.to_jsonl() == ""


def test_descent_jsonl_fields():
    trace = descent_to_lcfs(BP, Permutation((1, 2, 3)))
    lines = trace.to_jsonl().splitlines()
    assert len(lines) == 1
    import json

    step = json.loads(lines[0])
    assert step["kind"] == "swap"
    assert step["indices"] == [2, 3]
    assert step["order_before"] == [1, 2, 3]
    assert step["order_after"] == [1, 3, 2]
    assert step["objective_before"] == 8.5
    assert step["objective_after"] == 8.0
    assert step["bad_pairs_before"] == 1
    assert step["bad_pairs_after"] == 0


def test_descent_invariants_random_instances():
    rng = np.random.default_rng(99)
    for _ in range(200):
        bp = random_busy_period(rng, int(rng.integers(2, 11)))
        start = random_realizable_permutation(rng, bp)
        initial_bad = len(bad_pairs(bp, start))
        trace = descent_to_lcfs(bp, start)
        assert trace.final == lcfs_permutation(bp).mapping
        swaps = [s for s in trace.steps if s.kind == "swap"]
        assert len(swaps) <= initial_bad
        for s in swaps:
            assert s.objective_after < s.objective_before
            assert s.bad_pairs_after < s.bad_pairs_before
        for s in trace.steps:
            if s.kind == "remove-reduction":
                assert s.order_before == s.order_after
                assert s.objective_before == s.objective_after


def test_check_extremality_report():
    report = check_extremality(BP)
    assert report.num_realizable == 2
    assert report.min_objective == 8.0
    assert report.max_objective == 8.5
    assert report.argmin == (1, 3, 2)
    assert report.argmax == (1, 2, 3)
    d = report.to_dict()
    assert d["min_objective"] == 8.0 and d["argmax"] == [1, 2, 3]


def test_uniqueness_of_stack_order_small():
    # exactly one realizable order has zero bad pairs, and it is the stack order
    rng = np.random.default_rng(4242)
    for _ in range(200):
        bp = random_busy_period(rng, int(rng.integers(2, 7)))
        quiet = [
            p.mapping
            for p in enumerate_realizable(bp)
            if not bad_pairs(bp, p)
        ]
        assert quiet == [lcfs_permutation(bp).mapping]


@given(st.integers(0, 2**32 - 1), st.integers(2, 7))
@settings(max_examples=120, deadline=None)
def test_envelope_brackets_every_member(seed, n):
    rng = np.random.default_rng(seed)
    bp = random_busy_period(rng, n)
    lo = pairing_objective(bp, lcfs_permutation(bp))
    hi = pairing_objective(bp, fcfs_permutation(bp))
    member = random_realizable_permutation(rng, bp)
    assert is_realizable(bp, member)
    assert lo <= pairing_objective(bp, member) <= hi


@given(st.integers(0, 2**32 - 1), st.integers(2, 9))
@settings(max_examples=120, deadline=None)
def test_stack_order_never_has_bad_pairs(seed, n):
    bp = random_busy_period(np.random.default_rng(seed), n)
    assert bad_pairs(bp, lcfs_permutation(bp)) == []
