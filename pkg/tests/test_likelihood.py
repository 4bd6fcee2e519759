import itertools
import math

import numpy as np
import pytest

from atgraph.core import ArrivalSchedule, multigraph_from_labels
from atgraph.errors import CapExceeded, Inconsistent
from atgraph.likelihood import (
    crp_arrival_log_pmf, crp_marginal_log_prob, crp_records_log_prob, crp_v,
    enumerate_sequences, eppf, gibbs_v_marginal, log_prob_labels, log_prob_partition,
    log_prob_sequential, log_v_alpha_t, v_alpha_t,
)

# exact values from an independent mpmath evaluation
V42_CRP_03_1 = 0.0541666666666666666666666666667


def test_forced_sequences_have_probability_one():
    for a in (-2.0, 0.0, 0.7):
        assert log_prob_labels(a, ArrivalSchedule((1, 2)), (1, 2)) == pytest.approx(0.0, abs=1e-14)
        assert log_prob_labels(a, ArrivalSchedule((1,)), (1, 1)) == pytest.approx(0.0, abs=1e-14)


def test_hand_values():
    s = ArrivalSchedule((1, 2))
    assert math.exp(log_prob_labels(0.0, s, (1, 2, 1, 1))) == pytest.approx(1 / 3, rel=1e-13)
    # alpha = -1: (2/4)(2/5)(3/6) = 1/10
    assert math.exp(log_prob_labels(-1.0, s, (1, 2, 1, 2, 2))) == pytest.approx(0.1, rel=1e-13)


def test_inconsistent_labels_get_zero():
    assert log_prob_labels(0.0, ArrivalSchedule((1, 3)), (1, 2)) == -math.inf
    # schedule says vertex 2 arrives at 3 but the labels never open it
    assert log_prob_labels(0.0, ArrivalSchedule((1, 3)), (1, 1, 1)) == -math.inf


@pytest.mark.parametrize("times", [(1, 2, 4), (1, 3), (1, 2, 3, 4, 5), (1, 5, 6)])
@pytest.mark.parametrize("alpha", [-1.0, 0.0, 0.3, 0.9])
def test_completeness_and_sequential(times, alpha):
    s = ArrivalSchedule(times)
    for n in range(1, 9):
        seqs = enumerate_sequences(s, n)
        lp = np.array([log_prob_labels(alpha, s, q) for q in seqs])
        assert abs(math.fsum(np.exp(lp)) - 1) < 1e-10
        ls = np.array([log_prob_sequential(alpha, s, q) for q in seqs])
        assert np.max(np.abs(lp - ls)) < 1e-12


def test_enumeration_cap():
    with pytest.raises(CapExceeded):
        enumerate_sequences(ArrivalSchedule((1,)), 13)


def test_partition_probability_hand_value():
    # blocks (2, 1) with records (1, 3): the labels (1, 1, 2) are forced
    assert log_prob_partition(0.5, (1, 3), (2, 1)) == pytest.approx(0.0, abs=1e-14)
    assert log_prob_partition(0.3, (1,), (2,)) == pytest.approx(0.0, abs=1e-14)


def test_partition_matches_labels(rng):
    for _ in range(1000):
        labels = [1]
        for _ in range(rng.integers(1, 15)):
            labels.append(int(rng.integers(1, max(labels) + 2)))
        v = multigraph_from_labels(labels)
        a = float(rng.uniform(-2, 0.95))
        lp = log_prob_labels(a, ArrivalSchedule(v.arrival_times), labels)
        assert abs(lp - log_prob_partition(a, v.arrival_times, v.degrees)) < 1e-10
        lg = sum(math.lgamma(c - a) - math.lgamma(1 - a) for c in v.degrees)
        assert abs(lp - (log_v_alpha_t(len(labels), v.num_vertices, a, v.arrival_times) + lg)) < 1e-12


def test_v_single():
    assert v_alpha_t(1, 1, 0.4, (1,)) == pytest.approx(1.0)


def test_v_errors():
    with pytest.raises(Inconsistent):
        v_alpha_t(3, 2, 0.0, (1, 5))
    with pytest.raises(Inconsistent):
        log_prob_partition(0.0, (1, 3), (1, 3))


def test_crp_arrival_pmf():
    assert crp_arrival_log_pmf(0.5, 1.0, 1, 1, 1) == pytest.approx(math.log(0.75))
    tot = math.fsum(math.exp(crp_arrival_log_pmf(0.0, 1.0, 1, 1, t)) for t in range(1, 10**4 + 1))
    assert tot <= 1 + 1e-12


def test_gibbs_v_marginal():
    assert gibbs_v_marginal(1, 1, 0.3, 1.0) == pytest.approx(1.0)
    assert gibbs_v_marginal(4, 2, 0.3, 1.0) == pytest.approx(V42_CRP_03_1, rel=1e-12)
    for n in range(1, 9):
        for k in range(1, n + 1):
            lhs = gibbs_v_marginal(n, k, 0.3, 1.0)
            rhs = (n - 0.3 * k) * gibbs_v_marginal(n + 1, k, 0.3, 1.0) + gibbs_v_marginal(n + 1, k + 1, 0.3, 1.0)
            assert abs(lhs / rhs - 1) < 1e-10
            assert abs(lhs / crp_v(n, k, 0.3, 1.0) - 1) < 1e-10


def test_crp_marginal_is_exchangeable_and_normalized():
    from atgraph.partition import set_partitions
    for n in range(1, 7):
        tot = 0.0
        for labels in set_partitions(n):
            p = math.exp(crp_marginal_log_prob(0.3, 1.0, labels))
            sizes = multigraph_from_labels(labels).degrees
            assert p == pytest.approx(eppf(sizes, 0.3, crp_v(n, len(sizes), 0.3, 1.0)), rel=1e-12)
            tot += p
        assert tot == pytest.approx(1.0, abs=1e-12)


def test_records_probability_sums_to_one():
    n = 7
    tot = 0.0
    for k in range(1, n + 1):
        for rest in itertools.combinations(range(2, n + 1), k - 1):
            tot += math.exp(crp_records_log_prob(0.4, 0.5, (1,) + rest, n))
    assert tot == pytest.approx(1.0, abs=1e-12)
