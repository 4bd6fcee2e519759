import math
from fractions import Fraction

import numpy as np
import pytest

from atgraph.asymptotics import prefix_connected
from atgraph.core import ArrivalSchedule
from atgraph.errors import BadParams, Inconsistent
from atgraph.likelihood import enumerate_sequences, log_prob_labels
from atgraph.samplers import (
    FenwickTree, draw_psi, sample_db, sample_psi_recursion, sample_stick_breaking,
)
from atgraph.stats import chi_square_gof, ks_one_sample, rank_correlation


def test_single_vertex_forever(rng):
    s = ArrivalSchedule((1,))
    assert sample_db(0.3, s, 3, rng).labels.labels == (1, 1, 1)
    assert sample_stick_breaking(0.3, s, 5, rng).labels.labels == (1,) * 5


def test_selection_probability_after_prefix(rng):
    # after (1,1,2) with alpha = 0.5: P(next = 1) = 1.5 / 2 = 0.75
    s = ArrivalSchedule((1, 3))
    m = 40000
    hits = sum(sample_db(0.5, s, 4, rng).labels.labels[3] == 1 for _ in range(m))
    assert abs(hits / m - 0.75) < 4 * math.sqrt(0.75 * 0.25 / m)


def test_sequential_product_one_third():
    s = ArrivalSchedule((1, 2))
    p = Fraction(1) * Fraction(1, 2) * Fraction(2, 3)
    assert math.isclose(math.exp(log_prob_labels(0.0, s, (1, 2, 1, 1))), float(p))


def test_weights_sum_to_one_exactly():
    # (deg_j - alpha) summed over present vertices equals (n - 1) - alpha k
    degs = [Fraction(3), Fraction(1), Fraction(2)]
    alpha = Fraction(1, 3)
    n = int(sum(degs)) + 1
    total = sum((d - alpha) / ((n - 1) - alpha * len(degs)) for d in degs)
    assert total == 1


@pytest.mark.parametrize("method", ["db", "stick"])
@pytest.mark.parametrize("alpha", [-1.0, 0.5])
def test_sampler_matches_exact_pmf(rng, method, alpha):
    s = ArrivalSchedule((1, 2, 4))
    n = 6
    seqs = enumerate_sequences(s, n)
    idx = {q: i for i, q in enumerate(seqs)}
    counts = np.zeros(len(seqs))
    fn = sample_db if method == "db" else sample_stick_breaking
    for _ in range(20000):
        counts[idx[fn(alpha, s, n, rng).labels.labels]] += 1
    pmf = np.exp([log_prob_labels(alpha, s, q) for q in seqs])
    assert chi_square_gof(counts, pmf).p_value > 0.01


def test_fenwick_tree():
    ft = FenwickTree.from_weights([1.0, 2.0, 3.0, 4.0])
    assert ft.prefix(4) == 10.0 and ft.prefix(2) == 3.0
    assert [ft.search(x) for x in (0.5, 1.0, 5.99, 6.0, 9.99)] == [1, 2, 3, 4, 4]
    ft.add(1, 5.0)
    assert ft.prefix(1) == 6.0 and ft.search(5.5) == 1


def test_fenwick_path_matches_exact_pmf(rng):
    s = ArrivalSchedule((1, 2, 4))
    seqs = enumerate_sequences(s, 6)
    idx = {q: i for i, q in enumerate(seqs)}
    counts = np.zeros(len(seqs))
    for _ in range(20000):
        counts[idx[sample_db(0.3, s, 6, rng, scan_threshold=1).labels.labels]] += 1
    pmf = np.exp([log_prob_labels(0.3, s, q) for q in seqs])
    assert chi_square_gof(counts, pmf).p_value > 0.01


def test_stick_breaking_w_kk_is_one(rng):
    s = ArrivalSchedule((1, 2, 4, 7))
    out = sample_stick_breaking(0.0, s, 10, rng)
    for k in range(1, len(out.psi) + 1):
        assert out.psi.w(k, k) == 1.0


def test_t2_schedules_stay_connected(rng):
    s = ArrivalSchedule((1, 2, 4, 6, 10, 12, 20))
    for _ in range(50):
        assert prefix_connected(sample_db(0.4, s, 30, rng).labels)
    # an odd arrival time leaves a vertex isolated for a while
    s_odd = ArrivalSchedule((1, 3))
    assert not prefix_connected((1, 1, 2, 2))
    assert sample_db(0.0, s_odd, 4, rng).labels.labels[2] == 2


def test_seed_labels_checked(rng):
    with pytest.raises(Inconsistent):
        sample_db(0.0, ArrivalSchedule((1, 3)), 5, rng, seed_labels=(1, 2))


def test_psi_recursion_marginals(rng):
    from scipy import stats
    # Delta_2 = 1 gives t_2 = 2 and Beta(1, 1); Delta_2 = 2 gives t_2 = 3 and Beta(1, 2)
    uni = sample_psi_recursion(0.0, [1], rng, size=10**5)
    assert ks_one_sample(uni[:, 1], stats.uniform()).p_value > 0.01
    psi = sample_psi_recursion(0.0, [2, 2], rng, size=10**5)
    assert np.all(psi[:, 0] == 1.0)
    assert ks_one_sample(psi[:, 1], stats.beta(1, 2)).p_value > 0.01
    assert ks_one_sample(psi[:, 2], stats.beta(1, 4)).p_value > 0.01
    big = sample_psi_recursion(0.0, [2, 2], rng, size=10**6)
    assert abs(rank_correlation(big[:, 1], big[:, 2])) < 0.01


def test_draw_psi_needs_enough_arrivals(rng):
    with pytest.raises(BadParams):
        draw_psi(0.5, ArrivalSchedule((1, 2)), 3, rng)
    psi, log1m = draw_psi(-2.0, ArrivalSchedule((1, 2, 3)), 3, rng, size=5)
    assert psi.shape == (5, 3) and np.all(psi[:, 0] == 1.0)
    assert np.allclose(np.exp(log1m[:, 1:]), 1 - psi[:, 1:])
