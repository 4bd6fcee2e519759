import math

import numpy as np
import pytest

from atgraph.arrivals import constant_schedule, crp_schedule
from atgraph.asymptotics import (
    degree_histogram, density_exponent, density_from_trajectory, limit_pmf_linear,
    limit_pmf_sublinear, linear_survival, log_checkpoints, martingale_expectation,
    martingale_statistic, ntl_increments, relative_drift, sample_limit_degree_geom,
    sample_limit_degree_poisson, scaled_degrees, simulate_trajectory, simulate_tracked,
    stick_breaking_limits, sublinear_survival, tail_exponent, trajectory_from_labels,
    w1k_samples,
)
from atgraph.core import ArrivalSchedule
from atgraph.errors import BadParams, InsufficientData, InsufficientTail, ZeroSum
from atgraph.samplers import sample_db
from atgraph.stats import empirical_pmf, rank_correlation, tv_distance

# exact values from an independent mpmath evaluation
LIN_05_3 = {1: 0.714285714285714285714285714286, 2: 0.12987012987012987012987012987,
            5: 0.016642396505096733929685874766}
SUB_03 = {1: 0.3, 2: 0.105, 10: 0.011817569512546875}


def test_histogram_examples():
    pmf, tail = degree_histogram((1, 1), 5)
    assert pmf[2] == 1.0 and tail == 0.0
    pmf, _ = degree_histogram((1, 1, 2, 1), 5)
    assert pmf[1] == 0.5 and pmf[3] == 0.5 and pmf.sum() == 1.0


def test_sublinear_pmf_values():
    p = limit_pmf_sublinear(0.5, 3)
    assert p[1] == pytest.approx(0.5, rel=1e-14)
    q = limit_pmf_sublinear(0.3, 10)
    for d, v in SUB_03.items():
        assert q[d] == pytest.approx(v, rel=1e-12)
    big = limit_pmf_sublinear(0.5, 10**6)
    assert abs(math.fsum(big) + sublinear_survival(0.5, 10**6) - 1) < 1e-8
    d = 10**5
    assert big[2 * d] / big[d] == pytest.approx(2 ** -1.5, rel=1e-4)
    with pytest.raises(BadParams):
        limit_pmf_sublinear(0.0, 3)


def test_linear_pmf_values():
    p = limit_pmf_linear(0.0, 2.0, 3)
    assert p[1] == pytest.approx(2 / 3) and p[2] == pytest.approx(1 / 6) and p[3] == pytest.approx(1 / 15)
    q = limit_pmf_linear(0.5, 3.0, 5)
    for d, v in LIN_05_3.items():
        assert q[d] == pytest.approx(v, rel=1e-12)
    for mu in (1.5, 2.0, 4.0):
        g = (mu - 0.0) / (mu - 1)
        assert limit_pmf_linear(0.0, mu, 1)[1] == pytest.approx(g / (1 + g))
    big = limit_pmf_linear(-0.5, 1.7, 10**5)
    assert abs(math.fsum(big) + linear_survival(-0.5, 1.7, 10**5) - 1) < 1e-8
    with pytest.raises(BadParams):
        limit_pmf_linear(0.0, 1.0, 3)


@pytest.mark.parametrize("regime,alpha,mu", [("sublinear", 0.5, None), ("linear", 0.0, 2.0)])
def test_mixture_samplers(rng, regime, alpha, mu):
    m = 10**6
    ref = limit_pmf_sublinear(alpha, 50) if regime == "sublinear" else limit_pmf_linear(alpha, mu, 50)
    for sample in (sample_limit_degree_geom(regime, alpha, m, rng, mu),
                   sample_limit_degree_poisson(regime, alpha, m, rng, mu),
                   sample_limit_degree_poisson(regime, alpha, m, rng, mu, "beta_prime")):
        emp, _ = empirical_pmf(sample, 50)
        assert emp[0] == 0
        assert tv_distance(emp, ref, support=range(1, 51))[0] < 0.01
    if regime == "linear":
        p1 = (sample_limit_degree_geom(regime, alpha, m, rng, mu) == 1).mean()
        assert abs(p1 - 2 / 3) < 0.002


def test_geometric_boundary(rng):
    assert np.all(rng.geometric(1.0, size=10) == 1)


def test_checkpoints():
    assert log_checkpoints(1000) == [1, 2, 5, 10, 20, 50, 100, 200, 500, 1000]
    assert log_checkpoints(30)[-1] == 30


def test_scaled_degrees_sublinear_drift(rng):
    n = 10**6
    out = sample_db(0.5, crp_schedule(0.5, 1.0, n, rng), n, rng)
    tr = trajectory_from_labels(out.labels, 0.5, r=1)
    sd = scaled_degrees(tr.degree_matrix(1), tr.ns, 1.0)
    assert relative_drift(sd, tr.ns)[0] < 0.05
    assert np.all(sd <= 1.0)


def test_scaled_degrees_linear_drift(rng):
    # a single path fluctuates by ~1/sqrt(deg); the diagnostic averages runs
    ns = [10**4, 10**5]
    deg, _ = simulate_tracked(0.0, 1, ns, 500, rng, schedule=constant_schedule(1, 10**5))
    sd = scaled_degrees(deg, ns, 2.0)
    assert relative_drift(sd, ns)[0] < 0.05
    assert np.all(sd <= np.array(ns, float)[:, None] ** 0.5)


def test_tracked_chain_matches_full_sampler(rng):
    from atgraph.stats import ks_two_sample
    sched = constant_schedule(1, 200)
    full = np.array([sample_db(0.3, sched, 200, rng).labels.labels.count(1) for _ in range(3000)])
    deg, _ = simulate_tracked(0.3, 1, [200], 3000, rng, schedule=sched)
    assert ks_two_sample(full, deg[:, 0, 0]).p_value > 0.01


def test_martingale_zero_p_is_one(rng):
    sched = constant_schedule(1, 100)
    ns = [5, 50, 100]
    deg, ks = simulate_tracked(0.0, 3, ns, 50, rng, schedule=sched)
    z = martingale_statistic([0.0, 0.0, 0.0], 0.0, sched, deg, ks, ns)
    assert np.allclose(z, 1.0, atol=1e-12)


def test_martingale_expectation_closed_form():
    # E[(1 - Psi_2)] E[(1 - Psi_3)] with Beta(1, 2) and Beta(1, 4): (2/3)(4/5)
    assert martingale_expectation([1.0, 0.0, 0.0], 0.0, constant_schedule(1, 3)) == pytest.approx(8 / 15)


def test_martingale_flatness(rng):
    sched = constant_schedule(1, 10**3)
    ns = [5, 100, 1000]
    deg, ks = simulate_tracked(0.0, 3, ns, 4000, rng, schedule=sched)
    z = martingale_statistic([1.0, 0.0, 0.0], 0.0, sched, deg, ks, ns)
    means = z.mean(axis=0)
    assert abs(means[2] / means[1] - 1) < 0.02
    se = z[:, 0].std() / math.sqrt(z.shape[0])
    assert abs(means[0] - 8 / 15) < 3 * se


def test_martingale_bad_p():
    with pytest.raises(BadParams):
        from atgraph.asymptotics import martingale_log_z
        martingale_log_z([-1.5], 0.0, constant_schedule(1, 3), 5, np.ones((1, 1)), np.ones(1, int))


def test_ntl_increments(rng):
    assert np.allclose(ntl_increments([1.0, 1.0]), [1.0, 0.5])
    assert np.allclose(ntl_increments([3.0]), [1.0])
    with pytest.raises(ZeroSum):
        ntl_increments([0.0, 1.0])
    sched = ArrivalSchedule((1, 2, 5, 6, 9))
    x = stick_breaking_limits(0.2, sched, 5, 10**6, rng)
    inc = ntl_increments(x)
    for i in range(1, 5):
        for j in range(i + 1, 5):
            assert abs(rank_correlation(inc[:, i], inc[:, j])) < 0.01


def test_density_linear(rng):
    tr = simulate_trajectory(0.0, constant_schedule(1, 10**5), 2 * 10**5, rng)
    fit = density_from_trajectory(tr)
    assert abs(fit.sigma - 1) < 0.02 and abs(fit.mu - 2) < 0.1
    assert fit.epsilon == pytest.approx(1 / fit.sigma)


def test_density_sublinear(rng):
    n = 10**6
    out = sample_db(0.5, crp_schedule(0.5, 1.0, n, rng), n, rng)
    fit = density_from_trajectory(trajectory_from_labels(out.labels, 0.5))
    assert abs(fit.sigma - 0.5) < 0.05


def test_density_flags_single_vertex():
    tr = trajectory_from_labels((1,) * 10**4, 0.0)
    fit = density_from_trajectory(tr)
    assert not fit.in_regime and fit.epsilon is None
    with pytest.raises(InsufficientData):
        density_exponent([1, 2, 5], [1, 2, 3])


def test_tail_exponents(rng):
    lin = tail_exponent(sample_limit_degree_geom("linear", 0.0, 10**5, rng, 2.0))
    assert abs(lin.eta - 3) < 0.3 and lin.power_law
    sub = tail_exponent(sample_limit_degree_geom("sublinear", 0.5, 10**5, rng))
    assert abs(sub.eta - 1.5) < 0.2 and sub.power_law
    geo = tail_exponent(rng.geometric(0.3, size=10**5))
    assert not geo.power_law
    with pytest.raises(InsufficientTail):
        tail_exponent(np.ones(50, dtype=int) * 3)


def test_tail_exponent_from_pmf():
    pmf = limit_pmf_linear(0.0, 2.0, 10**4)
    fit = tail_exponent(pmf, pmf_mass=10**6)
    assert abs(fit.eta - 3) < 0.3


def test_regime_dichotomy(rng):
    k = 10**4
    lin = np.median(w1k_samples(0.0, np.tile(2 * np.arange(1, k + 1) - 1, (20, 1)), rng))
    assert lin < 1e-2
    from atgraph.asymptotics import crp_arrivals_many
    sub = np.median(w1k_samples(0.5, crp_arrivals_many(0.5, 1.0, k, 20, rng), rng))
    assert sub > 1e-2
