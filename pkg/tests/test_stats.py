import numpy as np
import pytest
from scipy import stats as st

from atgraph.errors import DegenerateSupport, EmptySample, LengthMismatch
from atgraph.stats import (
    chi_square_gof, chi_square_two_sample, empirical_pmf, ks_one_sample, ks_two_sample,
    pool_cells, rank_correlation, tv_distance,
)


def test_ks_identical():
    x = np.linspace(0, 1, 100)
    r = ks_two_sample(x, x)
    assert r.statistic == 0 and r.p_value == 1


def test_ks_shift(rng):
    r = ks_two_sample(rng.random(10**4), rng.random(10**4) + 0.5)
    assert r.p_value < 1e-6


def test_ks_null_calibration():
    # at a 1% false-rejection rate, 98/100 holds with probability about 0.92
    rng = np.random.default_rng(20240917)
    ok = sum(ks_two_sample(rng.random(10**4), rng.random(10**4)).p_value > 0.01 for _ in range(100))
    assert ok >= 98


def test_ks_pvalues_uniform_under_null(rng):
    p = np.array([ks_two_sample(rng.random(2000), rng.random(2000)).p_value for _ in range(1000)])
    counts = np.histogram(p, bins=10, range=(0, 1))[0]
    assert chi_square_gof(counts, np.full(10, 0.1)).p_value > 0.01


def test_ks_one_sample(rng):
    assert ks_one_sample(rng.random(10**4), st.uniform()).p_value > 1e-3
    assert ks_one_sample(rng.random(10**4) ** 2, st.uniform().cdf).p_value < 1e-6


def test_ks_empty():
    with pytest.raises(EmptySample):
        ks_two_sample([], [1.0])


def test_chi_square_examples(rng):
    pmf = np.full(6, 1 / 6)
    assert chi_square_gof(pmf * 600, pmf).statistic == pytest.approx(0.0, abs=1e-12)
    assert chi_square_gof(np.full(6, 1000), pmf).p_value == pytest.approx(1.0)
    biased = rng.multinomial(10**4, [0.2, 0.16, 0.16, 0.16, 0.16, 0.16])
    assert chi_square_gof(biased, pmf).p_value < 1e-6


def test_chi_square_pooling():
    obs, exp = pool_cells([1, 1, 1, 10, 1], [2, 2, 2, 10, 1])
    assert obs.sum() == 14 and exp.sum() == 17 and np.all(exp[:-1] >= 5)
    with pytest.raises(DegenerateSupport):
        chi_square_gof([1, 1], [0.5, 0.5])


def test_chi_square_two_sample(rng):
    a = rng.multinomial(10**4, [0.5, 0.3, 0.2])
    b = rng.multinomial(10**4, [0.5, 0.3, 0.2])
    assert chi_square_two_sample(a, b).p_value > 1e-4
    with pytest.raises(LengthMismatch):
        chi_square_two_sample([1, 2], [1, 2, 3])


def test_tv_examples():
    assert tv_distance([0.2, 0.8], [0.2, 0.8])[0] == 0
    assert tv_distance([1.0, 0.0], [0.0, 1.0])[0] == 1
    assert tv_distance([0.5, 0.5], [0.6, 0.4])[0] == pytest.approx(0.1)
    tv, ta, tb = tv_distance([0.5, 0.25, 0.25], [0.5, 0.5, 0.0], support=[0, 1])
    assert tv == pytest.approx(0.125) and ta == pytest.approx(0.25) and tb == 0
    assert tv_distance({1: 0.5, 2: 0.5}, {1: 0.6, 2: 0.4})[0] == pytest.approx(0.1)


def test_rank_correlation(rng):
    x = rng.random(1000)
    assert rank_correlation(x, x) == pytest.approx(1.0)
    assert rank_correlation(x, -x) == pytest.approx(-1.0)
    assert abs(rank_correlation(rng.random(10**6), rng.random(10**6))) < 0.01
    with pytest.raises(LengthMismatch):
        rank_correlation([1, 2], [1, 2, 3])


def test_empirical_pmf():
    pmf, above = empirical_pmf([1, 1, 2, 9], 3)
    assert list(pmf) == [0, 0.5, 0.25, 0] and above == 0.25
