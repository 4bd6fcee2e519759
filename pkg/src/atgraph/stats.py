"""Test statistics used by the validation and identity suites.

Thin wrappers over scipy.stats with the input checks and cell pooling the
suites rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as _st

from .errors import DegenerateSupport, EmptySample, LengthMismatch

MIN_EXPECTED = 5.0


@dataclass(frozen=True)
class TestResult:
    __test__ = False

    statistic: float
    p_value: float
    n_lhs: int
    n_rhs: int


def ks_two_sample(xs, ys) -> TestResult:
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    if xs.size == 0 or ys.size == 0:
        raise EmptySample("KS test needs two nonempty samples")
    res = _st.ks_2samp(xs, ys, method="asymp")
    return TestResult(float(res.statistic), float(np.clip(res.pvalue, 0.0, 1.0)), xs.size, ys.size)


def ks_one_sample(xs, cdf) -> TestResult:
    """KS test of ``xs`` against a continuous ``cdf`` (callable or scipy frozen law)."""
    xs = np.asarray(xs, dtype=float).ravel()
    if xs.size == 0:
        raise EmptySample("KS test needs a nonempty sample")
    cdf = getattr(cdf, "cdf", cdf)
    res = _st.kstest(xs, cdf, method="asymp")
    return TestResult(float(res.statistic), float(np.clip(res.pvalue, 0.0, 1.0)), xs.size, 0)


def pool_cells(observed, expected, min_expected=MIN_EXPECTED):
    """Merge adjacent cells left to right until each expected count reaches
    ``min_expected``; a short remainder is folded into the last kept cell."""
    obs_out, exp_out = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(observed, expected):
        o_acc += o
        e_acc += e
        if e_acc >= min_expected:
            obs_out.append(o_acc)
            exp_out.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0 or o_acc > 0:
        if obs_out:
            obs_out[-1] += o_acc
            exp_out[-1] += e_acc
        else:
            obs_out.append(o_acc)
            exp_out.append(e_acc)
    return np.array(obs_out), np.array(exp_out)


def chi_square_gof(counts, pmf, min_expected=MIN_EXPECTED) -> TestResult:
    """Pearson goodness of fit.  Mass of ``pmf`` not covered by ``counts`` is
    added to the last cell so the expected counts sum to the sample size."""
    counts = np.asarray(counts, dtype=float)
    pmf = np.asarray(pmf, dtype=float)
    if counts.shape != pmf.shape:
        raise LengthMismatch("counts and pmf must have the same length")
    m = counts.sum()
    if m <= 0:
        raise EmptySample("no observations")
    if np.any(pmf < 0):
        raise DegenerateSupport("pmf has negative entries")
    expected = pmf * m
    expected[-1] += max(0.0, m - expected.sum())
    obs, exp = pool_cells(counts, expected, min_expected)
    if obs.size < 2:
        raise DegenerateSupport("fewer than two cells after pooling")
    if np.any((exp == 0) & (obs > 0)):
        return TestResult(float("inf"), 0.0, int(m), 0)
    exp = exp * (obs.sum() / exp.sum())
    stat = float(np.sum((obs - exp) ** 2 / exp))
    p = float(_st.chi2.sf(stat, obs.size - 1))
    return TestResult(stat, p, int(m), 0)


def chi_square_two_sample(counts_a, counts_b, min_expected=MIN_EXPECTED) -> TestResult:
    """Homogeneity test between two count vectors over the same cells."""
    a = np.asarray(counts_a, dtype=float)
    b = np.asarray(counts_b, dtype=float)
    if a.shape != b.shape:
        raise LengthMismatch("count vectors must have the same length")
    if a.sum() == 0 or b.sum() == 0:
        raise EmptySample("both samples need observations")
    # pool on the combined table so both rows share cells
    pooled_a, pooled_b = [], []
    acc_a = acc_b = 0.0
    scale = min(a.sum(), b.sum()) / (a.sum() + b.sum())
    for x, y in zip(a, b):
        acc_a += x
        acc_b += y
        if (acc_a + acc_b) * scale >= min_expected:
            pooled_a.append(acc_a)
            pooled_b.append(acc_b)
            acc_a = acc_b = 0.0
    if acc_a or acc_b:
        if pooled_a:
            pooled_a[-1] += acc_a
            pooled_b[-1] += acc_b
        else:
            pooled_a.append(acc_a)
            pooled_b.append(acc_b)
    if len(pooled_a) < 2:
        raise DegenerateSupport("fewer than two cells after pooling")
    table = np.array([pooled_a, pooled_b])
    stat, p, _, _ = _st.chi2_contingency(table, correction=False)
    return TestResult(float(stat), float(p), int(a.sum()), int(b.sum()))


def tv_distance(pmf_a, pmf_b, support=None):
    """Half the L1 distance over ``support``.

    Returns ``(tv, tail_a, tail_b)`` where the tails are the masses each pmf
    puts outside ``support``.  Inputs are arrays indexed from 0 or dicts.
    """
    if isinstance(pmf_a, dict) or isinstance(pmf_b, dict):
        da = dict(pmf_a) if isinstance(pmf_a, dict) else dict(enumerate(pmf_a))
        db = dict(pmf_b) if isinstance(pmf_b, dict) else dict(enumerate(pmf_b))
        keys = sorted(set(da) | set(db)) if support is None else list(support)
        a = np.array([da.get(k, 0.0) for k in keys])
        b = np.array([db.get(k, 0.0) for k in keys])
        tail_a = max(0.0, sum(da.values()) - a.sum())
        tail_b = max(0.0, sum(db.values()) - b.sum())
    else:
        a_full = np.asarray(pmf_a, dtype=float)
        b_full = np.asarray(pmf_b, dtype=float)
        if support is None:
            size = max(a_full.size, b_full.size)
            a_full = np.pad(a_full, (0, size - a_full.size))
            b_full = np.pad(b_full, (0, size - b_full.size))
            support = np.arange(size)
        idx = np.asarray(list(support), dtype=int)
        a = np.array([a_full[i] if i < a_full.size else 0.0 for i in idx])
        b = np.array([b_full[i] if i < b_full.size else 0.0 for i in idx])
        tail_a = max(0.0, a_full.sum() - a.sum())
        tail_b = max(0.0, b_full.sum() - b.sum())
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("pmfs must be nonnegative")
    return 0.5 * float(np.abs(a - b).sum()), float(tail_a), float(tail_b)


def rank_correlation(xs, ys) -> float:
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    if xs.size != ys.size:
        raise LengthMismatch(f"lengths differ: {xs.size} vs {ys.size}")
    if xs.size < 2:
        raise EmptySample("need at least two pairs")
    return float(_st.spearmanr(xs, ys).statistic)


def empirical_pmf(values, d_max):
    """Counts of ``values`` in ``0..d_max`` (normalized) plus the mass above."""
    values = np.asarray(values, dtype=np.int64)
    counts = np.bincount(np.clip(values, 0, d_max + 1), minlength=d_max + 2)
    pmf = counts[: d_max + 1] / values.size
    return pmf, counts[d_max + 1] / values.size
