"""The twelve acceptance criteria as seeded, self-contained checks.

Each criterion returns a ``CriterionResult`` holding one ``TestReport`` per
check.  Randomness comes from ``SeedSequence(seed).spawn(12)``: criterion
``i`` always uses child ``i - 1``, so running a subset reproduces the same
numbers as the full suite.  Multi-component statistical checks combine their
p-values by Bonferroni inside the check.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as _st

from .arrivals import constant_schedule, crp_schedule, schedule_from_spec
from .asymptotics import (
    crp_arrivals_many, density_from_trajectory, ntl_increments, limit_pmf_linear,
    limit_pmf_sublinear, martingale_expectation, martingale_statistic, prefix_connected,
    sample_limit_degree_geom, sample_limit_degree_poisson, simulate_tracked,
    stick_breaking_limits, tail_exponent, trajectory_from_labels, w1k_samples,
)
from .core import ArrivalSchedule, TestReport, multigraph_from_labels
from .identities import IdentitySpec, run_identity
from .likelihood import (
    crp_arrival_log_pmf, crp_marginal_log_prob, crp_v, enumerate_sequences, eppf,
    gibbs_v_marginal, log_prob_labels, log_prob_sequential,
)
from .partition import Partition, set_partitions
from .samplers import sample_db, sample_psi_recursion, sample_stick_breaking
from .stats import (
    chi_square_gof, chi_square_two_sample, empirical_pmf, ks_one_sample, rank_correlation,
    tv_distance,
)

DEFAULT_SEED = 20240917
N_CRITERIA = 12


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list
    seed: int
    runtime_ms: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def rows(self) -> list:
        """Flat records ``{criterion, statistic, threshold, passed, seed, samples, runtime_ms}``."""
        out = []
        for c in self.checks:
            out.append({
                "criterion": f"{self.number}:{c.name}",
                "statistic": float(c.value),
                "threshold": c.threshold,
                "passed": c.passed,
                "seed": self.seed,
                "samples": int(c.samples),
                "runtime_ms": round(self.runtime_ms, 1),
            })
        return out

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        parts = []
        for c in self.checks:
            op = "<" if c.kind == "exact" else ">"
            parts.append(f"{c.name}={c.value:.4g}{op}{c.threshold:g}{'' if c.passed else '!'}")
        return f"[{verdict}] criterion {self.number:2d} {self.title}: " + "; ".join(parts)


def _bonferroni(pvals) -> float:
    pvals = list(pvals)
    return min(1.0, min(pvals) * len(pvals))


def _exact(name, value, tol, samples=0, **details) -> TestReport:
    return TestReport(name, statistic=value, value=value, threshold=tol, kind="exact",
                      samples=samples, details=details)


def _stat(name, p, threshold, statistic=0.0, samples=0, **details) -> TestReport:
    return TestReport(name, statistic=statistic, value=p, threshold=threshold,
                      kind="statistical", samples=samples, details=details)


# -- 1: exact probabilities ----------------------------------------------------


def criterion_1(rng, alphas=(-1.0, 0.0, 0.5), times=(1, 2, 4), n=6) -> list:
    sched = ArrivalSchedule(tuple(times), "fixed")
    seqs = enumerate_sequences(sched, n)
    worst_sum = worst_seq = 0.0
    for a in alphas:
        lp = np.array([log_prob_labels(a, sched, s) for s in seqs])
        ls = np.array([log_prob_sequential(a, sched, s) for s in seqs])
        worst_sum = max(worst_sum, abs(math.fsum(np.exp(lp)) - 1.0))
        worst_seq = max(worst_seq, float(np.max(np.abs(np.exp(lp) - np.exp(ls)))))
    return [_exact("sum_to_one", worst_sum, 1e-10, len(seqs) * len(alphas)),
            _exact("closed_vs_sequential", worst_seq, 1e-12, len(seqs) * len(alphas))]


# -- 2: db and stick-breaking agree ------------------------------------------------


def criterion_2(rng, m=10**5, times=(1, 2, 4), n=6, alpha=0.0) -> list:
    sched = ArrivalSchedule(tuple(times), "fixed")
    seqs = enumerate_sequences(sched, n)
    index = {s: i for i, s in enumerate(seqs)}
    ca = np.zeros(len(seqs))
    cb = np.zeros(len(seqs))
    for _ in range(m):
        ca[index[sample_db(alpha, sched, n, rng).labels.labels]] += 1
    for _ in range(m):
        cb[index[sample_stick_breaking(alpha, sched, n, rng).labels.labels]] += 1
    res = chi_square_two_sample(ca, cb)
    exact = np.exp([log_prob_labels(alpha, sched, s) for s in seqs])
    gof = [chi_square_gof(c, exact).p_value for c in (ca, cb)]
    return [_stat("db_vs_stick_chi2", res.p_value, 0.01, res.statistic, 2 * m,
                  outcomes=len(seqs), gof_vs_exact=gof)]


# -- 3: beta-gamma recursion --------------------------------------------------


def criterion_3(rng, m=10**5, m_corr=10**6, alpha=0.5, delta=2, r=5) -> list:
    deltas = [delta] * (r - 1)
    times = np.concatenate(([1], 1 + np.cumsum(deltas)))
    psi = sample_psi_recursion(alpha, deltas, rng, size=m)
    pvals = {}
    for j in range(2, r + 1):
        law = _st.beta(1 - alpha, times[j - 1] - 1 - (j - 1) * alpha)
        pvals[f"psi_{j}"] = ks_one_sample(psi[:, j - 1], law).p_value
    big = sample_psi_recursion(alpha, deltas, rng, size=m_corr)
    rho = max(abs(rank_correlation(big[:, i], big[:, j]))
              for i, j in itertools.combinations(range(1, r), 2))
    return [_stat("marginals_ks", _bonferroni(pvals.values()), 0.01, samples=m, p_values=pvals),
            _exact("max_abs_rank_corr", rho, 0.01, m_corr)]


# -- 4, 5: degree laws --------------------------------------------------------


def _degree_checks(labels, ref_pmf, d_max=20):
    deg = np.asarray(multigraph_from_labels(labels).degrees)
    emp, _ = empirical_pmf(deg, d_max)
    tv, _, _ = tv_distance(emp, ref_pmf[: d_max + 1], support=range(1, d_max + 1))
    return deg, tv


def criterion_4(rng, edges=10**5, alpha=0.0) -> list:
    n = 2 * edges
    sched = constant_schedule(1, n // 2 + 1)
    out = sample_db(alpha, sched, n, rng)
    deg, tv = _degree_checks(out.labels, limit_pmf_linear(alpha, 2.0, 20))
    fit = tail_exponent(deg)
    return [_exact("tv_d<=20", tv, 0.02, deg.size),
            _exact("|eta_hat-3|", abs(fit.eta - (3 - alpha)), 0.3, fit.n_tail,
                   eta=fit.eta, d_min=fit.d_min)]


def criterion_5(rng, edges=10**5, alpha=0.5, theta=1.0) -> list:
    n = 2 * edges
    sched = crp_schedule(alpha, theta, n, rng)
    out = sample_db(alpha, sched, n, rng)
    deg, tv = _degree_checks(out.labels, limit_pmf_sublinear(alpha, 20))
    fit = density_from_trajectory(trajectory_from_labels(out.labels, alpha))
    eps = fit.epsilon if fit.epsilon is not None else math.inf
    return [_exact("tv_d<=20", tv, 0.02, deg.size),
            _exact("|sigma_hat-0.5|", abs(fit.sigma - alpha), 0.05, n, sigma=fit.sigma),
            _exact("|eps_hat-1/sigma_hat|", abs(eps - 1.0 / fit.sigma), 1e-12, n, epsilon=eps)]


# -- 6: mixture representations -----------------------------------------------


def _tv_full(a, b, d_max):
    pa, ta = a
    pb, tb = b
    tv, _, _ = tv_distance(pa, pb, support=range(1, d_max + 1))
    return tv + 0.5 * abs(ta - tb)


def criterion_6(rng, m=10**6, d_max=50) -> list:
    checks = []
    cases = (("sublinear", 0.5, None), ("linear", 0.0, 2.0))
    for regime, alpha, mu in cases:
        ref = (limit_pmf_sublinear(alpha, d_max) if regime == "sublinear"
               else limit_pmf_linear(alpha, mu, d_max))
        ref_t = (ref, max(0.0, 1.0 - ref.sum()))
        geo = empirical_pmf(sample_limit_degree_geom(regime, alpha, m, rng, mu), d_max)
        poi = empirical_pmf(sample_limit_degree_poisson(regime, alpha, m, rng, mu), d_max)
        bp = empirical_pmf(sample_limit_degree_poisson(regime, alpha, m, rng, mu, "beta_prime"), d_max)
        worst = max(_tv_full(geo, ref_t, d_max), _tv_full(poi, ref_t, d_max),
                    _tv_full(bp, ref_t, d_max), _tv_full(geo, poi, d_max))
        checks.append(_exact(f"{regime}_max_tv", worst, 0.01, 3 * m))
    return checks


# -- 7: regime dichotomy ------------------------------------------------------


def criterion_7(rng, k=10**4, seeds=100) -> list:
    lin_times = np.tile(2 * np.arange(1, k + 1) - 1, (seeds, 1))
    lin = float(np.median(w1k_samples(0.0, lin_times, rng)))
    crp_times = crp_arrivals_many(0.5, 1.0, k, seeds, rng)
    sub = float(np.median(w1k_samples(0.5, crp_times, rng)))
    return [_exact("linear_median_W1k", lin, 1e-2, seeds),
            TestReport("sublinear_median_W1k", statistic=sub, value=sub, threshold=1e-2,
                       kind="lower", samples=seeds)]


# -- 8: Gibbs coefficients ----------------------------------------------------


def _crp_first_gaps(alpha, theta, runs, n_max, rng):
    """Sequential-seating oracle: per run, ``T_2 - 1`` and ``T_3 - T_2`` (0 if unseen)."""
    k = np.ones(runs)
    t2 = np.zeros(runs, dtype=np.int64)
    t3 = np.zeros(runs, dtype=np.int64)
    for n in range(1, n_max):
        new = rng.random(runs) * (theta + n) < theta + alpha * k
        k += new
        t2 = np.where(new & (t2 == 0), n + 1, t2)
        t3 = np.where(new & (t3 == 0) & (k == 3), n + 1, t3)
    return t2, t3


def criterion_8(rng, alpha=0.3, theta=1.0, n_rec=8, n_eppf=6, runs=10**5, n_max=60) -> list:
    v = {(n, k): gibbs_v_marginal(n, k, alpha, theta)
         for n in range(1, n_rec + 2) for k in range(1, n + 1)}
    rec = 0.0
    for n in range(1, n_rec + 1):
        for k in range(1, n + 1):
            rhs = (n - k * alpha) * v[(n + 1, k)] + v[(n + 1, k + 1)]
            rec = max(rec, abs(v[(n, k)] - rhs) / v[(n, k)])
    closed = max(abs(v[key] / crp_v(*key, alpha, theta) - 1) for key in v)

    spread = 0.0
    for n in range(1, n_eppf + 1):
        groups: dict = {}
        for labels in set_partitions(n):
            sizes = tuple(sorted(Partition(labels).block_sizes))
            groups.setdefault(sizes, []).append(math.exp(crp_marginal_log_prob(alpha, theta, labels)))
        for sizes, probs in groups.items():
            target = eppf(sizes, alpha, crp_v(n, len(sizes), alpha, theta))
            spread = max(spread, max(abs(p / target - 1) for p in probs))

    t2, t3 = _crp_first_gaps(alpha, theta, runs, n_max, rng)
    d_max = n_max - 3
    pvals = {}
    g1 = t2[t2 > 0] - 1
    pmf1 = np.exp([crp_arrival_log_pmf(alpha, theta, 1, 1, t) for t in range(1, d_max + 1)])
    cnt1 = np.bincount(np.minimum(g1, d_max + 1), minlength=d_max + 2)[1: d_max + 1].astype(float)
    cnt1[-1] += (t2 == 0).sum() + (g1 > d_max).sum()
    pvals["T2|T1=1"] = chi_square_gof(cnt1, pmf1).p_value
    sel = t2 == 2
    g2 = np.where(t3[sel] > 0, t3[sel] - 2, d_max + 1)
    pmf2 = np.exp([crp_arrival_log_pmf(alpha, theta, 2, 2, t) for t in range(1, d_max + 1)])
    cnt2 = np.bincount(np.minimum(g2, d_max + 1), minlength=d_max + 2)[1: d_max + 1].astype(float)
    cnt2[-1] += (g2 > d_max).sum()
    pvals["T3|T2=2"] = chi_square_gof(cnt2, pmf2).p_value
    return [_exact("recursion_rel_err", rec, 1e-10, len(v), closed_form_rel_err=closed),
            _exact("eppf_perm_invariance", spread, 1e-12),
            _stat("arrival_pmf_chi2", _bonferroni(pvals.values()), 0.01, samples=runs,
                  p_values=pvals)]


# -- 9: martingale ------------------------------------------------------------


def criterion_9(rng, runs=10**4, p=(1.0, 0.0, 0.0), alpha=0.0) -> list:
    sched = constant_schedule(1, 10**4)
    t_r = sched.time(len(p))
    ns = [t_r, 10**3, 10**4]
    deg, ks = simulate_tracked(alpha, len(p), ns, runs, rng, schedule=sched)
    z = martingale_statistic(p, alpha, sched, deg, ks, ns)
    means = z.mean(axis=0)
    drift = abs(means[2] / means[1] - 1)
    target = martingale_expectation(p, alpha, sched)
    se = z[:, 0].std(ddof=1) / math.sqrt(runs)
    return [_exact("drift_1e3_1e4", drift, 0.02, runs, means=means.tolist()),
            _exact("|E[Z_Tr]-closed|/se", abs(means[0] - target) / se, 3.0, runs,
                   closed=target, mean=float(means[0]))]


# -- 10: identity suite -------------------------------------------------------


def identity_suite() -> list:
    """Pre-registered identity specs and sample sizes."""
    return [
        (IdentitySpec("BETA_GAMMA_ALGEBRA", {"a": 0.5, "b": 2.0}), 10**6),
        (IdentitySpec("BETA_PRODUCT_SPLIT", {"a": 0.5, "b": 1.0, "c": 2.0}), 10**6),
        (IdentitySpec("PA_LIMITS", {"d": 1, "alpha": 0.5, "r": 2}, which=(1, 2, 3, 4)), 10**5),
        (IdentitySpec("CRP_LIMITS", {"alpha": 0.5, "theta": 1.0, "T": (1, 3)},
                      which=("joint", "marginal", "conditional")), 10**5),
        (IdentitySpec("YS_LIMITS", {"beta": 0.5, "T": (1, 3)},
                      which=("joint", "marginal", "marginal_b", "marginal_c", "conditional",
                             "conditional_b_corrected", "gamma")), 10**5),
        (IdentitySpec("URN_IMMIGRATION", {"w": 1, "b": 1, "beta": 0.5},
                      which=("form_1", "form_2", "gamma")), 10**5),
        (IdentitySpec("URN_IMMIGRATION", {"w": 1, "b": 1, "beta": 0.5}, route="sim",
                      which=("limit",), n_sim=10**5, runs=10**4), 10**4),
    ]


def criterion_10(rng) -> list:
    out = []
    for spec, m in identity_suite():
        rep = run_identity(spec, m, rng)
        rep.name = f"{spec.name}[{spec.route}]"
        out.append(rep)
    return out


# -- 11: doubling -------------------------------------------------------------


def criterion_11(rng, seeds=100, edges=10**3, big_edges=10**5, alpha=0.5) -> list:
    failures = 0
    for _ in range(seeds):
        sched = schedule_from_spec("doubled:delta:1", 2 * edges, rng)
        out = sample_db(alpha, sched, 2 * edges, rng)
        failures += not prefix_connected(out.labels)
    sched = schedule_from_spec("doubled:delta:1", 2 * big_edges, rng)
    out = sample_db(alpha, sched, 2 * big_edges, rng)
    fit = tail_exponent(np.asarray(multigraph_from_labels(out.labels).degrees))
    mu = 1.0
    eta2 = 1 + (2 * mu - alpha) / (2 * mu - 1)
    return [_exact("disconnected_runs", failures, 0.5, seeds),
            _exact("|eta_hat-eta2|", abs(fit.eta - eta2), 0.3, fit.n_tail, eta=fit.eta, eta2=eta2)]


# -- 12: NTL ------------------------------------------------------------------


def criterion_12(rng, m=10**6, r=5, alpha=0.5) -> list:
    sched = constant_schedule(1, r)
    x = stick_breaking_limits(alpha, sched, r, m, rng)
    inc = ntl_increments(x)
    rho = max(abs(rank_correlation(inc[:, i], inc[:, j]))
              for i, j in itertools.combinations(range(1, r), 2))
    return [_exact("max_abs_rank_corr", rho, 0.01, m)]


CRITERIA = {
    1: ("exact probabilities sum to one", criterion_1),
    2: ("db and stick-breaking laws agree", criterion_2),
    3: ("beta-gamma recursion", criterion_3),
    4: ("linear-regime degree law", criterion_4),
    5: ("sub-linear-regime degree law", criterion_5),
    6: ("mixture representations", criterion_6),
    7: ("regime dichotomy", criterion_7),
    8: ("Gibbs coefficients", criterion_8),
    9: ("martingale diagnostic", criterion_9),
    10: ("identity suite", criterion_10),
    11: ("doubling and connectivity", criterion_11),
    12: ("neutral-to-the-left increments", criterion_12),
}


def run_criterion(number: int, seed: int = DEFAULT_SEED) -> CriterionResult:
    if number not in CRITERIA:
        raise ValueError(f"no criterion {number}")
    title, fn = CRITERIA[number]
    child = np.random.SeedSequence(seed).spawn(N_CRITERIA)[number - 1]
    rng = np.random.default_rng(child)
    start = time.perf_counter()
    checks = fn(rng)
    elapsed = 1000 * (time.perf_counter() - start)
    for c in checks:
        c.seed = seed
    return CriterionResult(number, title, checks, seed, elapsed)


def run_all(seed: int = DEFAULT_SEED, which=None, echo=None) -> list:
    out = []
    for number in which or sorted(CRITERIA):
        res = run_criterion(number, seed)
        if echo is not None:
            echo(res.line())
        out.append(res)
    return out
