"""Exact finite-dimensional probabilities, all in the log domain.

For ``n`` ends, ``k`` vertices with arrival times ``T_j`` and label counts ``c_j``::

    log P = -lgamma(n - k a)
            + sum_j [ lgamma(T_j - j a) + lgamma(c_j - a)
                      - lgamma(T_j - 1 - (j-1) a + [j == 1]) - lgamma(1 - a) ]
"""

from __future__ import annotations

import itertools
import math
from math import lgamma

import numpy as np

from .core import ArrivalSchedule, LabelSequence, as_params, multigraph_from_labels
from .errors import BadParams, CapExceeded, Inconsistent

ENUMERATION_CAP = 12


def _log_v(n, k, alpha, arrivals):
    """log of ``V^{alpha,T}_{n,k}``; requires ``len(arrivals) >= k``."""
    out = -lgamma(n - k * alpha)
    for j in range(1, k + 1):
        t = arrivals[j - 1]
        out += lgamma(t - j * alpha) - lgamma(t - 1 - (j - 1) * alpha + (1 if j == 1 else 0))
    return out


def _check_arrivals(n, arrivals, k):
    if len(arrivals) != k or k < 1:
        raise Inconsistent(f"need exactly {k} arrival times, got {len(arrivals)}")
    if arrivals[0] != 1 or any(b <= a for a, b in zip(arrivals, arrivals[1:])):
        raise Inconsistent("arrival times must start at 1 and increase strictly")
    if arrivals[-1] > n:
        raise Inconsistent(f"T_k = {arrivals[-1]} exceeds n = {n}")


def log_prob_labels(params, schedule: ArrivalSchedule, labels) -> float:
    """Log-probability of an end sequence under the graph law for fixed ``t``.

    Returns ``-inf`` when the labels contradict the schedule (a vertex arriving
    at the wrong time, or a scheduled arrival that did not happen).
    """
    alpha = as_params(params).alpha
    view = multigraph_from_labels(labels)
    n, k = view.num_edge_ends, view.num_vertices
    if view.arrival_times != schedule.times[:k] or schedule.vertices_at(n) != k:
        return -math.inf
    out = -lgamma(n - k * alpha)
    lg1 = lgamma(1 - alpha)
    for j, (t, c) in enumerate(zip(view.arrival_times, view.degrees), start=1):
        out += (lgamma(t - j * alpha) + lgamma(c - alpha)
                - lgamma(t - 1 - (j - 1) * alpha + (1 if j == 1 else 0)) - lg1)
    return out


def log_prob_sequential(params, schedule: ArrivalSchedule, labels) -> float:
    """Same quantity as ``log_prob_labels``, accumulated step by step.

    Kept as an independent check on the closed form.
    """
    alpha = as_params(params).alpha
    labels = LabelSequence(tuple(labels)).labels
    counts: list[int] = []
    out = 0.0
    for n, lab in enumerate(labels, start=1):
        k = len(counts)
        arrival = schedule.time(k + 1) == n
        if arrival:
            if lab != k + 1:
                return -math.inf
            counts.append(1)
            continue
        if lab > k:
            return -math.inf
        out += math.log((counts[lab - 1] - alpha) / ((n - 1) - alpha * k))
        counts[lab - 1] += 1
    return out


def enumerate_sequences(schedule: ArrivalSchedule, n: int, cap: int = ENUMERATION_CAP):
    """All label sequences of length ``n`` consistent with ``schedule``."""
    if n > cap:
        raise CapExceeded(f"n = {n} exceeds enumeration cap {cap}")
    choices = []
    k = 0
    for m in range(1, n + 1):
        if schedule.time(k + 1) == m:
            k += 1
            choices.append((k,))
        else:
            choices.append(tuple(range(1, k + 1)))
    return [tuple(x) for x in itertools.product(*choices)]


def log_prob_partition(params, arrival_times, block_sizes) -> float:
    """Conditional probability of a partition with the given block sizes,
    blocks ordered by least element, given the record indices."""
    alpha = as_params(params).alpha
    sizes = [int(s) for s in block_sizes]
    arrivals = [int(t) for t in arrival_times]
    k = len(sizes)
    n = sum(sizes)
    _check_arrivals(n, arrivals, k)
    for j, (t, s) in enumerate(zip(arrivals, sizes), start=1):
        if s < 1 or s > n - t + 1:
            raise Inconsistent(f"block {j} of size {s} cannot start at {t} with n = {n}")
    lg1 = lgamma(1 - alpha)
    return _log_v(n, k, alpha, arrivals) + sum(lgamma(s - alpha) - lg1 for s in sizes)


def log_v_alpha_t(n, k, params, arrival_times) -> float:
    alpha = as_params(params).alpha
    arrivals = [int(t) for t in arrival_times][:k]
    _check_arrivals(n, arrivals, k)
    return _log_v(n, k, alpha, arrivals)


def v_alpha_t(n, k, params, arrival_times) -> float:
    """Conditional Gibbs coefficient ``V^{alpha,T}_{n,k}``."""
    return math.exp(log_v_alpha_t(n, k, params, arrival_times))


def crp_arrival_log_pmf(alpha, theta, t_k, k, t) -> float:
    """``log P[T_{k+1} = T_k + t | T_k]`` for CRP(alpha, theta) arrivals."""
    if not 0 <= alpha < 1 or not theta > -alpha:
        raise BadParams(f"invalid CRP parameters alpha={alpha}, theta={theta}")
    if t < 1 or k < 1 or t_k < k:
        raise BadParams("need t >= 1, k >= 1 and T_k >= k")
    head = theta + alpha * k
    if head <= 0:
        return -math.inf
    return (math.log(head) + lgamma(theta + t_k) + lgamma(t_k + t - 1 - alpha * k)
            - lgamma(theta + t_k + t) - lgamma(t_k - alpha * k))


def crp_no_arrival_log_prob(alpha, theta, t_k, k, n) -> float:
    """``log P[T_{k+1} > n | T_k]``."""
    if n < t_k:
        raise BadParams("n must be >= T_k")
    if theta + alpha * k <= 0:
        return 0.0
    return (lgamma(n - alpha * k) + lgamma(theta + t_k)
            - lgamma(t_k - alpha * k) - lgamma(theta + n))


def crp_records_log_prob(alpha, theta, arrival_times, n) -> float:
    """Probability that the record indices inside ``{1..n}`` are exactly
    ``arrival_times`` under CRP(alpha, theta) arrivals."""
    arrivals = [int(t) for t in arrival_times]
    _check_arrivals(n, arrivals, len(arrivals))
    out = 0.0
    for i in range(1, len(arrivals)):
        out += crp_arrival_log_pmf(alpha, theta, arrivals[i - 1], i, arrivals[i] - arrivals[i - 1])
    return out + crp_no_arrival_log_prob(alpha, theta, arrivals[-1], len(arrivals), n)


def _arrival_vectors(n, k):
    for rest in itertools.combinations(range(2, n + 1), k - 1):
        yield (1,) + rest


def gibbs_v_marginal(n, k, params, theta, cap: int = ENUMERATION_CAP, tol: float = 1e-9) -> float:
    """``V_{n,k}`` for CRP(alpha, theta) arrivals by exact enumeration.

    For every arrival vector ``T`` with ``T_k <= n`` the product
    ``P[records in {1..n} = T] * V^{alpha,T}_{n,k}`` must equal the same
    ``V_{n,k}``; all terms are computed, checked against each other and
    averaged.  (A plain sum over ``T`` would overcount by ``C(n-1, k-1)``.)
    """
    alpha = as_params(params).alpha
    if n > cap:
        raise CapExceeded(f"n = {n} exceeds enumeration cap {cap}")
    if not 1 <= k <= n:
        raise BadParams("need 1 <= k <= n")
    terms = np.array([crp_records_log_prob(alpha, theta, T, n) + _log_v(n, k, alpha, T)
                      for T in _arrival_vectors(n, k)])
    if terms.max() - terms.min() > tol:
        raise Inconsistent(f"V_{{{n},{k}}} depends on the arrival vector (spread {terms.max() - terms.min():.3g})")
    return math.exp(_logsumexp(terms.tolist()) - math.log(terms.size))


def crp_v(n, k, alpha, theta) -> float:
    """Closed-form CRP coefficient ``prod_{i<k}(theta + i alpha) / (theta + 1)_{n-1}``."""
    out = 0.0
    for i in range(1, k):
        out += math.log(theta + i * alpha)
    out -= lgamma(theta + n) - lgamma(theta + 1)
    return math.exp(out)


def eppf(block_sizes, params, v_nk) -> float:
    alpha = as_params(params).alpha
    lg1 = lgamma(1 - alpha)
    return v_nk * math.exp(sum(lgamma(s - alpha) - lg1 for s in block_sizes))


def crp_marginal_log_prob(alpha, theta, labels) -> float:
    """Unconditional log-probability of a block-label sequence when the arrival
    times are CRP(alpha, theta): records term plus the conditional term."""
    view = multigraph_from_labels(labels)
    return (crp_records_log_prob(alpha, theta, view.arrival_times, view.num_edge_ends)
            + log_prob_partition(alpha, view.arrival_times, view.degrees))


def _logsumexp(xs):
    xs = [x for x in xs if x != -math.inf]
    if not xs:
        return -math.inf
    m = max(xs)
    return m + math.log(math.fsum(math.exp(x - m) for x in xs))


def log_prob_many(params, schedule, sequences) -> np.ndarray:
    return np.array([log_prob_labels(params, schedule, s) for s in sequences])
