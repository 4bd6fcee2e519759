"""Three constructions of the same random graph law.

``sample_db`` grows the graph one edge end at a time, choosing an existing
vertex with probability proportional to ``deg - alpha``.  ``sample_stick_breaking``
draws independent beta weights first and then assigns ends by dropping
uniforms into the induced interval partition of [0, 1).  ``sample_psi_recursion``
produces the beta weights from ratios of gamma variables instead.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import ArrivalSchedule, LabelSequence, StickWeights, as_params, check_labels
from .errors import BadParams, Inconsistent

SCAN_THRESHOLD = 64


class FenwickTree:
    """Prefix sums over float weights at 1-based positions."""

    def __init__(self, size: int):
        if size < 1:
            raise ValueError("size must be >= 1")
        self.size = size
        self.tree = [0.0] * (size + 1)
        self._top = 1 << (size.bit_length() - 1)

    @classmethod
    def from_weights(cls, weights):
        tree = cls(max(1, len(weights)))
        t = tree.tree
        for i, w in enumerate(weights, start=1):
            t[i] += w
            j = i + (i & -i)
            if j <= tree.size:
                t[j] += t[i]
        return tree

    def add(self, i: int, delta: float) -> None:
        t, n = self.tree, self.size
        while i <= n:
            t[i] += delta
            i += i & -i

    def prefix(self, i: int) -> float:
        t, s = self.tree, 0.0
        while i > 0:
            s += t[i]
            i -= i & -i
        return s

    def search(self, target: float) -> int:
        """Smallest index whose prefix sum exceeds ``target``."""
        t, n = self.tree, self.size
        pos, step = 0, self._top
        while step:
            nxt = pos + step
            if nxt <= n and t[nxt] <= target:
                pos = nxt
                target -= t[nxt]
            step >>= 1
        return pos + 1


@dataclass(frozen=True)
class SamplerOutput:
    labels: LabelSequence
    schedule: ArrivalSchedule
    psi: Optional[StickWeights] = None


def _check_run(schedule, n_ends, seed_labels):
    if n_ends < 1:
        raise BadParams("n_ends must be >= 1")
    if not isinstance(schedule, ArrivalSchedule):
        raise BadParams("schedule must be an ArrivalSchedule")
    if seed_labels:
        check_labels(seed_labels)
        seen = {}
        for i, lab in enumerate(seed_labels, start=1):
            seen.setdefault(lab, i)
        seed_arrivals = tuple(seen[k] for k in range(1, len(seen) + 1))
        m = len(seed_labels)
        if schedule.times[: schedule.vertices_at(m)] != seed_arrivals:
            raise Inconsistent("seed labels contradict the arrival schedule")


def sample_db(params, schedule: ArrivalSchedule, n_ends: int, rng,
              seed_labels=(), scan_threshold: int = SCAN_THRESHOLD) -> SamplerOutput:
    """Degree-biased sequential sampler.

    End ``n`` opens vertex ``k`` when ``n == t_k``; otherwise it picks vertex
    ``j`` with probability ``(deg_j - alpha) / (n - 1 - alpha * k)``.  An
    optional ``seed_labels`` prefix is copied verbatim (used for seeded urns).
    Past the last finite arrival no new vertices appear.
    """
    alpha = as_params(params).alpha
    seed_labels = tuple(seed_labels)
    _check_run(schedule, n_ends, seed_labels)
    times = schedule.times
    n_vertices = max(schedule.vertices_at(n_ends), max(seed_labels, default=0))

    labels: list[int] = []
    degrees: list[int] = []
    for lab in seed_labels[:n_ends]:
        if lab > len(degrees):
            degrees.append(0)
        degrees[lab - 1] += 1
        labels.append(lab)

    k = len(degrees)
    nxt = k  # index into times of the next arrival
    fen = None
    if k > scan_threshold:
        fen = FenwickTree(n_vertices)
        for j, d in enumerate(degrees, start=1):
            fen.add(j, d - alpha)

    u = rng.random(n_ends)
    n_times = len(times)
    for n in range(len(labels) + 1, n_ends + 1):
        if nxt < n_times and times[nxt] == n:
            nxt += 1
            k += 1
            degrees.append(1)
            labels.append(k)
            if fen is not None:
                fen.add(k, 1.0 - alpha)
            elif k > scan_threshold:
                fen = FenwickTree(n_vertices)
                for j, d in enumerate(degrees, start=1):
                    fen.add(j, d - alpha)
            continue
        target = u[n - 1] * ((n - 1) - alpha * k)
        if fen is None:
            j = 0
            acc = degrees[0] - alpha
            while acc <= target and j < k - 1:
                j += 1
                acc += degrees[j] - alpha
            j += 1
        else:
            j = fen.search(target)
            if j > k:
                j = k
            fen.add(j, 1.0)
        degrees[j - 1] += 1
        labels.append(j)

    return SamplerOutput(LabelSequence(tuple(labels)), schedule)


def _beta_params(alpha, times, k):
    """Second beta parameters ``t_j - 1 - (j-1) alpha`` for ``j = 2..k``."""
    b = np.array([times[j - 1] - 1 - (j - 1) * alpha for j in range(2, k + 1)], dtype=float)
    bad = np.flatnonzero(b <= 0)
    if bad.size:
        j = int(bad[0]) + 2
        raise BadParams(f"beta parameter t_j - 1 - (j-1)alpha <= 0 at j={j}")
    return b


def draw_psi(params, schedule: ArrivalSchedule, k: int, rng, size=None):
    """``Psi_j ~ Beta(1 - alpha, t_j - 1 - (j-1) alpha)`` for ``j = 2..k``.

    Returns ``(psi, log1m)`` where ``log1m = log(1 - psi)`` is computed from a
    direct draw of ``1 - psi`` so it stays accurate when ``psi`` is tiny.
    Column ``j-1`` is vertex ``j``; column 0 is vertex 1 (``psi = 1``).
    """
    alpha = as_params(params).alpha
    if k > len(schedule):
        raise BadParams(f"schedule has only {len(schedule)} finite arrivals, need {k}")
    b = _beta_params(alpha, schedule.times, k)
    shape = (k - 1,) if size is None else (size, k - 1)
    q = rng.beta(b, 1.0 - alpha, size=shape)
    psi_tail = 1.0 - q
    with np.errstate(divide="ignore"):
        log1m_tail = np.maximum(np.log(q), np.log(np.finfo(float).tiny))
    ones = np.ones(shape[:-1] + (1,))
    psi = np.concatenate((ones, psi_tail), axis=-1)
    log1m = np.concatenate((np.full_like(ones, -np.inf), log1m_tail), axis=-1)
    return psi, log1m


def sample_stick_breaking(params, schedule: ArrivalSchedule, n_ends: int, rng) -> SamplerOutput:
    """Stick-breaking sampler.

    Non-arrival end ``n`` with ``k`` vertices present takes label ``j`` when
    ``U_n`` falls in ``[W_{j-1,k}, W_{j,k})``, located by binary search on the
    cumulative ``-log(1 - Psi)`` sums.  Uniforms are drawn only at non-arrival
    steps.
    """
    params = as_params(params)
    _check_run(schedule, n_ends, ())
    times = schedule.times
    k_total = schedule.vertices_at(n_ends)
    psi, log1m = draw_psi(params, schedule, k_total, rng)

    # c[j-1] = sum_{l=2}^{j} -log(1 - psi_l); W_{j,k} = exp(c_j - c_k)
    c = [0.0]
    for x in log1m[1:]:
        c.append(c[-1] - float(x))

    labels = []
    k = 0
    nxt = 0
    n_times = len(times)
    u = rng.random(n_ends)
    draws = 0
    log = math.log
    for n in range(1, n_ends + 1):
        if nxt < n_times and times[nxt] == n:
            nxt += 1
            k += 1
            labels.append(k)
            continue
        un = u[draws]
        draws += 1
        target = c[k - 1] + (log(un) if un > 0.0 else -math.inf)
        labels.append(bisect_right(c, target, 0, k) + 1)

    return SamplerOutput(LabelSequence(tuple(labels)), schedule, StickWeights(psi))


def sample_psi_recursion(params, interarrivals, rng, size=None) -> np.ndarray:
    """``Psi'_j = G^(j) / (sum_{i<=j} G^(i) + sum_{i<j} G_{Delta_{i+1}-1})``.

    ``G^(i) ~ Gamma(1 - alpha)`` and ``G_{Delta-1} ~ Gamma(Delta - 1)`` (zero
    when ``Delta == 1``), all independent.  Returns columns ``j = 1..k`` where
    ``k = len(interarrivals) + 1``.
    """
    alpha = as_params(params).alpha
    deltas = np.asarray(list(interarrivals), dtype=float)
    if np.any(deltas < 1):
        raise BadParams("interarrivals must be >= 1")
    k = deltas.size + 1
    shape = (k,) if size is None else (size, k)
    g = rng.gamma(1.0 - alpha, size=shape)
    head_shape = deltas - 1.0
    h = np.zeros(shape[:-1] + (k - 1,))
    pos = head_shape > 0
    if pos.any():
        h[..., pos] = rng.gamma(head_shape[pos], size=shape[:-1] + (int(pos.sum()),))
    denom = np.cumsum(g, axis=-1)
    denom[..., 1:] += np.cumsum(h, axis=-1)
    return g / denom
