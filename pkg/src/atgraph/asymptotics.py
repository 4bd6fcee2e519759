"""Degree statistics, limiting degree laws and convergence diagnostics.

Two regimes are distinguished by the vertex growth ``|V(G_n)| ~ n^sigma``:
sub-linear (``sigma < 1``, limiting pmf with power-law exponent ``1 + alpha``)
and linear (``sigma = 1``, generalized Yule-Simon pmf with exponent ``1 + gamma``
where ``gamma = (mu - alpha) / (mu - 1)``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import lgamma

import numpy as np
from scipy import optimize, special
from scipy import stats as _st

from .arrivals import crp_next_gap
from .core import ArrivalSchedule, MultigraphView, as_params, multigraph_from_labels
from .errors import BadParams, InsufficientData, InsufficientTail, ZeroSum
from .samplers import draw_psi, sample_db, sample_stick_breaking

# -- empirical and limiting pmfs ----------------------------------------------


def degree_histogram(view, d_max: int):
    """Empirical degree pmf ``p_d = #{v : deg v = d} / |V|`` for ``d = 0..d_max``.

    Returns ``(pmf, tail)`` with ``tail`` the fraction of vertices of degree
    above ``d_max``.
    """
    if not isinstance(view, MultigraphView):
        view = multigraph_from_labels(view)
    deg = np.asarray(view.degrees, dtype=np.int64)
    if deg.size == 0:
        return np.zeros(d_max + 1), 0.0
    counts = np.bincount(np.minimum(deg, d_max + 1), minlength=d_max + 2)
    return counts[: d_max + 1] / deg.size, counts[d_max + 1] / deg.size


def linear_gamma(alpha, mu) -> float:
    if not mu > 1:
        raise BadParams(f"mu must exceed 1, got {mu}")
    if not alpha < 1:
        raise BadParams(f"alpha must be < 1, got {alpha}")
    return (mu - alpha) / (mu - 1)


def limit_pmf_sublinear(alpha, d_max: int) -> np.ndarray:
    """``p_d = alpha Gamma(d - alpha) / (Gamma(d + 1) Gamma(1 - alpha))``, index ``d``
    (entry 0 is zero)."""
    if not 0 < alpha < 1:
        raise BadParams(f"sub-linear regime needs alpha in (0, 1), got {alpha}")
    d = np.arange(1, d_max + 1, dtype=float)
    logp = math.log(alpha) + special.gammaln(d - alpha) - special.gammaln(d + 1) - lgamma(1 - alpha)
    return np.concatenate(([0.0], np.exp(logp)))


def sublinear_survival(alpha, d) -> float:
    """``P[D > d]`` for the sub-linear limit law (telescoping closed form)."""
    return math.exp(lgamma(d + 1 - alpha) - lgamma(d + 1) - lgamma(1 - alpha))


def limit_pmf_linear(alpha, mu, d_max: int) -> np.ndarray:
    """Generalized Yule-Simon pmf, index ``d`` (entry 0 is zero)."""
    g = linear_gamma(alpha, mu)
    d = np.arange(1, d_max + 1, dtype=float)
    logp = (math.log(g) + special.gammaln(d - alpha) + lgamma(1 - alpha + g)
            - special.gammaln(d + 1 - alpha + g) - lgamma(1 - alpha))
    return np.concatenate(([0.0], np.exp(logp)))


def linear_survival(alpha, mu, d) -> float:
    g = linear_gamma(alpha, mu)
    return math.exp(lgamma(d + 1 - alpha) + lgamma(1 - alpha + g)
                    - lgamma(d + 1 - alpha + g) - lgamma(1 - alpha))


def limit_pmf(regime, alpha, d_max, mu=None) -> np.ndarray:
    if regime == "sublinear":
        return limit_pmf_sublinear(alpha, d_max)
    if regime == "linear":
        if mu is None:
            raise BadParams("linear regime needs mu")
        return limit_pmf_linear(alpha, mu, d_max)
    raise BadParams(f"unknown regime {regime!r}")


# -- mixture samplers for the limiting degree ---------------------------------


def _mixing_shape(regime, alpha, mu):
    if regime == "sublinear":
        if not 0 < alpha < 1:
            raise BadParams(f"sub-linear regime needs alpha in (0, 1), got {alpha}")
        return alpha
    if regime == "linear":
        if mu is None:
            raise BadParams("linear regime needs mu")
        return linear_gamma(alpha, mu)
    raise BadParams(f"unknown regime {regime!r}")


def sample_limit_degree_geom(regime, alpha, size, rng, mu=None) -> np.ndarray:
    """``D' ~ Geom(B)`` on ``{1, 2, ...}`` with ``B ~ Beta(a, 1 - alpha)``,
    ``a = alpha`` (sub-linear) or ``gamma`` (linear).  Support starting at 1
    is what makes ``P[D' = 1]`` equal the closed-form ``p_1``."""
    a = _mixing_shape(regime, alpha, mu)
    b = rng.beta(a, 1.0 - alpha, size=size)
    return rng.geometric(np.maximum(b, np.finfo(float).tiny)).astype(np.int64)


def sample_limit_degree_poisson(regime, alpha, size, rng, mu=None, variant="beta") -> np.ndarray:
    """``D' = 1 + Poisson(R G_{1-alpha})`` with ``R = (1 - B) / B``, ``B ~ Beta(a, 1)``.

    ``variant="beta_prime"`` draws ``R = G_1 / G_a`` instead (same law).  The
    leading 1 aligns the support with ``sample_limit_degree_geom``.
    """
    a = _mixing_shape(regime, alpha, mu)
    if variant == "beta":
        b = rng.beta(a, 1.0, size=size)
        ratio = (1.0 - b) / np.maximum(b, np.finfo(float).tiny)
    elif variant == "beta_prime":
        ratio = rng.gamma(1.0, size=size) / np.maximum(rng.gamma(a, size=size), np.finfo(float).tiny)
    else:
        raise BadParams(f"unknown variant {variant!r}")
    lam = ratio * rng.gamma(1.0 - alpha, size=size)
    # Poisson rates beyond ~1e18 overflow numpy; such draws are astronomically rare
    return 1 + rng.poisson(np.minimum(lam, 1e18)).astype(np.int64)


# -- trajectories -------------------------------------------------------------


def log_checkpoints(n_max: int, n_min: int = 1) -> list:
    """``1, 2, 5, 10, 20, 50, ...`` up to ``n_max`` (always including ``n_max``)."""
    out = []
    base = 1
    while base <= n_max:
        for m in (1, 2, 5):
            if n_min <= m * base <= n_max:
                out.append(m * base)
        base *= 10
    if not out or out[-1] != n_max:
        out.append(n_max)
    return out


@dataclass
class Checkpoint:
    n: int
    num_vertices: int
    degrees: tuple
    histogram: np.ndarray


@dataclass
class TrajectoryStats:
    checkpoints: list
    alpha: float
    regime: str = "unknown"
    gamma: float | None = None
    sigma: float | None = None
    details: dict = field(default_factory=dict)

    @property
    def ns(self) -> np.ndarray:
        return np.array([c.n for c in self.checkpoints])

    @property
    def vertex_counts(self) -> np.ndarray:
        return np.array([c.num_vertices for c in self.checkpoints])

    def degree_matrix(self, r: int) -> np.ndarray:
        """Rows are checkpoints, columns vertices ``1..r`` (0 before arrival)."""
        out = np.zeros((len(self.checkpoints), r))
        for i, c in enumerate(self.checkpoints):
            d = c.degrees[:r]
            out[i, : len(d)] = d
        return out


def trajectory_from_labels(labels, alpha, r=5, d_max=50, checkpoints=None) -> TrajectoryStats:
    labels = np.asarray(labels.labels if hasattr(labels, "labels") else labels, dtype=np.int64)
    n_max = labels.size
    cps = checkpoints or log_checkpoints(n_max)
    out = []
    for n in cps:
        deg = np.bincount(labels[:n])[1:]
        hist = np.bincount(np.minimum(deg, d_max + 1), minlength=d_max + 2)[: d_max + 1]
        out.append(Checkpoint(int(n), int(deg.size), tuple(int(x) for x in deg[:r]), hist))
    return TrajectoryStats(out, float(alpha))


def simulate_trajectory(params, schedule: ArrivalSchedule, n_ends: int, rng, r=5, d_max=50,
                        method="db", mu=None) -> TrajectoryStats:
    """Run one sampler and summarize it at log-spaced checkpoints."""
    alpha = as_params(params).alpha
    if method == "db":
        res = sample_db(params, schedule, n_ends, rng)
    elif method == "stick":
        res = sample_stick_breaking(params, schedule, n_ends, rng)
    else:
        raise BadParams(f"unknown method {method!r}")
    traj = trajectory_from_labels(res.labels, alpha, r=r, d_max=d_max)
    if mu is not None:
        traj.regime = "linear"
        traj.gamma = linear_gamma(alpha, mu)
    return traj


# -- vectorized tracked-degree chain ------------------------------------------


def crp_gap_fn(alpha, theta):
    """Gap generator for CRP(alpha, theta) arrivals, for ``simulate_tracked``."""
    def gap(t_k, k, rng, size):
        return np.atleast_1d(crp_next_gap(alpha, theta, t_k, k, rng, size=size))
    return gap


def geometric_gap_fn(beta):
    """Gap generator for i.i.d. Geom(beta) interarrivals on {1, 2, ...}."""
    def gap(t_k, k, rng, size):
        return rng.geometric(beta, size=size).astype(np.int64)
    return gap


def simulate_tracked(alpha, r, checkpoints, runs, rng, schedule=None, gap_fn=None,
                     first_times=(), init_degrees=None, init_n=None, init_k=None):
    """Degrees of the first ``r`` vertices across ``runs`` independent runs.

    Given the arrival times, ``(D_1, ..., D_r, rest)`` evolves as a Markov
    chain, so only ``r + 1`` counts per run are stored.  Arrivals come from a
    shared ``schedule`` or from ``gap_fn(t_k, k, rng, size)`` drawn
    independently per run, after the forced ``first_times``.
    ``init_degrees`` / ``init_n`` / ``init_k`` start the chain from a seed
    state (tracked degrees, ends so far, vertices so far) instead of one end.

    Returns ``(degrees, ks)`` with shapes ``(runs, C, r)`` and ``(runs, C)``.
    """
    checkpoints = sorted(int(c) for c in checkpoints)
    n_max = checkpoints[-1]
    never = np.iinfo(np.int64).max
    D = np.zeros((runs, r))
    if init_degrees is None:
        n0, k = 1, np.ones(runs, dtype=np.int64)
        D[:, 0] = 1.0
    else:
        init = np.asarray(init_degrees, dtype=float)
        D[:, : init.size] = init
        n0 = int(init_n)
        k = np.full(runs, int(init_k), dtype=np.int64)
    forced = [int(t) for t in first_times]
    if schedule is not None:
        times = np.asarray(schedule.times, dtype=np.int64)
        nxt_idx = k.copy()  # index into times of the next arrival
        next_t = np.where(nxt_idx < times.size, times[np.minimum(nxt_idx, times.size - 1)], never)
    elif gap_fn is not None:
        if int(k[0]) < len(forced):
            next_t = np.full(runs, forced[int(k[0])], dtype=np.int64)
        else:
            next_t = n0 + gap_fn(n0, int(k[0]), rng, runs)
    else:
        raise BadParams("need a schedule or a gap generator")

    out_d = np.empty((runs, len(checkpoints), r))
    out_k = np.empty((runs, len(checkpoints)), dtype=np.int64)
    ci = 0
    while ci < len(checkpoints) and checkpoints[ci] <= n0:
        out_d[:, ci], out_k[:, ci] = D, k
        ci += 1
    cols = np.arange(r)
    W = np.where(cols < k[:, None], D - alpha, 0.0)  # attachment weights of tracked vertices
    chunk = 4096
    u_buf = rng.random((chunk, runs))
    pos = 0
    for n in range(n0 + 1, n_max + 1):
        if pos == chunk:
            u_buf = rng.random((chunk, runs))
            pos = 0
        u = u_buf[pos]
        pos += 1
        arrive = next_t == n
        if arrive.any():
            idx = np.flatnonzero(arrive)
            k[idx] += 1
            new = k[idx] <= r
            D[idx[new], k[idx[new]] - 1] = 1.0
            W[idx[new], k[idx[new]] - 1] = 1.0 - alpha
            if schedule is not None:
                nxt_idx[idx] += 1
                ok = nxt_idx[idx] < times.size
                next_t[idx] = np.where(ok, times[np.minimum(nxt_idx[idx], times.size - 1)], never)
            else:
                kk = k[idx]
                nxt = n + gap_fn(n, kk, rng, idx.size)
                if forced:
                    fx = np.array([forced[x] if x < len(forced) else 0 for x in kk], dtype=np.int64)
                    nxt = np.where(fx > 0, fx, nxt)
                next_t[idx] = nxt
        # non-arrival runs choose among tracked vertices or the rest
        target = u * ((n - 1) - alpha * k)
        j = (np.cumsum(W, axis=1) <= target[:, None]).sum(axis=1)
        hit = np.flatnonzero(~arrive & (j < r))
        jh = j[hit]
        D[hit, jh] += 1.0
        W[hit, jh] += 1.0
        while ci < len(checkpoints) and checkpoints[ci] == n:
            out_d[:, ci], out_k[:, ci] = D, k
            ci += 1
    return out_d, out_k


# -- scaled degrees and martingale --------------------------------------------


def scaled_degrees(degrees, ns, gamma=1.0):
    """``n^{-1/gamma} deg_j(n)``; ``degrees`` has checkpoints on axis -2
    (optionally runs on axis 0).  Use ``gamma=1`` in the sub-linear regime."""
    degrees = np.asarray(degrees, dtype=float)
    ns = np.asarray(ns, dtype=float)
    return degrees * ns[:, None] ** (-1.0 / gamma)


def relative_drift(scaled, ns, decade=10.0) -> np.ndarray:
    """``|value(n_last) / value(n_last / decade) - 1|`` per column, averaging
    over runs first when ``scaled`` is three-dimensional."""
    scaled = np.asarray(scaled, dtype=float)
    if scaled.ndim == 3:
        scaled = scaled.mean(axis=0)
    ns = np.asarray(ns)
    i_last = ns.size - 1
    target = ns[-1] / decade
    i_ref = int(np.argmin(np.abs(ns - target)))
    if i_ref == i_last:
        raise InsufficientData("need checkpoints spanning a decade")
    return np.abs(scaled[i_last] / scaled[i_ref] - 1.0)


def _t_product_terms(alpha, times, r, pbar):
    """Cumulative ``sum_{k'=r+1}^{K}`` of the schedule factor, indexed by ``K``."""
    times = np.asarray(times, dtype=float)
    kk = np.arange(1, times.size + 1, dtype=float)
    term = np.zeros(times.size)
    a = times[r:] - 1 - (kk[r:] - 1) * alpha
    b = times[r:] - kk[r:] * alpha
    term[r:] = special.gammaln(a) + special.gammaln(b + pbar) - special.gammaln(a + pbar) - special.gammaln(b)
    return np.concatenate(([0.0], np.cumsum(term)))


def martingale_log_z(p, alpha, schedule: ArrivalSchedule, n, degrees, k):
    """``log Z_n(p, t)`` for arrays of tracked degrees (last axis ``r``) and
    vertex counts ``k`` at end index ``n >= T_r``."""
    p = np.asarray(p, dtype=float)
    r = p.size
    if np.any(p <= -(1 - alpha)):
        raise BadParams("each p_j must exceed -(1 - alpha)")
    if schedule.time(r) > n:
        raise BadParams(f"need n >= T_r = {schedule.time(r)}")
    pbar = float(p.sum())
    D = np.asarray(degrees, dtype=float)[..., :r]
    k = np.asarray(k)
    cum = _t_product_terms(alpha, schedule.times, r, pbar)
    base = n - k * alpha
    out = special.gammaln(base) - special.gammaln(base + pbar)
    out = out + (special.gammaln(D - alpha + p) - special.gammaln(D - alpha)).sum(axis=-1)
    return out + cum[k]


def martingale_statistic(p, alpha, schedule: ArrivalSchedule, degrees, ks, ns) -> np.ndarray:
    """``Z_n(p, t)`` at each checkpoint; shapes follow ``simulate_tracked``."""
    degrees = np.asarray(degrees, dtype=float)
    out = np.empty(degrees.shape[:-1])
    for i, n in enumerate(ns):
        out[..., i] = np.exp(martingale_log_z(p, alpha, schedule, n, degrees[..., i, :], ks[..., i]))
    return out


def martingale_expectation(p, alpha, schedule: ArrivalSchedule) -> float:
    """``E[Z_{T_r}] = prod_{j=2}^r E[Psi_j^{p_j} (1 - Psi_j)^{pbar_{j-1}}]``."""
    p = np.asarray(p, dtype=float)
    a = 1.0 - alpha
    out = 0.0
    pbar = np.cumsum(p)
    for j in range(2, p.size + 1):
        b = schedule.time(j) - 1 - (j - 1) * alpha
        x, y = p[j - 1], pbar[j - 2]
        out += (lgamma(a + x) + lgamma(b + y) + lgamma(a + b)
                - lgamma(a) - lgamma(b) - lgamma(a + b + x + y))
    return math.exp(out)


def flatness(means, i1, i2) -> float:
    return abs(means[i2] / means[i1] - 1.0)


# -- NTL ----------------------------------------------------------------------


def ntl_increments(x) -> np.ndarray:
    """``X_j / sum_{i <= j} X_i`` along the last axis."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ZeroSum("empty input")
    cs = np.cumsum(x, axis=-1)
    if np.any(cs <= 0):
        raise ZeroSum("partial sums must be positive")
    return x / cs


def stick_breaking_limits(params, schedule, r, size, rng) -> np.ndarray:
    """``(Psi_j prod_{i=j+1}^r (1 - Psi_i))_{j <= r}``, one row per draw."""
    psi, log1m = draw_psi(params, schedule, r, rng, size=size)
    tail = np.concatenate((np.cumsum(log1m[:, :0:-1], axis=1)[:, ::-1], np.zeros((size, 1))), axis=1)
    return psi * np.exp(tail)


# -- density and tail exponents -----------------------------------------------


@dataclass
class DensityFit:
    sigma: float
    mu: float | None
    epsilon: float | None
    in_regime: bool
    n_points: int


def density_exponent(ns, vertex_counts, min_decades=2.0) -> DensityFit:
    """Least squares fit of ``log |V|`` on ``log n``; ``|V| ~ mu^{-sigma} n^sigma``."""
    ns = np.asarray(ns, dtype=float)
    vc = np.asarray(vertex_counts, dtype=float)
    keep = (ns > 0) & (vc > 0)
    ns, vc = ns[keep], vc[keep]
    if ns.size < 3 or math.log10(ns.max() / ns.min()) < min_decades:
        raise InsufficientData(f"need >= {min_decades} decades of checkpoints")
    slope, intercept = np.polyfit(np.log(ns), np.log(vc), 1)
    if slope <= 1e-3:
        return DensityFit(float(slope), None, None, False, ns.size)
    return DensityFit(float(slope), float(math.exp(-intercept / slope)), float(1.0 / slope), True, ns.size)


def density_from_trajectory(traj: TrajectoryStats, skip_below=100) -> DensityFit:
    ns, vc = traj.ns, traj.vertex_counts
    keep = ns >= skip_below
    return density_exponent(ns[keep], vc[keep])


@dataclass
class TailFit:
    eta: float
    d_min: int
    n_tail: int
    log_likelihood_ratio: float
    lr_p_value: float
    power_law: bool


def choose_d_min(values, weights, tail_mass=0.01) -> int:
    """Largest ``d`` with empirical ``P[D >= d] >= tail_mass``."""
    order = np.argsort(values)
    v, w = values[order], weights[order]
    surv = np.cumsum(w[::-1])[::-1] / w.sum()
    ok = surv >= tail_mass
    return int(v[ok].max())


def tail_exponent(data, d_min=None, tail_mass=0.01, min_tail=100, pmf_mass=None) -> TailFit:
    """Discrete power-law MLE ``P[D = d] = d^-eta / zeta(eta, d_min)`` over ``d >= d_min``.

    ``data`` is a degree sample, or with ``pmf_mass=m`` a pmf indexed by ``d``
    treated as ``m`` weighted observations.  A normalized log-likelihood
    ratio against a shifted geometric tail flags exponential tails.
    """
    data = np.asarray(data, dtype=float)
    if pmf_mass is None:
        vals, w = np.unique(data[data >= 1].astype(np.int64), return_counts=True)
        w = w.astype(float)
    else:
        vals = np.flatnonzero(data > 0)
        vals = vals[vals >= 1]
        w = data[vals] * pmf_mass
    if vals.size == 0:
        raise InsufficientTail("no positive degrees")
    vals = vals.astype(float)
    if d_min is None:
        d_min = choose_d_min(vals, w, tail_mass)
    sel = vals >= d_min
    x, wx = vals[sel], w[sel]
    m = wx.sum()
    if m < min_tail or np.unique(x).size < 2:
        raise InsufficientTail(f"only {m:g} observations at or above d_min = {d_min}")
    slog = float((wx * np.log(x)).sum())

    def nll(eta):
        return eta * slog + m * math.log(special.zeta(eta, d_min))

    res = optimize.minimize_scalar(nll, bounds=(1.0001, 20.0), method="bounded",
                                   options={"xatol": 1e-8})
    eta = float(res.x)
    # per-observation log-likelihoods for the ratio test
    ll_pl = -eta * np.log(x) - math.log(special.zeta(eta, d_min))
    excess = x - d_min
    q = 1.0 / (1.0 + float((wx * excess).sum()) / m)
    ll_geo = np.log(q) + excess * math.log1p(-q) if q < 1 else np.where(excess == 0, 0.0, -np.inf)
    diff = ll_pl - ll_geo
    llr = float((wx * diff).sum())
    var = float((wx * (diff - llr / m) ** 2).sum() / m)
    if var > 0:
        z = llr / math.sqrt(m * var)
        p = float(2 * _st.norm.sf(abs(z)))
    else:
        p = 0.0 if llr != 0 else 1.0
    power_law = not (llr < 0 and p < 0.1)
    return TailFit(eta, int(d_min), int(round(m)), llr, p, power_law)


# -- tail products W_{1,k} ----------------------------------------------------


def crp_arrivals_many(alpha, theta, k_max, runs, rng) -> np.ndarray:
    """First ``k_max`` CRP record indices for ``runs`` independent runs."""
    out = np.empty((runs, k_max), dtype=np.int64)
    out[:, 0] = 1
    t = np.ones(runs, dtype=np.int64)
    for k in range(1, k_max):
        t = t + crp_next_gap(alpha, theta, t, k, rng, size=runs)
        out[:, k] = t
    return out


def w1k_samples(alpha, times, rng) -> np.ndarray:
    """``W_{1,k} = prod_{l=2}^k (1 - Psi_l)`` for each row of arrival times."""
    times = np.atleast_2d(np.asarray(times, dtype=float))
    k = times.shape[1]
    j = np.arange(2, k + 1, dtype=float)
    b = times[:, 1:] - 1 - (j - 1) * alpha
    if np.any(b <= 0):
        raise BadParams("beta parameter t_j - 1 - (j-1) alpha must be positive")
    q = rng.beta(b, 1.0 - alpha)
    with np.errstate(divide="ignore"):
        return np.exp(np.log(q).sum(axis=1))


# -- connectivity -------------------------------------------------------------


def prefix_connected(labels) -> bool:
    """True when every complete-edge prefix graph is connected.

    Vertices with no complete edge yet (a trailing dangling end) are ignored.
    """
    ls = labels.labels if hasattr(labels, "labels") else tuple(labels)
    parent: list[int] = []

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    components = 0
    for i in range(0, len(ls) - 1, 2):
        for v in (ls[i], ls[i + 1]):
            while len(parent) < v:
                parent.append(len(parent))
                components += 1
        a, b = find(ls[i] - 1), find(ls[i + 1] - 1)
        if a != b:
            parent[a] = b
            components -= 1
        if components != 1:
            return False
    return True
