"""Generators for vertex arrival schedules.

Interarrival conventions (the source leaves them open, so they are fixed
here and used consistently by every test):

* ``geometric(beta)`` lives on ``{1, 2, ...}`` with mean ``1/beta``.
* ``shifted_poisson(lam)`` is ``1 + Poisson(lam)``, so it is always >= 1 and
  has mean ``1 + lam``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import INF, ArrivalSchedule, validate_schedule
from .errors import BadParams, BadSchedule


@dataclass(frozen=True)
class InterarrivalSpec:
    kind: str
    param: float = 1.0
    table: tuple = field(default=())

    def __post_init__(self):
        if self.kind == "constant":
            if int(self.param) != self.param or self.param < 1:
                raise BadParams(f"constant interarrival must be an integer >= 1, got {self.param}")
        elif self.kind == "geometric":
            if not 0 < self.param <= 1:
                raise BadParams(f"geometric beta must lie in (0, 1], got {self.param}")
        elif self.kind == "shifted_poisson":
            if not self.param > 0:
                raise BadParams(f"shifted_poisson lambda must be > 0, got {self.param}")
        elif self.kind == "custom":
            values = [v for v, _ in self.table]
            probs = [p for _, p in self.table]
            if not values:
                raise BadParams("custom pmf table is empty")
            if any(int(v) != v or v < 1 for v in values):
                raise BadParams("custom pmf support must be integers >= 1")
            if any(p < 0 for p in probs) or abs(math.fsum(probs) - 1.0) > 1e-12:
                raise BadParams("custom pmf must be nonnegative and sum to 1")
        else:
            raise BadParams(f"unknown interarrival kind {self.kind!r}")

    @classmethod
    def constant(cls, c):
        return cls("constant", c)

    @classmethod
    def geometric(cls, beta):
        return cls("geometric", beta)

    @classmethod
    def shifted_poisson(cls, lam):
        return cls("shifted_poisson", lam)

    @classmethod
    def custom(cls, pmf: dict):
        return cls("custom", table=tuple(sorted((int(k), float(v)) for k, v in pmf.items())))

    @property
    def mean(self) -> float:
        if self.kind == "constant":
            return float(self.param)
        if self.kind == "geometric":
            return 1.0 / self.param
        if self.kind == "shifted_poisson":
            return 1.0 + self.param
        return math.fsum(v * p for v, p in self.table)

    def sample(self, size, rng) -> np.ndarray:
        if self.kind == "constant":
            return np.full(size, int(self.param), dtype=np.int64)
        if self.kind == "geometric":
            if self.param == 1:
                return np.ones(size, dtype=np.int64)
            return rng.geometric(self.param, size=size).astype(np.int64)
        if self.kind == "shifted_poisson":
            return 1 + rng.poisson(self.param, size=size).astype(np.int64)
        values = np.array([v for v, _ in self.table], dtype=np.int64)
        probs = np.array([p for _, p in self.table])
        return rng.choice(values, size=size, p=probs / probs.sum())


def constant_schedule(d: int, k_max: int) -> ArrivalSchedule:
    """``t_j = 2d(j-1) + 1``: one new vertex every ``2d`` ends."""
    if d < 1 or k_max < 1:
        raise BadParams("constant_schedule needs d >= 1 and k_max >= 1")
    return ArrivalSchedule(tuple(2 * d * j + 1 for j in range(k_max)), f"constant({d})")


def iid_schedule(spec: InterarrivalSpec, k_max: int, rng) -> ArrivalSchedule:
    if k_max < 1:
        raise BadParams("k_max must be >= 1")
    deltas = spec.sample(k_max - 1, rng)
    times = np.concatenate(([1], 1 + np.cumsum(deltas)))
    return ArrivalSchedule(tuple(int(t) for t in times), f"iid({spec.kind}:{_fmt(spec)})")


def _fmt(spec):
    if spec.kind == "custom":
        return ",".join(f"{v}={p}" for v, p in spec.table)
    return f"{spec.param:g}"


def _check_crp(alpha, theta):
    if not 0 <= alpha < 1:
        raise BadParams(f"CRP alpha must lie in [0, 1), got {alpha}")
    if not theta > -alpha:
        raise BadParams(f"CRP theta must exceed -alpha, got theta={theta}, alpha={alpha}")


def crp_schedule(alpha: float, theta: float, n_max: int, rng) -> ArrivalSchedule:
    """Record indices of a CRP(alpha, theta) partition of ``{1..n_max}``.

    Sequential thinning: after ``n`` elements in ``k`` blocks, element ``n+1``
    opens a new block with probability ``(theta + alpha k) / (theta + n)``.
    """
    _check_crp(alpha, theta)
    if n_max < 1:
        raise BadParams("n_max must be >= 1")
    u = rng.random(n_max)
    times = [1]
    k = 1
    for n in range(1, n_max):
        if u[n] * (theta + n) < theta + alpha * k:
            k += 1
            times.append(n + 1)
    return ArrivalSchedule(tuple(times), f"crp({alpha:g},{theta:g})")


def crp_next_gap(alpha, theta, t_k, k, rng, size=None):
    """Draw ``T_{k+1} - T_k`` given ``T_k`` and ``k`` blocks.

    The survival function ``P[T_{k+1} - T_k > s]`` equals ``E[B^s]`` for
    ``B ~ Beta(T_k - alpha k, theta + alpha k)``, so the gap is
    ``1 + Geometric_0(1 - B)``.  Exact and O(1) regardless of the gap length.
    """
    a = np.asarray(t_k - alpha * k, dtype=float)
    b = np.asarray(theta + alpha * k, dtype=float)
    stay = rng.beta(a, b, size=size)
    p = np.maximum(1.0 - stay, np.finfo(float).tiny)
    return np.asarray(rng.geometric(p), dtype=np.int64)


def crp_arrivals(alpha: float, theta: float, k_max: int, rng, n_max=None) -> ArrivalSchedule:
    """First ``k_max`` CRP(alpha, theta) record indices, one beta-geometric draw
    per arrival (optionally cut at ``n_max``).  Same law as ``crp_schedule``."""
    _check_crp(alpha, theta)
    times = [1]
    t = 1
    for k in range(1, k_max):
        t += int(crp_next_gap(alpha, theta, t, k, rng))
        if n_max is not None and t > n_max:
            break
        times.append(t)
    return ArrivalSchedule(tuple(times), f"crp({alpha:g},{theta:g})")


def doubled_schedule(interarrivals, k_max=None, provenance="doubled") -> ArrivalSchedule:
    """``T_2 = 2 Delta_2``, ``T_k = T_{k-1} + 2 Delta_k``: every arrival after the
    first is even, which keeps each prefix graph connected."""
    deltas = [int(d) for d in interarrivals]
    if any(d < 1 for d in deltas):
        raise BadParams("base interarrivals must be >= 1")
    if k_max is not None:
        deltas = deltas[: max(k_max - 1, 0)]
    times = [1]
    for i, d in enumerate(deltas):
        times.append(2 * d if i == 0 else times[-1] + 2 * d)
    return ArrivalSchedule(tuple(times), provenance)


# -- string grammar used by the CLI -------------------------------------------


def parse_interarrival(text: str) -> InterarrivalSpec:
    kind, _, arg = text.partition(":")
    if kind == "geom":
        return InterarrivalSpec.geometric(float(arg))
    if kind == "poisplus":
        return InterarrivalSpec.shifted_poisson(float(arg))
    if kind == "delta":
        return InterarrivalSpec.constant(int(arg))
    raise BadParams(f"not an i.i.d. interarrival spec: {text!r}")


def schedule_from_spec(text: str, n_ends: int, rng) -> ArrivalSchedule:
    """Build a schedule covering ``n_ends`` ends from a spec string.

    Grammar: ``constant:d | geom:beta | poisplus:lambda | delta:c |
    crp:alpha,theta | file:path | doubled:<spec>``.
    """
    kind, _, arg = text.partition(":")
    if not arg:
        raise BadParams(f"arrival spec {text!r} is missing its argument")
    if kind == "constant":
        d = int(arg)
        return constant_schedule(d, (n_ends - 1) // (2 * d) + 1)
    if kind in ("geom", "poisplus", "delta"):
        spec = parse_interarrival(text)
        return _iid_until(spec, n_ends, rng)
    if kind == "crp":
        try:
            alpha, theta = (float(x) for x in arg.split(","))
        except ValueError:
            raise BadParams(f"crp spec needs 'alpha,theta', got {arg!r}") from None
        return crp_schedule(alpha, theta, n_ends, rng)
    if kind == "file":
        return read_schedule(arg).truncate(n_ends)
    if kind == "doubled":
        # doubled times are 2(T_k - 1), so a base covering n_ends suffices
        base = schedule_from_spec(arg, n_ends, rng)
        sched = doubled_schedule(base.interarrivals(), provenance=f"doubled({base.provenance})")
        return sched.truncate(n_ends)
    raise BadParams(f"unknown arrival spec {text!r}")


def _iid_until(spec, n_ends, rng):
    times = [1]
    chunk = max(16, int(n_ends / spec.mean) + 16)
    while times[-1] <= n_ends:
        for d in spec.sample(chunk, rng):
            times.append(times[-1] + int(d))
            if times[-1] > n_ends:
                break
    return ArrivalSchedule(tuple(times[:-1]), f"iid({spec.kind}:{_fmt(spec)})")


# -- schedule files -----------------------------------------------------------


def write_schedule(schedule: ArrivalSchedule, path, trailing_inf=True) -> None:
    lines = [f"# provenance: {schedule.provenance}"]
    lines += [str(t) for t in schedule.times]
    if trailing_inf:
        lines.append("inf")
    Path(path).write_text("\n".join(lines) + "\n")


def read_schedule(path) -> ArrivalSchedule:
    provenance = "file"
    raw = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            if key.strip() == "provenance":
                provenance = val.strip()
            continue
        raw.append(INF if line.lower() == "inf" else line)
    try:
        return validate_schedule(raw, provenance)
    except BadSchedule as exc:
        raise BadSchedule(f"{path}: {exc}") from None
