"""Domain types shared by every module.

A realized graph is a sequence of edge-end labels ``(l_1, l_2, ...)``; each
consecutive pair ``(l_{2i-1}, l_{2i})`` is an undirected edge.  Labels are
1-based and vertices are numbered in order of first appearance.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import BadParams, BadSchedule, MalformedSequence

INF = math.inf


def _is_inf(x) -> bool:
    if isinstance(x, str):
        return x.strip().lower() in ("inf", "infinity", "+inf")
    try:
        return math.isinf(x) and x > 0
    except TypeError:
        return False


@dataclass(frozen=True)
class LabelSequence:
    """Edge-end labels in generation order."""

    labels: tuple

    def __post_init__(self):
        labels = tuple(int(x) for x in self.labels)
        object.__setattr__(self, "labels", labels)
        check_labels(labels)

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __getitem__(self, i):
        return self.labels[i]

    @property
    def num_vertices(self) -> int:
        return max(self.labels) if self.labels else 0

    def edges(self):
        """Complete edges ``(u, v)``; a trailing odd end is dropped."""
        ls = self.labels
        return [(ls[i], ls[i + 1]) for i in range(0, len(ls) - 1, 2)]


def check_labels(labels: Sequence[int]) -> None:
    """Raise ``MalformedSequence`` at the first index breaking order of appearance."""
    top = 0
    for i, lab in enumerate(labels):
        if lab < 1 or lab > top + 1:
            if i == 0:
                raise MalformedSequence(f"first label must be 1, got {lab}", index=0)
            raise MalformedSequence(
                f"label {lab} at index {i} skips ahead of max label {top}", index=i
            )
        if lab > top:
            top = lab


@dataclass(frozen=True)
class MultigraphView:
    """Degree/arrival summary of a label sequence.

    ``degrees[k-1]`` and ``arrival_times[k-1]`` refer to vertex ``k``; arrival
    times are 1-based end indices.  The end list is kept so the original
    sequence can be re-serialized.
    """

    ends: tuple
    degrees: tuple
    arrival_times: tuple

    @property
    def num_vertices(self) -> int:
        return len(self.degrees)

    @property
    def num_edge_ends(self) -> int:
        return len(self.ends)

    def to_labels(self) -> LabelSequence:
        return LabelSequence(self.ends)


def multigraph_from_labels(labels) -> MultigraphView:
    if not isinstance(labels, LabelSequence):
        labels = LabelSequence(tuple(labels))
    degrees: list[int] = []
    arrivals: list[int] = []
    for i, lab in enumerate(labels.labels, start=1):
        if lab > len(degrees):
            degrees.append(0)
            arrivals.append(i)
        degrees[lab - 1] += 1
    return MultigraphView(labels.labels, tuple(degrees), tuple(arrivals))


@dataclass(frozen=True)
class ArrivalSchedule:
    """Vertex arrival times ``1 = t_1 < t_2 < ...``.

    Only the finite prefix is stored; every later entry is ``INF``.
    """

    times: tuple
    provenance: str = "fixed"

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(int(t) for t in self.times))

    def __len__(self):
        return len(self.times)

    def time(self, k: int):
        """Arrival time of vertex ``k`` (1-based), ``INF`` if it never arrives."""
        if k < 1:
            raise IndexError(k)
        return self.times[k - 1] if k <= len(self.times) else INF

    def vertices_at(self, n: int) -> int:
        """Number of vertices present after ``n`` ends."""
        return bisect_right(self.times, n)

    @property
    def in_t2(self) -> bool:
        return all(t % 2 == 0 for t in self.times[1:])

    def interarrivals(self) -> tuple:
        """``(Delta_2, Delta_3, ...)`` over the finite prefix."""
        ts = self.times
        return tuple(ts[i] - ts[i - 1] for i in range(1, len(ts)))

    def as_list(self, length: int | None = None) -> list:
        out = list(self.times)
        if length is not None:
            out = out[:length] + [INF] * max(0, length - len(out))
        return out

    def truncate(self, n: int) -> "ArrivalSchedule":
        """Drop arrivals later than end index ``n``."""
        return ArrivalSchedule(self.times[: self.vertices_at(n)], self.provenance)


def validate_schedule(times: Iterable, provenance: str = "fixed") -> ArrivalSchedule:
    finite: list[int] = []
    seen_inf = False
    for i, raw in enumerate(times):
        if _is_inf(raw):
            seen_inf = True
            continue
        if seen_inf:
            raise BadSchedule(f"finite arrival time {raw!r} after infinity (index {i})")
        try:
            t = float(raw)
        except (TypeError, ValueError):
            raise BadSchedule(f"arrival time {raw!r} is not a number") from None
        if not t.is_integer():
            raise BadSchedule(f"arrival time {raw!r} is not an integer")
        t = int(t)
        if i == 0 and t != 1:
            raise BadSchedule(f"first arrival time must be 1, got {t}")
        if finite and t <= finite[-1]:
            raise BadSchedule(f"arrival times must increase strictly (index {i})")
        finite.append(t)
    if not finite:
        raise BadSchedule("empty schedule: t_1 = 1 is required")
    return ArrivalSchedule(tuple(finite), provenance)


@dataclass(frozen=True)
class ModelParams:
    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not a < 1 or math.isnan(a):
            raise BadParams(f"alpha must be < 1, got {self.alpha}")
        object.__setattr__(self, "alpha", a)


def as_params(params) -> ModelParams:
    return params if isinstance(params, ModelParams) else ModelParams(params)


@dataclass(frozen=True)
class StickWeights:
    """Realized stick-breaking variables; ``psi[0]`` is vertex 1 (always 1)."""

    psi: np.ndarray

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=float)
        if psi.ndim != 1 or psi.size == 0 or psi[0] != 1.0:
            raise BadParams("psi must be a non-empty vector with psi[0] == 1")
        psi.setflags(write=False)
        object.__setattr__(self, "psi", psi)

    def __len__(self):
        return self.psi.size

    def w(self, j: int, k: int) -> float:
        """``W_{j,k} = prod_{l=j+1}^{k} (1 - psi_l)``; ``W_{0,k} = 0``."""
        if j == 0:
            return 0.0
        if not 1 <= j <= k <= self.psi.size:
            raise IndexError((j, k))
        return float(np.prod(1.0 - self.psi[j:k]))

    def interval_edges(self, k: int) -> np.ndarray:
        """``(W_{0,k}, W_{1,k}, ..., W_{k,k})``; consecutive pairs are the intervals."""
        tail = np.cumprod((1.0 - self.psi[1:k])[::-1])[::-1]
        return np.concatenate(([0.0], tail, [1.0]))


@dataclass
class TestReport:
    """Outcome of one statistical or exact check.

    Statistical checks pass when ``value > threshold`` (``value`` is a
    p-value); exact checks pass when ``value < threshold`` (an error norm);
    ``kind="lower"`` checks pass when ``value > threshold`` for a plain bound.
    """

    __test__ = False  # not a pytest class

    name: str
    statistic: float
    value: float
    threshold: float
    kind: str = "statistical"
    seed: int | None = None
    samples: int = 0
    details: dict = field(default_factory=dict)
    approximate: bool = False

    @property
    def passed(self) -> bool:
        if self.kind in ("statistical", "lower"):
            return bool(self.value > self.threshold)
        return bool(self.value < self.threshold)

    @property
    def p_value(self):
        return self.value if self.kind == "statistical" else None

    @property
    def error_norm(self):
        return self.value if self.kind == "exact" else None

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "kind": self.kind,
            "statistic": float(self.statistic),
            {"statistical": "p_value", "exact": "error_norm"}.get(self.kind, "value"): float(self.value),
            "threshold": self.threshold,
            "passed": self.passed,
            "seed": self.seed,
            "samples": self.samples,
            "approximate": self.approximate,
        }
        if self.details:
            out["details"] = _jsonable(self.details)
        return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    return obj
