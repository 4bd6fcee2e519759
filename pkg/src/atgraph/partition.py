"""Partitions of {1..n} and the identity map onto label sequences.

A partition is stored by its block labels, blocks numbered by least element.
Read as edge ends, the same labels are a multigraph, so ``phi`` and
``phi_inverse`` only change the type.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import ArrivalSchedule, LabelSequence, TestReport, as_params, check_labels
from .errors import CapExceeded
from .likelihood import ENUMERATION_CAP, crp_marginal_log_prob, log_prob_labels
from .samplers import sample_db


@dataclass(frozen=True)
class Partition:
    block_labels: tuple

    def __post_init__(self):
        labels = tuple(int(x) for x in self.block_labels)
        object.__setattr__(self, "block_labels", labels)
        check_labels(labels)

    def __len__(self):
        return len(self.block_labels)

    @property
    def blocks(self) -> list:
        out: list[list[int]] = []
        for i, lab in enumerate(self.block_labels, start=1):
            if lab > len(out):
                out.append([])
            out[lab - 1].append(i)
        return [tuple(b) for b in out]

    @property
    def block_sizes(self) -> tuple:
        return tuple(len(b) for b in self.blocks)

    @classmethod
    def from_blocks(cls, blocks) -> "Partition":
        """Build from any family of disjoint blocks covering {1..n}."""
        blocks = sorted((sorted(b) for b in blocks if b), key=lambda b: b[0])
        n = sum(len(b) for b in blocks)
        labels = [0] * n
        for j, b in enumerate(blocks, start=1):
            for i in b:
                labels[i - 1] = j
        return cls(tuple(labels))


def phi(partition: Partition) -> LabelSequence:
    return LabelSequence(partition.block_labels)


def phi_inverse(labels) -> Partition:
    if isinstance(labels, LabelSequence):
        labels = labels.labels
    return Partition(tuple(labels))


def record_indices(partition: Partition) -> tuple:
    return tuple(b[0] for b in partition.blocks)


def set_partitions(n: int, cap: int = ENUMERATION_CAP):
    """All partitions of {1..n} as restricted-growth label tuples."""
    if n > cap:
        raise CapExceeded(f"n = {n} exceeds enumeration cap {cap}")
    if n == 0:
        return [()]
    out = []

    def grow(prefix, top):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        for lab in range(1, top + 2):
            prefix.append(lab)
            grow(prefix, max(top, lab))
            prefix.pop()

    grow([1], 1)
    return out


def crp_partition_prob(alpha: float, theta: float):
    """Probability function of a partition under the graph law with
    CRP(alpha, theta) arrivals marginalized out."""
    def prob(labels):
        return math.exp(crp_marginal_log_prob(alpha, theta, labels))
    return prob


def fixed_schedule_prob(params, schedule: ArrivalSchedule):
    """Probability function of a partition given fixed arrival times."""
    params = as_params(params)

    def prob(labels):
        return math.exp(log_prob_labels(params, schedule, labels))
    return prob


def check_coherence(prob_fn, n: int, cap: int = ENUMERATION_CAP, tol: float = 1e-10,
                    name: str = "coherence") -> TestReport:
    """Check ``P(pi) = sum_j P(pi + {n -> block j})`` for every partition
    ``pi`` of {1..n-1}.  Appends with zero probability (e.g. ones that
    contradict a fixed schedule) contribute nothing, so the check is valid
    for fixed-schedule laws as well."""
    if n > cap:
        raise CapExceeded(f"n = {n} exceeds enumeration cap {cap}")
    if n < 2:
        raise ValueError("coherence needs n >= 2")
    worst = 0.0
    count = 0
    for labels in set_partitions(n - 1, cap):
        k = max(labels)
        total = math.fsum(prob_fn(labels + (j,)) for j in range(1, k + 2))
        worst = max(worst, abs(prob_fn(labels) - total))
        count += 1
    return TestReport(name, statistic=worst, value=worst, threshold=tol, kind="exact",
                      samples=count, details={"n": n})


def sample_urn(params, schedule: ArrivalSchedule, n: int, rng, seed_labels=()) -> Partition:
    """Urn scheme: a new colour at each arrival time, otherwise colour ``j``
    with weight ``|B_j| - alpha``.  Same law as ``sample_db`` read through phi."""
    out = sample_db(params, schedule, n, rng, seed_labels=seed_labels)
    return phi_inverse(out.labels)
