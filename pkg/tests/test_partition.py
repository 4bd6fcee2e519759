import math

import numpy as np
import pytest

from atgraph.core import ArrivalSchedule, multigraph_from_labels
from atgraph.errors import CapExceeded
from atgraph.likelihood import enumerate_sequences, log_prob_labels
from atgraph.partition import (
    Partition, check_coherence, crp_partition_prob, fixed_schedule_prob, phi, phi_inverse,
    record_indices, sample_urn, set_partitions,
)
from atgraph.samplers import sample_db
from atgraph.stats import chi_square_two_sample


def test_phi_definition():
    p = Partition.from_blocks([{3}, {1, 2}])
    labels = phi(p)
    assert labels.labels == (1, 1, 2)
    assert labels.edges() == [(1, 1)]


def test_round_trip(rng):
    for _ in range(1000):
        labels = [1]
        for _ in range(rng.integers(0, 20)):
            labels.append(int(rng.integers(1, max(labels) + 2)))
        p = Partition(tuple(labels))
        assert phi_inverse(phi(p)) == p
        assert phi(phi_inverse(labels)).labels == tuple(labels)
        assert Partition.from_blocks(p.blocks) == p
        # record indices are the graph's arrival times
        assert record_indices(p) == multigraph_from_labels(labels).arrival_times


def test_record_indices():
    assert record_indices(Partition((1, 1, 2, 1))) == (1, 3)
    assert record_indices(Partition((1, 1, 1))) == (1,)


def test_bell_numbers():
    assert [len(set_partitions(n)) for n in range(1, 8)] == [1, 2, 5, 15, 52, 203, 877]
    with pytest.raises(CapExceeded):
        set_partitions(13)


def test_coherence_crp():
    rep = check_coherence(crp_partition_prob(0.5, 1.0), 5)
    assert rep.passed and rep.value < 1e-10
    assert check_coherence(crp_partition_prob(0.5, 1.0), 2).value < 1e-15


def test_coherence_fixed_schedule():
    rep = check_coherence(fixed_schedule_prob(0.3, ArrivalSchedule((1, 2, 4))), 6)
    assert rep.passed


def test_urn_matches_graph_sampler(rng):
    s = ArrivalSchedule((1, 3, 4))
    seqs = enumerate_sequences(s, 6)
    idx = {q: i for i, q in enumerate(seqs)}
    a = np.zeros(len(seqs))
    b = np.zeros(len(seqs))
    for _ in range(20000):
        a[idx[sample_urn(0.2, s, 6, rng).block_labels]] += 1
        b[idx[sample_db(0.2, s, 6, rng).labels.labels]] += 1
    assert chi_square_two_sample(a, b).p_value > 0.01
