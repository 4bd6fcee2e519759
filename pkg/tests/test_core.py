import math

import numpy as np
import pytest

from atgraph.core import (
    INF, LabelSequence, ModelParams, StickWeights, TestReport, multigraph_from_labels,
    validate_schedule,
)
from atgraph.errors import BadParams, BadSchedule, MalformedSequence


def test_single_end():
    v = multigraph_from_labels((1,))
    assert v.degrees == (1,) and v.num_vertices == 1 and v.arrival_times == (1,)


def test_hand_counted_degrees():
    v = multigraph_from_labels((1, 1, 2, 1))
    assert v.degrees == (3, 1)
    assert v.num_vertices == 2
    assert v.arrival_times == (1, 3)
    assert v.num_edge_ends == 4


def test_skipped_label_reports_index():
    with pytest.raises(MalformedSequence) as e:
        multigraph_from_labels((1, 3))
    assert e.value.index == 1


def test_first_label_must_be_one():
    with pytest.raises(MalformedSequence):
        LabelSequence((2, 1))


def test_round_trip_and_degree_conservation(rng):
    for _ in range(200):
        labels = [1]
        for _ in range(rng.integers(1, 30)):
            labels.append(int(rng.integers(1, max(labels) + 2)))
        v = multigraph_from_labels(labels)
        assert v.to_labels().labels == tuple(labels)
        assert sum(v.degrees) == len(labels)
        for n in range(1, len(labels) + 1):
            assert sum(multigraph_from_labels(labels[:n]).degrees) == n


def test_validate_schedule_t2_membership():
    s = validate_schedule([1, 2, 4, "inf", INF])
    assert s.times == (1, 2, 4) and s.in_t2
    assert s.time(4) == INF
    assert not validate_schedule([1, 3, 5]).in_t2


@pytest.mark.parametrize("raw", [[2, 3], [1, 1], [1, 3, 2], [1, INF, 5], []])
def test_validate_schedule_rejects(raw):
    with pytest.raises(BadSchedule):
        validate_schedule(raw)


def test_model_params():
    assert ModelParams(-3).alpha == -3.0
    with pytest.raises(BadParams):
        ModelParams(1.0)


def test_stick_weights_intervals_partition_unit_interval():
    sw = StickWeights(np.array([1.0, 0.3, 0.5, 0.2]))
    for k in range(1, 5):
        assert sw.w(k, k) == 1.0
        edges = sw.interval_edges(k)
        assert edges[0] == 0.0 and edges[-1] == 1.0
        assert np.all(np.diff(edges) >= 0)
    assert math.isclose(sw.w(1, 3), 0.7 * 0.5)


def test_report_pass_rules():
    assert TestReport("a", 0, 0.2, 0.05).passed
    assert not TestReport("a", 0, 0.01, 0.05).passed
    assert TestReport("b", 0, 1e-13, 1e-12, kind="exact").passed
    assert not TestReport("b", 0, 1e-11, 1e-12, kind="exact").passed
    d = TestReport("b", 0, 1e-13, 1e-12, kind="exact").to_dict()
    assert "error_norm" in d and d["passed"]
