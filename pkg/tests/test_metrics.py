import statistics

import numpy as np
import pytest
from hypothesis import given, strategies as st

from khopsim.gcn import RunResult
from khopsim.metrics import RunPair, accuracy, aggregate_runs, disagreement, mean_probs_on_disagreed


def labels_strategy(size, c=4):
    return st.lists(st.integers(0, c - 1), min_size=size, max_size=size)


def result(pred, probs):
    return RunResult(params=[], predictions=np.asarray(pred), probabilities=np.asarray(probs, dtype=float))


def test_accuracy_examples():
    assert accuracy([0, 1, 1, 0], [0, 1, 0, 0]) == 0.75
    assert accuracy([0, 1, 1, 0], [0, 1, 0, 0], [False, False, True, True]) == 0.5
    with pytest.raises(ValueError):
        accuracy([0, 1], [0, 1], [False, False])
    with pytest.raises(ValueError):
        accuracy([0, 1], [0])


def test_disagreement_examples():
    assert disagreement([0, 1, 2, 0], [0, 2, 2, 1]) == 0.5
    assert disagreement([0, 0], [0, 0]) == 0.0
    assert disagreement([0, 1], [1, 0]) == 1.0
    assert disagreement([0, 1, 2, 0], [0, 2, 2, 1], mask=[True, False, True, False]) == 0.0
    with pytest.raises(ValueError):
        disagreement([0, 1], [0, 1, 2])


@given(st.integers(1, 30).flatmap(lambda n: st.tuples(labels_strategy(n), labels_strategy(n), labels_strategy(n))))
def test_disagreement_is_a_normalized_hamming_metric(triple):
    a, b, c = (np.array(t) for t in triple)
    assert disagreement(a, a) == 0.0
    assert disagreement(a, b) == disagreement(b, a)
    assert disagreement(a, c) <= disagreement(a, b) + disagreement(b, c) + 1e-12
    assert 0.0 <= disagreement(a, b) <= 1.0
    perm = np.random.default_rng(len(a)).permutation(len(a))
    assert disagreement(a[perm], b[perm]) == disagreement(a, b)


@given(st.integers(1, 30).flatmap(lambda n: st.tuples(labels_strategy(n), labels_strategy(n))))
def test_disagreement_with_truth_is_error_rate(pair):
    pred, truth = np.array(pair[0]), np.array(pair[1])
    assert disagreement(pred, truth) == pytest.approx(1 - accuracy(pred, truth))


def test_aggregate_examples():
    stats = aggregate_runs([0.8, 0.9, 1.0])
    assert stats.mean == pytest.approx(0.9)
    assert stats.std == pytest.approx(statistics.pstdev([0.8, 0.9, 1.0]))
    assert stats.count == 3
    assert aggregate_runs([0.42]) == (0.42, 0.0, 1)
    with pytest.raises(ValueError):
        aggregate_runs([])


def test_probs_on_disagreed_nodes():
    r1 = result([0, 1, 1], [[0.9, 0.1], [0.2, 0.8], [0.4, 0.6]])
    r2 = result([0, 0, 0], [[0.8, 0.2], [0.7, 0.3], [0.5, 0.5]])
    prof = mean_probs_on_disagreed(RunPair(r1, r2))
    assert prof.count == 2
    np.testing.assert_allclose(prof.mean_original, [0.3, 0.7])
    np.testing.assert_allclose(prof.mean_khop, [0.6, 0.4])


def test_probs_on_disagreed_none_when_identical():
    r = result([0, 1], [[0.9, 0.1], [0.2, 0.8]])
    assert mean_probs_on_disagreed(RunPair(r, r)) is None


def test_run_pair_shape_check():
    with pytest.raises(ValueError):
        RunPair(result([0], [[1.0, 0.0]]), result([0], [[1.0, 0.0, 0.0]]))
