from __future__ import annotations

import math
import random
from collections import Counter

import numpy as np
import pytest

from regimpute.classify import merge_stats, partial_stats, predict, train_nb
from regimpute.parallel import split
from regimpute.vectorizer import LabeledPoint, SparseVector


def bayes_oracle(train, alpha, classes, dim, vector):
    """Brute-force Bayes rule in the probability domain.

    Independent of the trained model: posteriors come from raw counts via
    prior * product(P(feature|class)^count), then normalization."""
    n = len(train)
    k = len(classes)
    posteriors = []
    for cls in classes:
        docs = [p for p in train if p.label == cls]
        prior = (len(docs) + alpha) / (n + alpha * k)
        counts = Counter()
        for p in docs:
            for i, c in p.vector.entries:
                counts[i] += c
        total = sum(counts.values())
        likelihood = prior
        for i, c in vector.entries:
            likelihood *= ((counts[i] + alpha) / (total + alpha * dim)) ** c
        posteriors.append(likelihood)
    norm = sum(posteriors)
    posteriors = [p / norm for p in posteriors]
    best = max(range(k), key=lambda j: (posteriors[j], -j))
    return classes[best], [math.log(p) for p in posteriors]


def sv(dim, *pairs):
    return SparseVector(dim, tuple(sorted(pairs)))


def make_dataset(rng, n_classes, vocab, dim, n_docs):
    classes = tuple("ABC"[:n_classes])
    points = []
    for _ in range(n_docs):
        label = classes[rng.randrange(n_classes)]
        counts = Counter(rng.randrange(vocab) for _ in range(rng.randint(1, 5)))
        points.append(LabeledPoint(label, sv(dim, *counts.items())))
    return classes, points


def probe_vectors(rng, points, vocab, dim, extra=3):
    probes = [p.vector for p in points] + [SparseVector(dim, ())]
    for _ in range(extra):
        counts = Counter(rng.randrange(vocab) for _ in range(rng.randint(1, 4)))
        probes.append(sv(dim, *counts.items()))
    return probes


def assert_matches_oracle(classes, points, probes, alpha=1.0):
    dim = points[0].vector.dim
    model = train_nb(points, alpha=alpha, classes=classes)
    for vec in probes:
        expected_label, expected_logpost = bayes_oracle(points, alpha, classes, dim, vec)
        got = predict(model, vec)
        assert got.label == expected_label
        for score, logpost in zip(got.scores, expected_logpost):
            assert math.log(score) == pytest.approx(logpost, abs=1e-9)


def test_two_class_toy_matches_hand_bayes():
    # 2 classes, 3 features, counts small enough to check by hand.
    points = [
        LabeledPoint("A", sv(3, (0, 2), (1, 1))),
        LabeledPoint("A", sv(3, (0, 1))),
        LabeledPoint("B", sv(3, (2, 3))),
    ]
    classes = ("A", "B")
    model = train_nb(points, alpha=1.0, classes=classes)
    for vec in [sv(3, (0, 1)), sv(3, (2, 1)), sv(3, (0, 1), (2, 1)), SparseVector(3, ())]:
        expected_label, expected_logpost = bayes_oracle(points, 1.0, classes, 3, vec)
        got = predict(model, vec)
        assert got.label == expected_label
        for score, logpost in zip(got.scores, expected_logpost):
            assert math.log(score) == pytest.approx(logpost, abs=1e-12)


def test_oracle_equivalence_over_random_family():
    rng = random.Random(20240)
    for n_classes in (1, 2, 3):
        for vocab in (1, 2, 4, 8):
            for dim in (vocab, 16):
                for n_docs in (1, 3, 7, 20):
                    classes, points = make_dataset(rng, n_classes, vocab, dim, n_docs)
                    probes = probe_vectors(rng, points, vocab, dim)
                    assert_matches_oracle(classes, points, probes)


def test_empty_class_gets_smoothed_prior():
    # Class C never occurs; training must stay finite and C keeps a small
    # but positive posterior everywhere.
    points = [LabeledPoint("A", sv(4, (0, 1))), LabeledPoint("B", sv(4, (1, 1)))]
    classes = ("A", "B", "C")
    model = train_nb(points, classes=classes)
    assert np.all(np.isfinite(model.state["log_prior"]))
    got = predict(model, sv(4, (0, 1)))
    assert got.scores[2] > 0
    assert_matches_oracle(classes, points, [sv(4, (0, 2)), SparseVector(4, ())])


def test_single_class_always_predicted():
    points = [LabeledPoint("A", sv(4, (i % 4, 1))) for i in range(5)]
    model = train_nb(points)
    for vec in [sv(4, (0, 3)), SparseVector(4, ()), sv(4, (3, 1))]:
        assert predict(model, vec).label == "A"


def test_zero_vector_prediction_is_prior_argmax():
    points = [LabeledPoint("A", sv(4, (0, 1)))] * 3 + [LabeledPoint("B", sv(4, (1, 1)))]
    model = train_nb(points)
    got = predict(model, SparseVector(4, ()))
    assert got.label == "A"
    priors = np.exp(model.state["log_prior"])
    assert np.argmax(priors) == 0


def test_likelihood_rows_normalize():
    rng = random.Random(5)
    classes, points = make_dataset(rng, 3, 8, 16, 30)
    model = train_nb(points, classes=classes)
    row_sums = np.exp(model.state["log_likelihood"]).sum(axis=1)
    assert np.allclose(row_sums, 1.0, atol=1e-12)


def test_empty_training_data_is_fatal():
    with pytest.raises(ValueError, match="empty"):
        train_nb([])


def test_mixed_dims_are_fatal():
    points = [LabeledPoint("A", sv(4, (0, 1))), LabeledPoint("A", sv(8, (0, 1)))]
    with pytest.raises(ValueError, match="dim"):
        train_nb(points)


def test_partitioned_stats_merge_bit_exact():
    rng = random.Random(99)
    classes, points = make_dataset(rng, 3, 8, 16, 1000)
    whole = partial_stats(points, classes, 16)
    for n_parts in (2, 3, 7):
        pieces = [partial_stats(part, classes, 16) for part in split(points, n_parts)]
        merged = merge_stats(pieces)
        assert np.array_equal(merged.doc_counts, whole.doc_counts)
        assert np.array_equal(merged.word_counts, whole.word_counts)
        # merge order must not matter
        reversed_merge = merge_stats(list(reversed(pieces)))
        assert np.array_equal(reversed_merge.word_counts, whole.word_counts)


def test_workers_do_not_change_the_model():
    rng = random.Random(17)
    classes, points = make_dataset(rng, 3, 8, 16, 400)
    sequential = train_nb(points, classes=classes)
    forked = train_nb(points, classes=classes, workers=3)
    assert np.array_equal(sequential.state["log_prior"], forked.state["log_prior"])
    assert np.array_equal(sequential.state["log_likelihood"], forked.state["log_likelihood"])


def test_scaling_invariance_of_argmax():
    rng = random.Random(3)
    classes, points = make_dataset(rng, 3, 8, 16, 40)
    model = train_nb(points, classes=classes)
    for _ in range(10):
        _, pts = make_dataset(rng, 3, 8, 16, 1)
        vec = pts[0].vector
        scores = np.asarray(predict(model, vec).scores)
        assert np.argmax(scores) == np.argmax(scores * 7.25)
