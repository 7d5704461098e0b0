"""Cross-validation, per-class accuracy, and scalability measurement.

Accuracy is micro accuracy (confusion-matrix trace over total) and the
per-class figure is recall. Wall-times wrap the train/predict calls only,
on the monotonic clock; optional allocation peaks come from tracemalloc.
The speed-up ratio at w workers is time(1 worker) / time(w workers), with
the partition count pinned to the worker count for every run.
"""

from __future__ import annotations

import random
import time
import tracemalloc
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import classify
from .records import EnterpriseRecord, GroundTruth
from .vectorizer import LabeledPoint


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: tuple[int, ...]  # record index -> fold id
    seed: int

    def fold_sizes(self) -> list[int]:
        sizes = [0] * self.k
        for fold in self.assignments:
            sizes[fold] += 1
        return sizes


def kfold(n: int, k: int, seed: int) -> FoldPlan:
    """Seeded shuffle, then round-robin assignment; sizes differ by <= 1."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if n < k:
        raise ValueError(f"cannot split {n} records into {k} folds")
    order = list(range(n))
    random.Random(seed).shuffle(order)
    assignments = [0] * n
    for position, index in enumerate(order):
        assignments[index] = position % k
    return FoldPlan(k, tuple(assignments), seed)


@dataclass
class EvalReport:
    classes: tuple[str, ...]
    confusion: np.ndarray  # (K, K) int64; rows = true class
    train_seconds: float  # mean per fold
    predict_seconds: float
    partitions: int
    alloc_peak_bytes: int | None = None

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    @property
    def overall_accuracy(self) -> float:
        total = self.total
        return float(np.trace(self.confusion) / total) if total else 0.0

    def per_class_accuracy(self) -> dict[str, float]:
        """Recall per class; classes absent from the test data report 0."""
        out = {}
        for i, cls in enumerate(self.classes):
            row = self.confusion[i].sum()
            out[cls] = float(self.confusion[i, i] / row) if row else 0.0
        return out

    def write(self, directory: str | Path, prefix: str = "eval") -> None:
        directory = Path(directory)
        with open(directory / f"{prefix}_summary.tsv", "w", encoding="utf-8", newline="") as fh:
            fh.write("metric\tvalue\n")
            fh.write(f"overall_accuracy\t{self.overall_accuracy!r}\n")
            fh.write(f"test_total\t{self.total}\n")
            fh.write(f"partitions\t{self.partitions}\n")
        with open(directory / f"{prefix}_per_class.tsv", "w", encoding="utf-8", newline="") as fh:
            fh.write("class\ttest_count\taccuracy\n")
            per_class = self.per_class_accuracy()
            for i, cls in enumerate(self.classes):
                fh.write(f"{cls}\t{int(self.confusion[i].sum())}\t{per_class[cls]!r}\n")
        with open(directory / f"{prefix}_confusion.tsv", "w", encoding="utf-8", newline="") as fh:
            fh.write("true\\pred\t" + "\t".join(self.classes) + "\n")
            for i, cls in enumerate(self.classes):
                fh.write(cls + "\t" + "\t".join(str(int(v)) for v in self.confusion[i]) + "\n")


def cross_validate(
    method: str,
    data: Sequence[LabeledPoint],
    plan: FoldPlan,
    params: dict | None = None,
    workers: int = 1,
    measure_alloc: bool = False,
) -> EvalReport:
    """Train/test once per fold and pool the confusion counts."""
    if len(plan.assignments) != len(data):
        raise ValueError("fold plan does not cover the data")
    classes = classify.infer_classes(data)
    index = {c: i for i, c in enumerate(classes)}
    confusion = np.zeros((len(classes), len(classes)), dtype=np.int64)
    train_times, predict_times, peaks = [], [], []
    for fold in range(plan.k):
        train_set = [p for p, f in zip(data, plan.assignments) if f != fold]
        test_set = [p for p, f in zip(data, plan.assignments) if f == fold]
        if measure_alloc:
            tracemalloc.start()
        try:
            t0 = time.perf_counter()
            model = classify.train(method, train_set, params, workers=workers, parts=workers, classes=classes)
            train_times.append(time.perf_counter() - t0)
        finally:
            if measure_alloc:
                peaks.append(tracemalloc.get_traced_memory()[1])
                tracemalloc.stop()
        t0 = time.perf_counter()
        predicted = classify.predict_labels(model, [p.vector for p in test_set])
        predict_times.append(time.perf_counter() - t0)
        for point, pred in zip(test_set, predicted):
            confusion[index[point.label], int(pred)] += 1
    return EvalReport(
        classes=classes,
        confusion=confusion,
        train_seconds=sum(train_times) / len(train_times),
        predict_seconds=sum(predict_times) / len(predict_times),
        partitions=workers,
        alloc_peak_bytes=max(peaks) if peaks else None,
    )


@dataclass(frozen=True)
class SpeedupPoint:
    workers: int
    seconds: float
    ratio: float


@dataclass(frozen=True)
class SpeedupCurve:
    points: tuple[SpeedupPoint, ...]

    def ratio_at(self, workers: int) -> float:
        for p in self.points:
            if p.workers == workers:
                return p.ratio
        raise KeyError(workers)

    def write(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("workers\tseconds\tspeedup\n")
            for p in self.points:
                fh.write(f"{p.workers}\t{p.seconds!r}\t{p.ratio!r}\n")


def speedup(
    method: str,
    data: Sequence[LabeledPoint],
    worker_counts: Sequence[int],
    params: dict | None = None,
) -> SpeedupCurve:
    """Wall-time of training at each worker count, and time(1)/time(w).

    Worker counts beyond the machine's cores are allowed; oversubscription
    then shows up as a flattening or declining ratio."""
    if not worker_counts or any(w < 1 for w in worker_counts):
        raise ValueError("worker counts must be >= 1")
    if 1 not in worker_counts:
        raise ValueError("worker counts must include 1 (the ratio baseline)")
    classes = classify.infer_classes(data)
    seconds: dict[int, float] = {}
    for w in worker_counts:
        t0 = time.perf_counter()
        classify.train(method, data, params, workers=w, parts=w, classes=classes)
        seconds[w] = time.perf_counter() - t0
    base = seconds[1]
    points = tuple(SpeedupPoint(w, seconds[w], base / seconds[w]) for w in worker_counts)
    return SpeedupCurve(points)


@dataclass(frozen=True)
class ClassAccuracy:
    category: str
    imputed: int
    correct: int

    @property
    def accuracy(self) -> float:
        return self.correct / self.imputed if self.imputed else 0.0


def category_accuracy(
    records: Sequence[EnterpriseRecord], truth: GroundTruth, classes: Sequence[str]
) -> list[ClassAccuracy]:
    """Imputed-category accuracy against ground truth, by true class."""
    imputed = {c: 0 for c in classes}
    correct = {c: 0 for c in classes}
    for rec in records:
        expected = truth.get(rec.id, "category")
        if expected is None or rec.provenance_of("category") != "imputed":
            continue
        imputed[expected] += 1
        if rec.category == expected:
            correct[expected] += 1
    return [ClassAccuracy(c, imputed[c], correct[c]) for c in classes]


def write_category_accuracy(rows: Sequence[ClassAccuracy], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("class\timputed\tcorrect\taccuracy\n")
        for row in rows:
            fh.write(f"{row.category}\t{row.imputed}\t{row.correct}\t{row.accuracy!r}\n")
