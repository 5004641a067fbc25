"""Learning the optimum sub-system size ``m`` and recursion depth ``R`` from benchmarks.

Everything here is a pure function of immutable inputs.  Predictions use a
k-nearest-neighbour vote on ``log10(N)``.
"""
from __future__ import annotations

import hashlib
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (DepthOutOfRange, EmptyTestSet, EmptyTrainingSet, KTooLarge,
                     LabelTooRare, MissingTimes, TooFewRows)
from .solver import RecursionPolicy, make_plan

MAX_DEPTH = 4
FIXED_SECOND_LEVEL_M = 10


@dataclass(frozen=True)
class Observation:
    """One benchmarked size.

    ``label`` is the measured optimum (sub-system size, or recursion depth for
    depth data); ``times`` maps each tried candidate to milliseconds.
    """

    n: int
    label: int
    corrected_label: int | None = None
    times: Mapping[int, float] | None = None
    streams: int = 0

    def __post_init__(self):
        if self.times is not None:
            times = {int(k): float(v) for k, v in sorted(self.times.items())}
            object.__setattr__(self, "times", times)

    def argmin(self) -> int:
        if not self.times:
            raise MissingTimes(f"N={self.n} has no timings")
        best = min(self.times.values())
        return min(k for k, v in self.times.items() if v == best)


@dataclass(frozen=True)
class ObservationSet:
    """Rows sorted by ``N``; ``kind`` is ``"m"`` for sub-system sizes, ``"R"`` for depths."""

    rows: tuple[Observation, ...]
    device: str = ""
    precision: str = "fp64"
    kind: str = "m"

    def __post_init__(self):
        rows = tuple(sorted(self.rows, key=lambda r: r.n))
        ns = [r.n for r in rows]
        if len(set(ns)) != len(ns):
            dup = next(n for n, c in Counter(ns).items() if c > 1)
            raise ValueError(f"duplicate N={dup} in observation set")
        for r in rows:
            if r.times is not None and r.label not in r.times:
                raise ValueError(f"N={r.n}: times lack an entry for the label {r.label}")
        if self.kind not in ("m", "R"):
            raise ValueError(f"kind must be 'm' or 'R', got {self.kind!r}")
        object.__setattr__(self, "rows", rows)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def ns(self) -> list[int]:
        return [r.n for r in self.rows]

    def labels(self, use_corrected: bool = False) -> list[int]:
        if not use_corrected:
            return [r.label for r in self.rows]
        return [r.label if r.corrected_label is None else r.corrected_label for r in self.rows]

    def take(self, indices: Iterable[int]) -> "ObservationSet":
        return replace(self, rows=tuple(self.rows[i] for i in sorted(indices)))

    def with_corrected(self, labels: Sequence[int]) -> "ObservationSet":
        if len(labels) != len(self.rows):
            raise ValueError("one corrected label per row is required")
        return replace(self, rows=tuple(replace(r, corrected_label=int(lab))
                                        for r, lab in zip(self.rows, labels)))

    def relabelled(self, use_corrected: bool) -> "ObservationSet":
        """Copy whose ``label`` column is the chosen label source; timings are dropped."""
        labs = self.labels(use_corrected)
        return replace(self, rows=tuple(Observation(r.n, lab, streams=r.streams)
                                        for r, lab in zip(self.rows, labs)))

    def digest(self, use_corrected: bool = False) -> str:
        text = ";".join(f"{n}:{lab}" for n, lab in zip(self.ns, self.labels(use_corrected)))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


# -- kNN ---------------------------------------------------------------------


@dataclass(frozen=True)
class HeuristicModel:
    ns: tuple[int, ...]
    labels: tuple[int, ...]
    k: int = 1
    transform: str = "log10"
    label_domain: tuple[int, ...] = ()
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.ns:
            raise EmptyTrainingSet("a model needs at least one training pair")
        if len(self.ns) != len(self.labels):
            raise ValueError("ns and labels differ in length")
        if self.k < 1 or self.k > len(self.ns):
            raise KTooLarge(f"k={self.k} outside [1, {len(self.ns)}]")
        if self.transform != "log10":
            raise ValueError(f"unknown transform {self.transform!r}")
        domain = tuple(sorted(set(self.labels)))
        if not self.label_domain:
            object.__setattr__(self, "label_domain", domain)
        elif set(domain) - set(self.label_domain):
            raise ValueError("training labels fall outside the label domain")
        object.__setattr__(self, "metadata", dict(self.metadata))

    def predict(self, n) -> int:
        return predict(self, n)


def fit_knn(train: ObservationSet, k: int = 1, use_corrected: bool = False) -> HeuristicModel:
    if len(train) == 0:
        raise EmptyTrainingSet("cannot fit on an empty observation set")
    if k > len(train):
        raise KTooLarge(f"k={k} exceeds the {len(train)} training rows")
    return HeuristicModel(
        tuple(train.ns), tuple(train.labels(use_corrected)), k,
        metadata={
            "dataset": train.digest(use_corrected),
            "device": train.device,
            "precision": train.precision,
            "kind": train.kind,
            "labels": "corrected" if use_corrected else "observed",
        },
    )


def _neighbours(model: HeuristicModel, n: float) -> np.ndarray:
    feats = np.log10(np.asarray(model.ns, dtype=np.float64))
    dist = np.abs(feats - math.log10(n))
    # distance first, then the smaller N
    return np.lexsort((np.asarray(model.ns), dist))[:model.k]


def _mode(values: Iterable[int]) -> int:
    """Most frequent value; ties go to the smaller value."""
    counts = Counter(values)
    return max(counts, key=lambda lab: (counts[lab], -lab))


def _vote(labels: Sequence[int]) -> int:
    """Most frequent label among neighbours listed nearest first; ties go to the
    label met first.  This keeps k=2 identical to k=1."""
    counts = Counter(labels)
    top = max(counts.values())
    return next(lab for lab in labels if counts[lab] == top)


def predict(model: HeuristicModel, n) -> int:
    if n < 1:
        raise ValueError(f"N must be >= 1, got {n}")
    return _vote([model.labels[i] for i in _neighbours(model, n)])


# -- evaluation ----------------------------------------------------------------


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.25
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not 0 < self.test_fraction < 1:
            raise ValueError(f"test fraction must lie in (0, 1), got {self.test_fraction}")


def split(data: ObservationSet, spec: SplitSpec = SplitSpec(), use_corrected: bool = False):
    """Shuffle into ``(train, test)``; ``round(fraction * len)`` rows go to test.

    With ``spec.stratified`` one row of every label is held back for training
    before the test rows are drawn, so train always covers the label domain.
    """
    n = len(data)
    n_test = math.floor(spec.test_fraction * n + 0.5)
    rng = np.random.default_rng(spec.seed)
    if spec.stratified:
        labels = data.labels(use_corrected)
        groups: dict[int, list[int]] = {}
        for i, lab in enumerate(labels):
            groups.setdefault(lab, []).append(i)
        pool = []
        for lab in sorted(groups):
            idx = rng.permutation(groups[lab])
            pool.extend(int(i) for i in idx[1:])
        if len(pool) < n_test:
            raise LabelTooRare(
                f"only {len(pool)} rows can go to test without losing a label; {n_test} needed")
        test_idx = [int(i) for i in rng.permutation(pool)[:n_test]]
    else:
        test_idx = [int(i) for i in rng.permutation(n)[:n_test]]
    chosen = set(test_idx)
    train_idx = [i for i in range(n) if i not in chosen]
    return data.take(train_idx), data.take(test_idx)


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    null_accuracy: float
    rows: tuple[tuple[int, int, int, bool], ...]  # (N, true, predicted, correct)

    def misses(self):
        return [r for r in self.rows if not r[3]]


def accuracy(model: HeuristicModel, test: ObservationSet, use_corrected: bool = False) -> float:
    if len(test) == 0:
        raise EmptyTestSet("accuracy of an empty test set is undefined")
    truth = test.labels(use_corrected)
    hits = sum(predict(model, n) == lab for n, lab in zip(test.ns, truth))
    return hits / len(test)


def null_accuracy(train: ObservationSet, test: ObservationSet, use_corrected: bool = False) -> float:
    """Accuracy of always answering the most frequent training label."""
    if len(train) == 0:
        raise EmptyTrainingSet("null accuracy needs a training set")
    if len(test) == 0:
        raise EmptyTestSet("null accuracy of an empty test set is undefined")
    modal = _mode(train.labels(use_corrected))
    return sum(lab == modal for lab in test.labels(use_corrected)) / len(test)


def evaluate(model: HeuristicModel, train: ObservationSet, test: ObservationSet,
             use_corrected: bool = False) -> MetricsReport:
    truth = test.labels(use_corrected)
    rows = tuple((n, lab, predict(model, n), predict(model, n) == lab)
                 for n, lab in zip(test.ns, truth))
    return MetricsReport(accuracy(model, test, use_corrected),
                         null_accuracy(train, test, use_corrected), rows)


def confusion(model: HeuristicModel, data: ObservationSet, use_corrected: bool = False):
    """Counts of ``(true, predicted)`` pairs, sorted."""
    pairs = Counter((lab, predict(model, n))
                    for n, lab in zip(data.ns, data.labels(use_corrected)))
    return sorted(pairs.items())


def leave_one_out_accuracy(data: ObservationSet, k: int = 1, use_corrected: bool = False) -> float:
    """Seed-free accuracy: each row predicted by a model fitted on all the others."""
    if len(data) < 2:
        raise TooFewRows("leave-one-out needs at least two rows")
    hits = 0
    labels = data.labels(use_corrected)
    for i in range(len(data)):
        rest = data.take(j for j in range(len(data)) if j != i)
        model = fit_knn(rest, min(k, len(rest)), use_corrected)
        hits += predict(model, data.ns[i]) == labels[i]
    return hits / len(data)


def grid_search_k(data: ObservationSet, folds: int = 5, seed: int = 0,
                  use_corrected: bool = False) -> int:
    """Smallest k in ``1..#labels`` with the best mean cross-validated accuracy."""
    if folds < 2 or len(data) < folds:
        raise TooFewRows(f"{len(data)} rows cannot form {folds} folds")
    rng = np.random.default_rng(seed)
    parts = np.array_split(rng.permutation(len(data)), folds)
    n_labels = len(set(data.labels(use_corrected)))

    best_k, best_score = 1, Fraction(-1)
    for k in range(1, n_labels + 1):
        score = Fraction(0)
        for part in parts:
            held = set(int(i) for i in part)
            train = data.take(i for i in range(len(data)) if i not in held)
            test = data.take(held)
            if k > len(train):
                break
            model = fit_knn(train, k, use_corrected)
            truth = test.labels(use_corrected)
            hits = sum(predict(model, n) == lab for n, lab in zip(test.ns, truth))
            score += Fraction(hits, len(test))
        else:
            if score > best_score:
                best_k, best_score = k, score
    return best_k


# -- plateau correction ------------------------------------------------------


def candidate_sets(data: ObservationSet, tolerance: float) -> list[frozenset[int]]:
    """Per row, every candidate within ``(1 + tolerance)`` of the row's best time."""
    sets = []
    for r in data.rows:
        if not r.times:
            raise MissingTimes(f"N={r.n} has no per-candidate timings")
        limit = (1.0 + tolerance) * min(r.times.values())
        sets.append(frozenset(m for m, t in r.times.items() if t <= limit))
    return sets


def plateau_correct(data: ObservationSet, tolerance: float = 0.03) -> list[int]:
    """Relabel rows as a step function with as few steps as the timings allow.

    Rows (in order of N) are cut into runs that share one label taken from the
    intersection of their candidate sets.  Among segmentations with the fewest
    runs, prefer fewer decreases of the label from one run to the next, then
    the lexicographically smallest labels.
    """
    cands = candidate_sets(data, tolerance)
    n = len(cands)
    domain = sorted(set().union(*cands)) if cands else []
    # best[i][prev] -> (runs, decreases, labels) covering rows i..n-1
    best: list[dict] = [dict() for _ in range(n + 1)]
    for prev in [None] + domain:
        best[n][prev] = (0, 0, ())
    for i in range(n - 1, -1, -1):
        for prev in [None] + domain:
            top = None
            common = cands[i]
            for j in range(i + 1, n + 1):
                if j > i + 1:
                    common = common & cands[j - 1]
                if not common:
                    break
                for lab in common:
                    runs, dec, tail = best[j][lab]
                    cand = (runs + 1, dec + (prev is not None and lab < prev), (lab,) * (j - i) + tail)
                    if top is None or cand < top:
                        top = cand
            best[i][prev] = top
    return list(best[0][None][2])


def count_runs(labels: Sequence[int]) -> int:
    return sum(1 for i, lab in enumerate(labels) if i == 0 or lab != labels[i - 1])


# -- recursion ---------------------------------------------------------------


def fit_depth_model(data: ObservationSet, k: int = 1) -> HeuristicModel:
    labels = set(data.labels())
    if labels - set(range(MAX_DEPTH + 1)):
        raise DepthOutOfRange(f"depth labels must lie in 0..{MAX_DEPTH}, got {sorted(labels)}")
    model = fit_knn(data, k)
    return replace(model, label_domain=tuple(range(MAX_DEPTH + 1)),
                   metadata={**model.metadata, "kind": "R"})


def recursion_sizes(n: int, depth: int, size_model: HeuristicModel) -> RecursionPolicy:
    """Per-level sub-system sizes for ``depth`` recursions of a size-``n`` solve.

    Level 0 and every level from 2 on use the size model on that level's system
    size; level 1 uses the model only when it is the last level and is fixed to
    10 otherwise.  Level ``l+1`` has size ``2 * blocks(l)``.
    """
    if not 0 <= depth <= MAX_DEPTH:
        raise DepthOutOfRange(f"depth must lie in 0..{MAX_DEPTH}, got {depth}")
    sizes = []
    level_n = n
    for level in range(depth + 1):
        if level == 1 and depth >= 2:
            m = FIXED_SECOND_LEVEL_M
        else:
            m = predict(size_model, level_n)
        sizes.append(m)
        if level < depth:
            level_n = 2 * make_plan(level_n, m).num_blocks
    return RecursionPolicy(tuple(sizes))


def level_sizes(n: int, policy: RecursionPolicy) -> list[int]:
    """System size at every partition level of ``policy``."""
    out = [n]
    for m in policy.sizes[:-1]:
        out.append(2 * make_plan(out[-1], m).num_blocks)
    return out


@dataclass(frozen=True)
class AlignmentReport:
    entries: tuple[tuple[int, int, bool], ...]  # (N, predicted m, aligned)
    multiple: int
    min_n: int

    @property
    def all_aligned(self) -> bool:
        return all(e[2] for e in self.entries)

    def misaligned(self):
        return [e for e in self.entries if not e[2]]

    def summary(self) -> str:
        if not self.entries:
            return f"no training sizes >= {self.min_n}"
        bad = self.misaligned()
        return (f"{len(self.entries) - len(bad)}/{len(self.entries)} predictions for N >= "
                f"{self.min_n} are multiples of {self.multiple}")


def alignment_report(model: HeuristicModel, min_n: int = 800_000, multiple: int = 32) -> AlignmentReport:
    entries = []
    for n in sorted(model.ns):
        if n >= min_n:
            m = predict(model, n)
            entries.append((n, m, m % multiple == 0))
    return AlignmentReport(tuple(entries), multiple, min_n)
