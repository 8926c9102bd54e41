"""Abstraction of line segments into a finite alphabet.

Segments become (slope, offset, duration) points.  Clustering runs on
z-normalized coordinates so that duration, whose scale is much larger than
the other two, does not dominate; letter cubes are reported in raw units.
"""
from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from shapemine.segmentation import Segmentation

MAX_ITER = 300


@dataclass(frozen=True)
class FeaturePoint:
    a: float
    b: float
    d: float
    normalized: tuple[float, float, float]
    trace_id: str
    segment: int


@dataclass(frozen=True, eq=False)
class FeatureSet:
    """Pooled (a, b, d) points of every segment of every trace, in order."""

    raw: np.ndarray
    normalized: np.ndarray
    refs: tuple[tuple[str, int], ...]
    mean: np.ndarray
    std: np.ndarray

    def __len__(self) -> int:
        return self.raw.shape[0]

    def __getitem__(self, k: int) -> FeaturePoint:
        a, b, d = self.raw[k].tolist()
        trace_id, seg = self.refs[k]
        return FeaturePoint(a, b, d, tuple(self.normalized[k].tolist()), trace_id, seg)


def featurize(segmentations: Sequence[Segmentation], trace_ids: Optional[Sequence[str]] = None) -> FeatureSet:
    if trace_ids is None:
        trace_ids = [str(k) for k in range(len(segmentations))]
    if len(trace_ids) != len(segmentations):
        raise ValueError("one trace id per segmentation is required")
    rows, refs = [], []
    for tid, seg in zip(trace_ids, segmentations):
        for k, fit in enumerate(seg.fits):
            rows.append((fit.a, fit.b, fit.d))
            refs.append((tid, k))
    if not rows:
        raise ValueError("no segments to featurize")
    raw = np.array(rows, dtype=np.float64)
    mean = raw.mean(axis=0)
    std = raw.std(axis=0)
    safe = np.where(std > 0, std, 1.0)
    normalized = np.where(std > 0, (raw - mean) / safe, 0.0)
    return FeatureSet(raw, normalized, tuple(refs), mean, std)


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    wcss: float
    history: list[float] = field(default_factory=list)
    iterations: int = 0


def _sq_dists(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - centers[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _wcss(x, labels, centers) -> float:
    diff = x - centers[labels]
    return float(np.einsum("ij,ij->", diff, diff))


def kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = _sq_dists(x, x[chosen])[:, 0]
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))
        chosen.append(idx)
        d2 = np.minimum(d2, _sq_dists(x, x[idx:idx + 1])[:, 0])
    return x[chosen].copy()


def _update(x, labels, k):
    centers = np.zeros((k, x.shape[1]))
    counts = np.bincount(labels, minlength=k)
    np.add.at(centers, labels, x)
    nonempty = counts > 0
    centers[nonempty] /= counts[nonempty, None]
    return centers, counts


def _repair(x, labels, centers, counts):
    """Give each empty cluster the point farthest from its own centroid."""
    for c in np.flatnonzero(counts == 0):
        dist = np.einsum("ij,ij->i", x - centers[labels], x - centers[labels])
        dist[counts[labels] < 2] = -1.0
        p = int(np.argmax(dist))
        if dist[p] < 0:
            break
        old = labels[p]
        labels[p] = c
        counts[old] -= 1
        counts[c] = 1
        centers[c] = x[p]
        members = labels == old
        centers[old] = x[members].mean(axis=0)
    return labels, centers, counts


def kmeans(x: np.ndarray, k: int, seed: int = 0, init: Optional[np.ndarray] = None) -> KMeansResult:
    """Lloyd's algorithm with k-means++ seeding (or explicit ``init`` centers).

    Stops at an assignment fixpoint or after 300 iterations.  On distance
    ties a point keeps its current cluster, so WCSS never increases.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}]")
    if init is None:
        centers = kmeans_pp_init(x, k, np.random.default_rng(seed))
    else:
        centers = np.array(init, dtype=np.float64)
    labels = np.argmin(_sq_dists(x, centers), axis=1)
    history = []
    for it in range(1, MAX_ITER + 1):
        centers, counts = _update(x, labels, k)
        labels, centers, counts = _repair(x, labels, centers, counts)
        history.append(_wcss(x, labels, centers))
        d = _sq_dists(x, centers)
        new = np.argmin(d, axis=1)
        keep = d[np.arange(n), labels] <= d[np.arange(n), new]
        new = np.where(keep, labels, new)
        if np.array_equal(new, labels):
            break
        labels = new
    return KMeansResult(labels, centers, history[-1], history, it)


def wcss_curve(x: np.ndarray, k_max: int, seed: int = 0) -> list[KMeansResult]:
    """Best clustering found for each k in 1..k_max.

    Each k keeps the better of a k-means++ run and a run warm-started from
    the previous k's centers plus the point farthest from them; the warm
    start cannot do worse than k-1, so the curve is non-increasing.
    """
    x = np.asarray(x, dtype=np.float64)
    if not 1 <= k_max <= x.shape[0]:
        raise ValueError(f"k_max must lie in [1, {x.shape[0]}]")
    results = [kmeans(x, 1, seed)]
    for k in range(2, k_max + 1):
        prev = results[-1]
        fresh = kmeans(x, k, seed)
        resid = np.einsum("ij,ij->i", x - prev.centers[prev.labels], x - prev.centers[prev.labels])
        far = int(np.argmax(resid))
        warm = kmeans(x, k, seed, init=np.vstack([prev.centers, x[far]]))
        results.append(fresh if fresh.wcss <= warm.wcss else warm)
    return results


def elbow(curve: Sequence[float], wcss_threshold: float) -> int:
    """Elbow rule on the WCSS curve (``curve[k-1]`` is WCSS for k clusters).

    Returns the first k whose next drop ``WCSS(k) - WCSS(k+1)`` is below the
    threshold, i.e. the last k that was still worth adding.
    """
    for k in range(1, len(curve)):
        if curve[k - 1] - curve[k] < wcss_threshold:
            return k
    return len(curve)


def choose_k(x: np.ndarray, wcss_threshold: float, k_max: Optional[int] = None, seed: int = 0) -> int:
    x = np.asarray(x, dtype=np.float64)
    if k_max is None:
        k_max = min(10, x.shape[0])
    return elbow([r.wcss for r in wcss_curve(x, k_max, seed)], wcss_threshold)


@dataclass(frozen=True)
class Letter:
    name: str
    cube: tuple[tuple[float, float], tuple[float, float], tuple[float, float]]
    count: int

    def contains(self, a: float, b: float, d: float) -> bool:
        return all(lo <= x <= hi for x, (lo, hi) in zip((a, b, d), self.cube))


@dataclass(frozen=True)
class Word:
    trace_id: str
    letters: tuple[str, ...]

    def __str__(self) -> str:
        return " ".join(self.letters)


def letter_name(k: int) -> str:
    """A, B, ..., Z, AA, AB, ... (spreadsheet column style)."""
    name = ""
    k += 1
    while k:
        k, r = divmod(k - 1, 26)
        name = string.ascii_uppercase[r] + name
    return name


def build_alphabet(features: FeatureSet, labels) -> tuple[list[Letter], list[Word]]:
    """Name clusters by first appearance and spell every trace as a word."""
    labels = np.asarray(labels)
    if labels.shape[0] != len(features):
        raise ValueError("one cluster label per feature point is required")
    names: dict[int, str] = {}
    for c in labels.tolist():
        if c not in names:
            names[c] = letter_name(len(names))
    letters = []
    for c, name in names.items():
        pts = features.raw[labels == c]
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        cube = tuple((float(l), float(h)) for l, h in zip(lo, hi))
        letters.append(Letter(name, cube, int(pts.shape[0])))
    words: list[Word] = []
    current, spelled = None, []
    for (tid, _), c in zip(features.refs, labels.tolist()):
        if tid != current:
            if current is not None:
                words.append(Word(current, tuple(spelled)))
            current, spelled = tid, []
        spelled.append(names[c])
    words.append(Word(current, tuple(spelled)))
    return letters, words
