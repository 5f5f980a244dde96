"""RReliefF feature importance and rank aggregation by representation/summary."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from .pipeline import split_name
from .summaries import SUMMARIES
from .transforms import TRANSFORMS

LAG_GROUP = "LAG"
SCOPES = ("ALL", "BY_TRANSFORM", "BY_SUMMARY")


@dataclass(frozen=True)
class ImportanceReport:
    per_feature: dict
    per_transform: dict
    per_summary: dict
    ranks: dict

    @classmethod
    def from_scores(cls, names: Sequence[str], scores) -> "ImportanceReport":
        names = list(names)
        scores = [float(s) for s in scores]
        per_feature = dict(zip(names, scores))
        return cls(per_feature, _group_means(per_feature, _transform_of),
                   _group_means(per_feature, _summary_of), dict(zip(names, _ranks(scores))))

    def to_rows(self):
        return [(n, s, self.ranks[n]) for n, s in self.per_feature.items()]

    def to_csv(self, path, header_lines=()):
        with open(path, "w", newline="") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("feature", "score", "rank"))
            for n, s, r in self.to_rows():
                w.writerow((n, repr(s), repr(float(r))))

    def to_json(self, **extra) -> str:
        doc = dict(extra)
        doc.update({"per_feature": self.per_feature, "per_transform": self.per_transform,
                    "per_summary": self.per_summary, "ranks": self.ranks})
        return json.dumps(doc, indent=2)


def _transform_of(name):
    head, _ = split_name(name)
    return LAG_GROUP if head == LAG_GROUP else head


def _summary_of(name):
    head, tail = split_name(name)
    return None if head == LAG_GROUP else tail


def _group_means(per_feature, key):
    groups: dict = {}
    for name, score in per_feature.items():
        g = key(name)
        if g is not None:
            groups.setdefault(g, []).append(score)
    order = [LAG_GROUP] + list(TRANSFORMS) + list(SUMMARIES)
    known = [g for g in order if g in groups] + sorted(g for g in groups if g not in order)
    return {g: float(np.mean(groups[g])) for g in known}


def _ranks(scores) -> list:
    """Rank 1 = highest score, ties averaged."""
    return [float(r) for r in rankdata(-np.asarray(scores, dtype=float), method="average")]


def _minmax(a):
    lo, hi = a.min(axis=0), a.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return (a - lo) / span


def rrelieff(X, y, names: Optional[Sequence[str]] = None, k: int = 10,
             m: Optional[int] = None, sigma: float = 20.0, seed: int = 0) -> ImportanceReport:
    """Regression ReliefF scores.

    Features and target are min-max scaled; neighbours are the ``k`` nearest
    rows by Euclidean distance, weighted by ``exp(-(rank/sigma)**2)``
    normalised over the ``k`` neighbours. ``m`` instances are sampled with
    ``seed`` (all rows when ``m`` is None or at least the row count).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, f = X.shape
    if names is None:
        names = [f"x{j + 1}" for j in range(f)]
    if y.size != n:
        raise ValueError("X and y lengths differ")
    if not np.all(np.isfinite(X)):
        raise ValueError("RReliefF needs a fully numeric matrix")
    if n < k + 1:
        raise ValueError(f"need at least k+1={k + 1} rows")
    if np.ptp(y) == 0:
        raise ValueError("target constant")
    Xn, yn = _minmax(X), _minmax(y)

    if m is None or m >= n:
        sample = np.arange(n)
    else:
        sample = np.sort(np.random.default_rng(seed).choice(n, size=m, replace=False))
    w = np.exp(-(np.arange(1, k + 1) / sigma) ** 2)
    w /= w.sum()

    n_dc = 0.0
    n_da = np.zeros(f)
    n_dcda = np.zeros(f)
    sq = (Xn * Xn).sum(axis=1)
    for chunk in np.array_split(sample, max(1, len(sample) // 256)):
        D = sq[chunk, None] + sq[None, :] - 2.0 * Xn[chunk] @ Xn.T
        D[np.arange(len(chunk)), chunk] = np.inf
        nbrs = np.argsort(D, axis=1, kind="stable")[:, :k]
        dy = np.abs(yn[chunk, None] - yn[nbrs]) * w
        dx = np.abs(Xn[chunk][:, None, :] - Xn[nbrs])
        n_dc += dy.sum()
        n_da += np.einsum("ik,ikf->f", np.broadcast_to(w, dy.shape), dx)
        n_dcda += np.einsum("ik,ikf->f", dy, dx)
    m_eff = len(sample)
    with np.errstate(divide="ignore", invalid="ignore"):
        W = n_dcda / n_dc - (n_da - n_dcda) / (m_eff - n_dc)
    W = np.where(np.isfinite(W), W, 0.0)
    return ImportanceReport.from_scores(names, W)


def rank_features(report: ImportanceReport, scope: str = "ALL") -> list[tuple[str, float, float]]:
    """``(name, score, rank)`` rows sorted by rank."""
    scope = scope.upper()
    if scope == "ALL":
        table = report.per_feature
    elif scope == "BY_TRANSFORM":
        table = report.per_transform
    elif scope == "BY_SUMMARY":
        table = report.per_summary
    else:
        raise ValueError(f"unknown scope {scope!r}; valid: {', '.join(SCOPES)}")
    if not table:
        raise ValueError("empty importance report")
    names = list(table)
    ranks = _ranks([table[n] for n in names])
    rows = [(n, table[n], r) for n, r in zip(names, ranks)]
    return sorted(rows, key=lambda row: (row[2], names.index(row[0])))


def best_transform_subset(report: ImportanceReport) -> str:
    """Transform with the highest mean feature importance (catalog order on ties)."""
    candidates = [t for t in TRANSFORMS if t in report.per_transform]
    if not candidates:
        raise ValueError("no transform scores in report")
    scores = [report.per_transform[t] for t in candidates]
    return candidates[int(np.argmax(scores))]


def best_transform_per_summary(report: ImportanceReport) -> dict[str, str]:
    """For each summary, the transform whose feature scores highest."""
    out = {}
    for s in SUMMARIES:
        best, best_score = None, -np.inf
        for t in TRANSFORMS:
            score = report.per_feature.get(f"{t}.{s}")
            if score is not None and score > best_score:
                best, best_score = t, score
        if best is not None:
            out[s] = best
    return out
