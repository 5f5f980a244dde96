"""Feature generation, selection filters and model-matrix assembly."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .series import EmbeddingDataset
from .summaries import SUMMARIES, summarise_rows
from .transforms import TRANSFORMS, TransformContext, transform_rows

METHODS = ("AR", "VEST", "AR+VEST", "AR+BT", "AR+BF")
METHOD_ALIASES = {"AR+BS": "AR+BF"}


class SelectionError(ValueError):
    pass


def feature_name(transform_id: str, summary_id: str) -> str:
    return f"{transform_id}.{summary_id}"


def split_name(name: str) -> tuple[str, str]:
    head, _, tail = name.partition(".")
    return head, tail


@dataclass(frozen=True)
class FeatureMatrix:
    """Named feature columns aligned with target positions ``index``.

    Missing cells are NaN.
    """

    columns: tuple[str, ...]
    values: np.ndarray
    index: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        if len(set(self.columns)) != len(self.columns):
            raise ValueError("duplicate column names")
        if self.values.shape != (len(self.index), len(self.columns)):
            raise ValueError("values shape does not match index/columns")

    @property
    def shape(self):
        return self.values.shape

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]

    def rows(self, mask) -> "FeatureMatrix":
        return FeatureMatrix(self.columns, self.values[mask], self.index[mask])

    def select(self, names: Sequence[str]) -> "FeatureMatrix":
        pos = {c: i for i, c in enumerate(self.columns)}
        missing = [n for n in names if n not in pos]
        if missing:
            raise KeyError(f"columns not in matrix: {missing[:5]}")
        return FeatureMatrix(tuple(names), self.values[:, [pos[n] for n in names]], self.index)

    def to_csv(self, path, header_lines: Iterable[str] = ()):
        with open(path, "w", newline="") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("t",) + self.columns)
            for t, row in zip(self.index, self.values):
                w.writerow([int(t)] + ["" if np.isnan(v) else repr(float(v)) for v in row])


def generate_features(dataset: EmbeddingDataset, ctx: TransformContext,
                      transforms: Optional[Sequence[str]] = None) -> FeatureMatrix:
    """Every enabled transform crossed with every summary.

    Column order is transform catalog order, then summary catalog order.
    SIN/COS are skipped when ``ctx`` has no frequency.
    """
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    enabled = ctx.enabled()
    chosen = [t for t in (transforms or TRANSFORMS) if t in enabled]
    V = dataset.chronological
    first = dataset.t - dataset.p
    cols, blocks = [], []
    for tid in chosen:
        R, ok = transform_rows(tid, V, ctx, first)
        if R is None:
            block = np.full((len(dataset), len(SUMMARIES)), np.nan)
        else:
            block = summarise_rows(R)
            block[~ok] = np.nan
        blocks.append(block)
        cols.extend(feature_name(tid, s) for s in SUMMARIES)
    return FeatureMatrix(tuple(cols), np.hstack(blocks), np.asarray(dataset.t))


@dataclass(frozen=True)
class SelectionConfig:
    na_perc: float = 70.0
    u_perc: float = 1.0
    corr_perc: float = 95.0

    def __post_init__(self):
        for k in ("na_perc", "u_perc", "corr_perc"):
            v = getattr(self, k)
            if not 0 < v <= 100:
                raise ValueError(f"{k} must lie in (0, 100], got {v}")


@dataclass
class SelectionModel:
    kept_columns: list[str]
    imputation_medians: dict[str, float]
    drop_log: dict[str, str] = field(default_factory=dict)
    input_columns: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "input_columns": list(self.input_columns),
            "kept_columns": list(self.kept_columns),
            "imputation_medians": {k: float(self.imputation_medians[k]) for k in self.kept_columns},
            "drop_log": {k: self.drop_log[k] for k in self.input_columns if k in self.drop_log},
        }

    def to_json(self, **extra) -> str:
        doc = dict(extra)
        doc.update(self.to_dict())
        return json.dumps(doc, indent=2)

    @classmethod
    def from_dict(cls, doc: dict) -> "SelectionModel":
        return cls(list(doc["kept_columns"]), dict(doc["imputation_medians"]),
                   dict(doc.get("drop_log", {})), list(doc.get("input_columns", [])))


def _correlation(A: np.ndarray) -> np.ndarray:
    C = A - A.mean(axis=0)
    norm = np.sqrt((C * C).sum(axis=0))
    live = norm > 0
    R = np.zeros((A.shape[1], A.shape[1]))
    Cl = C[:, live] / norm[live]
    R[np.ix_(live, live)] = Cl.T @ Cl
    np.fill_diagonal(R, 1.0)
    return np.clip(R, -1.0, 1.0)


def _impute(values, medians):
    out = values.copy()
    nan = np.isnan(out)
    if nan.any():
        out[nan] = np.broadcast_to(medians, out.shape)[nan]
    return out


def fit_selection(F: FeatureMatrix, cfg: SelectionConfig = SelectionConfig(),
                  uniqueness: bool = True, correlation: bool = True) -> SelectionModel:
    """Fit the missing-value, uniqueness and correlation filters on training rows.

    Correlated pairs are resolved greedily: the pair with the largest
    absolute correlation is handled first, and the member with the larger
    mean absolute correlation to the remaining columns is dropped (the later
    column on ties).
    """
    n, c = F.values.shape
    if n < 2:
        raise SelectionError("selection needs at least two training rows")
    cols = list(F.columns)
    drop_log: dict[str, str] = {}
    na_frac = np.isnan(F.values).mean(axis=0)
    keep = [j for j in range(c) if na_frac[j] * 100 <= cfg.na_perc]
    for j in set(range(c)) - set(keep):
        drop_log[cols[j]] = "NA"
    with np.errstate(all="ignore"):
        medians = np.nanmedian(F.values[:, keep], axis=0) if keep else np.empty(0)
    med = dict(zip((cols[j] for j in keep), medians))
    X = _impute(F.values[:, keep], medians)

    if uniqueness and keep:
        uniq = np.array([np.unique(X[:, i]).size for i in range(X.shape[1])])
        low = uniq * 100.0 / n < cfg.u_perc
        for i in np.flatnonzero(low):
            drop_log[cols[keep[i]]] = "LOW_UNIQUE"
        keep = [j for j, bad in zip(keep, low) if not bad]
        X = X[:, ~low]

    if correlation and len(keep) > 1:
        R = np.abs(_correlation(X))
        np.fill_diagonal(R, 0.0)
        alive = np.ones(len(keep), dtype=bool)
        thr = cfg.corr_perc / 100.0
        while True:
            sub = np.where(np.outer(alive, alive), R, 0.0)
            a, b = np.unravel_index(np.argmax(sub), sub.shape)
            if sub[a, b] <= thr:
                break
            a, b = min(a, b), max(a, b)
            live_n = alive.sum() - 1
            mean_a = sub[a].sum() / live_n
            mean_b = sub[b].sum() / live_n
            loser, winner = (a, b) if mean_a > mean_b else (b, a)
            alive[loser] = False
            drop_log[cols[keep[loser]]] = f"CORRELATED(with={cols[keep[winner]]})"
        keep = [j for j, ok in zip(keep, alive) if ok]

    if not keep:
        raise SelectionError("selection removed every feature")
    kept = [cols[j] for j in keep]
    return SelectionModel(kept, {k: float(med[k]) for k in kept}, drop_log, cols)


def apply_selection(model: SelectionModel, F: FeatureMatrix) -> FeatureMatrix:
    """Keep the fitted columns and fill gaps with the stored training medians."""
    sub = F.select(model.kept_columns)
    medians = np.array([model.imputation_medians[k] for k in model.kept_columns])
    return FeatureMatrix(sub.columns, _impute(sub.values, medians), sub.index)


def canonical_method(name: str) -> str:
    key = name.strip().upper()
    key = METHOD_ALIASES.get(key, key)
    if key not in METHODS:
        raise ValueError(f"unknown method {name!r}; valid: {', '.join(METHODS)}")
    return key


def assemble(method: str, lags: EmbeddingDataset, Z: Optional[FeatureMatrix] = None,
             subset: Optional[Sequence[str]] = None) -> tuple[np.ndarray, list[str]]:
    """Model matrix and column names for one method.

    ``subset`` names the feature columns used by AR+BT / AR+BF.
    """
    method = canonical_method(method)
    if method == "AR":
        return np.asarray(lags.X), lags.lag_names
    if Z is None:
        raise ValueError(f"{method} needs a feature matrix")
    if len(Z.index) != len(lags.t) or not np.array_equal(Z.index, lags.t):
        raise ValueError("feature rows are not aligned with the lag rows")
    if method in ("AR+BT", "AR+BF"):
        if subset is None:
            raise ValueError(f"{method} needs an importance-derived feature subset")
        Z = Z.select(list(subset))
    if method == "VEST":
        return Z.values, list(Z.columns)
    return np.hstack([lags.X, Z.values]), lags.lag_names + list(Z.columns)
