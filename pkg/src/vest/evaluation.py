"""Forecast scoring, method comparison and the experiment protocols."""
from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from .importance import best_transform_per_summary, best_transform_subset, rrelieff, ImportanceReport
from .learners import fit_lasso, lasso_path, lasso_path_and_select, predict
from .pipeline import (FeatureMatrix, SelectionConfig, apply_selection, assemble, canonical_method,
                       fit_selection, generate_features)
from .series import HoldoutWindow, TimeSeries, embed, repeated_holdout, single_holdout
from .transforms import TransformContext, boxcox_shift

log = logging.getLogger(__name__)

BENCHMARK = "AR+VEST"
ROPE = (-2.5, 2.5)
MIN_DRAWS = 10_000
SAMPLE_SIZES = tuple(range(100, 3001, 100))


# ------------------------------------------------------------------- metrics

def mase(forecasts, actuals, train_values) -> float:
    """Mean absolute error scaled by the in-sample one-step naive MAE."""
    f = np.asarray(forecasts, dtype=float)
    a = np.asarray(actuals, dtype=float)
    tr = np.asarray(train_values, dtype=float)
    if f.size == 0 or f.shape != a.shape:
        raise ValueError("forecasts and actuals must be non-empty and aligned")
    if tr.size < 2:
        raise ValueError("need at least two training values")
    scale = np.mean(np.abs(np.diff(tr)))
    if scale == 0:
        raise ValueError("constant training series")
    return float(np.mean(np.abs(f - a)) / scale)


def percentage_difference(loss, benchmark_loss) -> float:
    if benchmark_loss <= 0:
        raise ValueError("benchmark loss must be positive")
    return (loss - benchmark_loss) / benchmark_loss * 100.0


def average_rank(losses: dict) -> dict[str, tuple[float, float]]:
    """``losses[series][method]`` -> ``{method: (mean rank, sd)}``.

    Ranks are per series, ascending loss, ties averaged; sd is the sample
    standard deviation across series (0 for a single series).
    """
    if not losses:
        raise ValueError("no losses to rank")
    methods = list(next(iter(losses.values())))
    per_method = {m: [] for m in methods}
    for series, row in losses.items():
        if set(row) != set(methods):
            raise ValueError(f"series {series!r} is not scored on every method")
        r = rankdata([row[m] for m in methods], method="average")
        for m, v in zip(methods, r):
            per_method[m].append(float(v))
    out = {}
    for m, v in per_method.items():
        sd = float(np.std(v, ddof=1)) if len(v) > 1 else 0.0
        out[m] = (float(np.mean(v)), sd)
    return out


@dataclass(frozen=True)
class BayesSignResult:
    """Posterior probabilities that differences fall left of, inside, or
    right of the ROPE. Left means the compared method has the lower loss."""

    p_left: float
    p_rope: float
    p_right: float
    rope: tuple[float, float] = ROPE

    @property
    def p_win(self) -> float:
        return self.p_left

    @property
    def p_lose(self) -> float:
        return self.p_right


def bayes_sign_test(diffs, rope=ROPE, draws: int = 100_000, seed: int = 0,
                    prior=(0.0, 1.0, 0.0)) -> BayesSignResult:
    """Bayes sign test with a Dirichlet posterior over (left, rope, right).

    The default prior puts one pseudo-observation inside the ROPE.
    Probabilities are Monte-Carlo fractions of draws in which each region
    has the largest mass; exact ties share the draw equally.
    """
    d = np.asarray(diffs, dtype=float)
    lo, hi = rope
    if d.size == 0:
        raise ValueError("need at least one difference")
    if lo > hi:
        raise ValueError("rope low bound exceeds high bound")
    if draws < MIN_DRAWS:
        raise ValueError(f"draws must be >= {MIN_DRAWS}")
    counts = np.array([(d < lo).sum(), ((d >= lo) & (d <= hi)).sum(), (d > hi).sum()], float)
    alpha = counts + np.asarray(prior, dtype=float)
    rng = np.random.default_rng(seed)
    g = np.zeros((draws, 3))
    for j in range(3):
        if alpha[j] > 0:
            g[:, j] = rng.gamma(alpha[j], 1.0, size=draws)
    theta = g / g.sum(axis=1, keepdims=True)
    top = theta == theta.max(axis=1, keepdims=True)
    share = top / top.sum(axis=1, keepdims=True)
    p = share.mean(axis=0)
    p = p / p.sum()
    return BayesSignResult(float(p[0]), float(p[1]), float(p[2]), (float(lo), float(hi)))


# ----------------------------------------------------------------- protocol

@dataclass(frozen=True)
class ExperimentSettings:
    methods: tuple = ("AR", "VEST", "AR+VEST", "AR+BT", "AR+BF")
    repetitions: int = 10
    train_frac: float = 0.6
    test_frac: float = 0.1
    validation_frac: float = 0.1
    p_min: int = 10
    p_max: int = 30
    selection: SelectionConfig = SelectionConfig()
    seed: int = 0
    random_origins: bool = False
    relief_k: int = 10
    benchmark: str = BENCHMARK
    rope: tuple = ROPE
    draws: int = 100_000
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(canonical_method(m) for m in self.methods))
        if self.p_min < 1 or self.p_max < self.p_min:
            raise ValueError("need 1 <= p_min <= p_max")

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("jobs")
        return d


def feasible_p_max(window: HoldoutWindow, p_max: int) -> int:
    """Largest p whose fitting block still has at least p rows."""
    n_fit = window.fit[1] - window.fit[0]
    return min(p_max, n_fit // 2)


def select_embedding_dimension(series, window: HoldoutWindow, p_min: int = 10, p_max: int = 30,
                               learner: Callable = lasso_path_and_select) -> int:
    """Embedding dimension with the lowest validation MAE for a pure lag model.

    Candidates run from ``p_min`` to ``p_max``, truncated to what the fitting
    block supports. Ties go to the smaller p.
    """
    values = series.values if isinstance(series, TimeSeries) else np.asarray(series, float)
    lo, hi = window.train
    top = feasible_p_max(window, p_max)
    if top < p_min:
        raise ValueError(f"training window too short for p={p_min}")
    train = values[lo:hi]
    n_fit = window.fit[1] - lo
    best_p, best_mae = None, math.inf
    for p in range(p_min, top + 1):
        ds = embed(TimeSeries(train), p)
        fit = ds.t < n_fit
        model = learner(ds.X[fit], ds.y[fit], ds.X[~fit], ds.y[~fit])
        mae = float(np.mean(np.abs(predict(model, ds.X[~fit]) - ds.y[~fit])))
        if mae < best_mae:
            best_p, best_mae = p, mae
    return best_p


def _fit_context(train_values, frequency):
    try:
        return TransformContext.fit(train_values, frequency)
    except ValueError as exc:
        log.warning("Box-Cox lambda not fitted (%s); using lambda=1", exc)
        return TransformContext(frequency, 1.0, boxcox_shift(np.asarray(train_values, float)))


@dataclass
class WindowData:
    """Everything derived from one series and one holdout window."""

    series: TimeSeries
    window: HoldoutWindow
    p: int
    lags: object
    features: FeatureMatrix
    fit_rows: np.ndarray
    val_rows: np.ndarray
    test_rows: np.ndarray
    context: TransformContext

    @property
    def train_rows(self):
        return self.fit_rows | self.val_rows

    @property
    def train_values(self):
        lo, hi = self.window.train
        return self.series.values[lo:hi]


def prepare_window(series: TimeSeries, window: HoldoutWindow, settings: ExperimentSettings,
                   p: Optional[int] = None) -> WindowData:
    if p is None:
        p = select_embedding_dimension(series, window, settings.p_min, settings.p_max)
    lo, hi = window.train[0], window.test[1]
    ds = embed(series, p)
    ds = ds.rows((ds.t >= lo + p) & (ds.t < hi))
    ctx = _fit_context(series.values[window.train[0]:window.train[1]], series.frequency)
    F = generate_features(ds, ctx)
    t = ds.t
    return WindowData(series, window, p, ds, F,
                      (t < window.validation[0]),
                      (t >= window.validation[0]) & (t < window.train[1]),
                      (t >= window.test[0]) & (t < window.test[1]), ctx)


def _na_filtered(wd: WindowData, settings: ExperimentSettings) -> FeatureMatrix:
    """Generated features after the missing-value filter and imputation only."""
    na_model = fit_selection(wd.features.rows(wd.train_rows), settings.selection,
                             uniqueness=False, correlation=False)
    return apply_selection(na_model, wd.features)


def window_importance(wd: WindowData, settings: ExperimentSettings,
                      Z: Optional[FeatureMatrix] = None) -> ImportanceReport:
    """RReliefF over lags plus every generated feature that survives the
    missing-value filter, on the training rows of the window."""
    train = wd.train_rows
    if Z is None:
        Z = _na_filtered(wd, settings)
    X = np.hstack([wd.lags.X, Z.values])
    names = wd.lags.lag_names + list(Z.columns)
    return rrelieff(X[train], wd.lags.y[train], names, k=settings.relief_k, seed=settings.seed)


def _score(wd: WindowData, X, names) -> tuple[float, float]:
    y = wd.lags.y
    path = lasso_path(X[wd.fit_rows], y[wd.fit_rows], X[wd.val_rows], y[wd.val_rows], names)
    lam = path.model.lam
    train = wd.train_rows
    final = fit_lasso(X[train], y[train], lam, names)
    f = predict(final, X[wd.test_rows])
    return mase(f, y[wd.test_rows], wd.train_values), lam


def evaluate_window(series: TimeSeries, window: HoldoutWindow, settings: ExperimentSettings,
                    methods: Optional[Sequence[str]] = None) -> dict:
    """MASE of each method on one window, plus the chosen p and selection model."""
    methods = [canonical_method(m) for m in (methods or settings.methods)]
    wd = prepare_window(series, window, settings)
    out = {"p": wd.p, "mase": {}, "lambda": {}}
    needs_vest = any(m != "AR" for m in methods)
    Zsel = None
    if needs_vest:
        model = fit_selection(wd.features.rows(wd.train_rows), settings.selection)
        out["selection"] = model
        Zsel = apply_selection(model, wd.features)
    subsets = {}
    if any(m in ("AR+BT", "AR+BF") for m in methods):
        Zna = _na_filtered(wd, settings)
        rep = window_importance(wd, settings, Zna)
        bt = best_transform_subset(rep)
        subsets["AR+BT"] = [c for c in Zna.columns if c.startswith(bt + ".")]
        bf = best_transform_per_summary(rep)
        subsets["AR+BF"] = [f"{t}.{s}" for s, t in bf.items()]
        out["importance"] = rep
    for m in methods:
        if m in subsets:
            X, names = assemble(m, wd.lags, Zna, subsets[m])
        else:
            X, names = assemble(m, wd.lags, Zsel)
        out["mase"][m], out["lambda"][m] = _score(wd, X, names)
    return out


@dataclass
class EvaluationReport:
    records: list = field(default_factory=list)
    methods: tuple = ()
    benchmark: str = BENCHMARK
    rope: tuple = ROPE
    draws: int = 100_000
    seed: int = 0

    def mean_mase(self) -> dict:
        """``{series: {method: mean MASE across repetitions}}``."""
        acc: dict = {}
        for r in self.records:
            acc.setdefault(r["series"], {}).setdefault(r["method"], []).append(r["mase"])
        return {s: {m: float(np.mean(v)) for m, v in row.items()} for s, row in acc.items()}

    def ranks(self) -> dict:
        return average_rank(self.mean_mase())

    def percentage_differences(self) -> dict:
        means = self.mean_mase()
        if self.benchmark not in self.methods:
            return {}
        return {m: {s: percentage_difference(row[m], row[self.benchmark]) for s, row in means.items()}
                for m in self.methods if m != self.benchmark}

    def sign_tests(self) -> dict:
        return {m: bayes_sign_test(list(d.values()), self.rope, self.draws, self.seed)
                for m, d in self.percentage_differences().items()}

    def to_csv(self, path, header_lines=()):
        with open(path, "w", newline="") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("series", "method", "repetition", "p", "mase"))
            for r in self.records:
                w.writerow((r["series"], r["method"], r["repetition"], r["p"], repr(r["mase"])))

    def to_dict(self) -> dict:
        return {
            "methods": list(self.methods),
            "benchmark": self.benchmark,
            "mean_mase": self.mean_mase(),
            "average_rank": {m: {"mean": a, "sd": b} for m, (a, b) in self.ranks().items()},
            "percentage_difference": self.percentage_differences(),
            "bayes_sign_test": {m: {"p_win": r.p_win, "p_rope": r.p_rope, "p_lose": r.p_lose,
                                    "rope": list(r.rope)} for m, r in self.sign_tests().items()},
            "records": self.records,
        }

    def to_json(self, **extra) -> str:
        doc = dict(extra)
        doc.update(self.to_dict())
        return json.dumps(doc, indent=2)


def _task(args):
    series, rep, window, settings = args
    res = evaluate_window(series, window, settings)
    return series.name, rep, res


def _run(tasks, jobs):
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_task, tasks))
    return [_task(t) for t in tasks]


def run_experiment(series_list: Sequence[TimeSeries], settings: ExperimentSettings = ExperimentSettings()
                   ) -> EvaluationReport:
    """Repeated holdout over every series and method."""
    tasks = []
    for ts in series_list:
        windows = repeated_holdout(len(ts), settings.repetitions, settings.train_frac,
                                   settings.test_frac, settings.validation_frac,
                                   settings.random_origins, settings.seed)
        tasks.extend((ts, r, w, settings) for r, w in enumerate(windows))
    report = EvaluationReport(methods=settings.methods, benchmark=settings.benchmark,
                              rope=tuple(settings.rope), draws=settings.draws, seed=settings.seed)
    for name, rep, res in _run(tasks, settings.jobs):
        for m in settings.methods:
            report.records.append({"series": name, "method": m, "repetition": rep,
                                   "p": res["p"], "mase": res["mase"][m]})
    return report


def importance_study(series_list: Sequence[TimeSeries], settings: ExperimentSettings = ExperimentSettings()
                     ) -> dict[str, ImportanceReport]:
    """Per series, RReliefF scores averaged across holdout repetitions."""
    out = {}
    for ts in series_list:
        windows = repeated_holdout(len(ts), settings.repetitions, settings.train_frac,
                                   settings.test_frac, settings.validation_frac,
                                   settings.random_origins, settings.seed)
        sums: dict = {}
        for w in windows:
            rep = window_importance(prepare_window(ts, w, settings), settings)
            for k, v in rep.per_feature.items():
                sums.setdefault(k, []).append(v)
        names = list(sums)
        out[ts.name] = ImportanceReport.from_scores(names, [np.mean(sums[k]) for k in names])
    return out


@dataclass
class SampleSizeResult:
    sizes: tuple
    methods: tuple
    included: tuple
    excluded: tuple
    mean_rank: dict  # (size, method) -> mean rank
    mase: dict  # (size, series, method) -> MASE

    def rows(self):
        return [(s, m, self.mean_rank[(s, m)]) for s in self.sizes for m in self.methods]


def sample_size_study(series_list: Sequence[TimeSeries], sizes: Sequence[int] = SAMPLE_SIZES,
                      methods: Sequence[str] = ("AR", "AR+VEST"),
                      settings: ExperimentSettings = ExperimentSettings(),
                      train_frac: float = 0.8) -> SampleSizeResult:
    """Average rank of each method as the series is truncated to growing sizes.

    Each size uses one holdout: the first ``train_frac`` of the truncated
    series for training (its last 10% for validation), the rest for testing.
    Series shorter than the largest size are excluded.
    """
    sizes = tuple(int(s) for s in sizes)
    methods = tuple(canonical_method(m) for m in methods)
    need = max(sizes)
    included = [ts for ts in series_list if len(ts) >= need]
    excluded = tuple(ts.name for ts in series_list if len(ts) < need)
    for name in excluded:
        log.info("series %s has fewer than %d observations; excluded", name, need)
    if not included:
        raise ValueError(f"no series with at least {need} observations")
    mean_rank, scores = {}, {}
    for size in sizes:
        losses = {}
        for ts in included:
            cut = ts.head(size)
            w = single_holdout(size, train_frac, settings.validation_frac)
            res = evaluate_window(cut, w, settings, methods)
            losses[ts.name] = {m: res["mase"][m] for m in methods}
            for m in methods:
                scores[(size, ts.name, m)] = res["mase"][m]
        for m, (mr, _) in average_rank(losses).items():
            mean_rank[(size, m)] = mr
    return SampleSizeResult(sizes, methods, tuple(ts.name for ts in included), excluded,
                            mean_rank, scores)
