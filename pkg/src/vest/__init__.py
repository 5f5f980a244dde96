"""Automatic feature engineering from time-delay embedding vectors.

Embedding vectors are mapped to several representations, each
representation is summarised by a battery of statistics, and a filter keeps
the informative, non-redundant features to sit alongside the raw lags.
"""
__version__ = "0.1.0"

from .series import TimeSeries, EmbeddingDataset, HoldoutWindow, load_series, embed, repeated_holdout
from .transforms import TRANSFORMS, TransformContext, guerrero_lambda
from .summaries import SUMMARIES, apply_summary
from .pipeline import (FeatureMatrix, SelectionConfig, SelectionModel, generate_features,
                       fit_selection, apply_selection, assemble)
from .importance import rrelieff, rank_features, best_transform_subset, best_transform_per_summary
from .learners import fit_lasso, lasso_path_and_select, predict, naive_forecast
from .evaluation import (mase, percentage_difference, average_rank, bayes_sign_test,
                         select_embedding_dimension, run_experiment, sample_size_study)

__all__ = [
    "TimeSeries", "EmbeddingDataset", "HoldoutWindow", "load_series", "embed", "repeated_holdout",
    "TRANSFORMS", "TransformContext", "guerrero_lambda", "SUMMARIES", "apply_summary",
    "FeatureMatrix", "SelectionConfig", "SelectionModel", "generate_features", "fit_selection",
    "apply_selection", "assemble", "rrelieff", "rank_features", "best_transform_subset",
    "best_transform_per_summary", "fit_lasso", "lasso_path_and_select", "predict", "naive_forecast",
    "mase", "percentage_difference", "average_rank", "bayes_sign_test", "select_embedding_dimension",
    "run_experiment", "sample_size_study",
]
