"""
From a series to a feature table
================================

Embed a seasonal series, expand every embedding vector into 256 features,
then reduce the table with filters fitted on the training rows only.
"""

import numpy as np

from vest import synthetic
from vest.pipeline import apply_selection, fit_selection, generate_features
from vest.series import embed, single_holdout
from vest.transforms import TransformContext

ts = synthetic.synthetic_series(600, seed=1)
print(f"{ts.name}: {len(ts)} points, frequency {ts.frequency}")

# each row holds the 12 most recent values before its target
ds = embed(ts, 12)
print("first lag row (most recent first):", np.round(ds.X[0, :4], 2), "...")

# transforms that need parameters (Box-Cox) learn them from training data
w = single_holdout(len(ts), 0.8)
train = ts.values[w.train[0]:w.train[1]]
ctx = TransformContext.fit(train, ts.frequency)
print(f"Box-Cox lambda from the training block: {ctx.boxcox_lambda:.2f}")

F = generate_features(ds, ctx)
print("generated:", F.shape, "e.g.", F.columns[:3], F.columns[-2:])

train_rows = ds.t < w.train[1]
model = fit_selection(F.rows(train_rows))
Z = apply_selection(model, F)
print(f"kept {len(model.kept_columns)} of {F.shape[1]} columns")

reasons = {}
for r in model.drop_log.values():
    key = r.split("(")[0]
    reasons[key] = reasons.get(key, 0) + 1
print("dropped by reason:", reasons)
print("some survivors:", Z.columns[:8])
