"""
Lags alone versus lags plus features on one window
==================================================

One repeated-holdout window: choose the embedding dimension on validation
data, then score the five forecasting methods on the test block by MASE.
"""

from vest.evaluation import ExperimentSettings, evaluate_window
from vest.importance import rank_features
from vest.series import repeated_holdout
from vest.synthetic import synthetic_series

ts = synthetic_series(1000, seed=3)
window = repeated_holdout(len(ts), 10)[0]
print("train", window.train, "validation", window.validation, "test", window.test)

res = evaluate_window(ts, window, ExperimentSettings())
print("embedding dimension chosen on validation:", res["p"])
for method, score in sorted(res["mase"].items(), key=lambda kv: kv[1]):
    print(f"  {method:8s} MASE {score:.4f}  lambda {res['lambda'][method]:.3g}")

# which representations carry the most signal for this window?
for name, score, rank in rank_features(res["importance"], "BY_TRANSFORM")[:4]:
    print(f"  {name:6s} mean RReliefF score {score:+.4f} (rank {rank:g})")
