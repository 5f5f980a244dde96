"""
Comparing methods across a small corpus
=======================================

Run the repeated-holdout protocol on a few synthetic series, then summarise
with average ranks and a Bayesian sign test of each method against AR+VEST.
A smaller p-search keeps this demo to a couple of minutes.
"""

from vest.evaluation import ExperimentSettings, run_experiment
from vest.synthetic import synthetic_corpus

corpus = synthetic_corpus(4, 800, seed=10)
settings = ExperimentSettings(repetitions=3, p_min=10, p_max=14)
report = run_experiment(corpus, settings)

print("mean MASE per series")
for series, row in report.mean_mase().items():
    print(" ", series, {m: round(v, 3) for m, v in row.items()})

print("average rank (sd)")
for m, (mean, sd) in sorted(report.ranks().items(), key=lambda kv: kv[1][0]):
    print(f"  {m:8s} {mean:.2f} ({sd:.2f})")

print(f"sign test against {report.benchmark} (win = lower MASE than {report.benchmark})")
for m, r in report.sign_tests().items():
    print(f"  {m:8s} win {r.p_win:.3f}  draw {r.p_rope:.3f}  lose {r.p_lose:.3f}")
