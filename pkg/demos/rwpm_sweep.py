# %% [markdown]
# Random waypoint sweep over the drop-off threshold.
# A smaller run than the full 100 x 100 to keep this quick.

# %%
from beamsense import Scenario
from beamsense.harness import run_rwpm_sweep
from beamsense.prediction import PredictorKind

sc = Scenario()
for validate in (False, True):
    results = run_rwpm_sweep(sc, n_waypoints=40, repetitions=20, seed=0, use_validation=validate)
    table = {(r.p_dth, r.predictor): r for r in results}
    print("validate" if validate else "strict")
    print(" p_dth  " + "  ".join(f"{k.value:>14s}" for k in PredictorKind))
    for p in sorted({r.p_dth for r in results}):
        cells = [table[p, k] for k in PredictorKind]
        print(f"{p:6g}  " + "  ".join(f"{c.rebeamform_pct_mean:6.2f}% {c.mean_rx_power_mean:6.2f}" for c in cells))
