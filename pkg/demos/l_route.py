# %% [markdown]
# Walking the bundled L-shaped route with each predictor.

# %%
from beamsense import Scenario
from beamsense.harness import run_route
from beamsense.mobility import discretize_arrays, l_route
from beamsense.prediction import PredictorKind

sc = Scenario(p_dth=3.0, p_rth=-65.0)
traj = discretize_arrays(l_route(), sc.room_dims[:2])
print(len(traj), "steps")

# %%
for kind in PredictorKind:
    for validate in (False, True):
        r = run_route(sc, traj, kind, use_validation=validate)
        print(f"{kind.value:7s} validate={validate!s:5s} re-beamform {r.rebeamform_count:2d}  "
              f"switch {r.beam_switch_count:2d}  mean {r.mean_rx_power:.2f} dBm")

# %%
# Event log of the sensor predictor.
r = run_route(sc, traj, PredictorKind.SENSOR)
for e in r.events:
    print(e.step_index, e.kind.value, e.from_sector, "->", e.to_sector, f"{e.rx_power_before:.2f} dBm")
