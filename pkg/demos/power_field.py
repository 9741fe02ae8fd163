# %% [markdown]
# Received power over the floor of the reference room, and which sector wins where.

# %%
import numpy as np

from beamsense import Scenario
from beamsense.propagation import best_sector_indices, power_matrix

sc = Scenario()
xs = np.arange(0.5, 10.0, 1.0)
pts = [(x, y) for y in xs for x in xs]
power = power_matrix(sc, pts)  # rows: positions, columns: sectors in row-major order

# %%
# Strongest sector at each metre cell, printed with +y upward.
best = best_sector_indices(power).reshape(len(xs), len(xs))
n = sc.sector_grid_n
for row in best[::-1]:
    print(" ".join(f"({i % n + 1},{i // n + 1})" for i in row))

# %%
peak = power.max(axis=1).reshape(len(xs), len(xs))
print(f"best-beam power: {peak.min():.2f} .. {peak.max():.2f} dBm")
print(f"noise floor {sc.noise_floor:.2f} dBm, worst-case SNR {peak.min() - sc.noise_floor:.1f} dB")
