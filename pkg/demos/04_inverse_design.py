"""Recover a density from the correlation law it should produce.

Start from a target E(theta) on [0, pi], differentiate, and check that the
rebuilt map reproduces the target.
"""

import numpy as np

import deformable_bell as db
from deformable_bell import analytic

theta = np.linspace(0, np.pi, 2049)

d = analytic.design_density(theta, np.cos(theta))
err = np.max(np.abs(d.values - np.abs(np.sin(d.nodes)) / 4))
print(f"cos target      -> {d.grid_size} nodes, max |rho - |sin|/4| = {err:.2e}")

d = analytic.design_density(theta, 1 - 2 * theta / np.pi)
print(f"triangle target -> max |rho - 1/2pi| = {np.max(np.abs(d.values - 1 / (2 * np.pi))):.2e}")

# A flatter law: cos^3 still falls from 1 to -1 monotonically
target = np.cos(theta) ** 3
d = analytic.design_density(theta, target)
m = db.build(d)
print(f"cos^3 target    -> round-trip error {np.max(np.abs(analytic.corr_deform(m, theta) - target)):.2e}")
print(f"                   peak density {d.values.max():.4f} at xi = {d.nodes[np.argmax(d.values)]:.4f}")

# A target that rises somewhere cannot come from a nonnegative density
bad = np.cos(theta) + 0.1 * np.sin(6 * theta)
try:
    analytic.design_density(theta, bad)
except analytic.DesignError as exc:
    print("rejected:", exc)
