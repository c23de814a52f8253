"""Coordinate shift accumulated around the four settings.

For the uniform density the four shifts cancel.  The quantum density
leaves a residue of pi(1 - sqrt 2) at the canonical settings, which is the
amount the deformed coordinates fail to close up.
"""

import numpy as np

import deformable_bell as db
from deformable_bell import analytic
from deformable_bell.analytic import DetectorQuadruple

q = DetectorQuadruple.canonical()
for name, dens in (("uniform", db.make_uniform()), ("quantum", db.make_quantum())):
    rep = analytic.holonomy(db.build(dens), q)
    print(f"{name:>8}: delta = {rep.delta_raw:+.12f}")
print(f"pi(1 - sqrt 2) = {np.pi * (1 - np.sqrt(2)):+.12f}")

# Sweep one Bob detector while holding the others
qmap = db.build(db.make_quantum())
print("\nb2 sweep, a1=0, a2=pi/2, b1=pi/4:")
for b2 in np.linspace(-np.pi, np.pi, 9, endpoint=False):
    rep = analytic.holonomy(qmap, DetectorQuadruple.from_orientations(0.0, np.pi / 2, np.pi / 4, b2))
    print(f"  b2={b2:+.3f}  delta={rep.delta_wrapped:+.5f}")
