"""The deformation map generated by an angular density.

The forward direction, ``gamma_inverse``, is the scaled cumulative mass
measured from zero,

    gamma_inverse(x) = sign(x) * 2*pi * integral_0^|x| rho,

which is odd, increasing and fixes 0, +-pi/2 and +-pi.  Its inverse
``gamma`` is found numerically: bisection on the tabulated forward values
locates the cell, then a safeguarded Newton iteration (derivative 2*pi*rho)
finishes inside it.  Pushing uniform variates through ``gamma`` produces
samples distributed according to rho.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import density as _density
from .circle import TWO_PI, wrap_closed
from .density import AngularDensity, DensityValidationError

INVERSION_TOL = 1e-9
_NEWTON_TOL = 1e-13
_MAX_ITER = 200


class MapConstructionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DeformationMap:
    density: AngularDensity
    nodes: np.ndarray          # grid on [-pi, pi]
    forward: np.ndarray        # gamma_inverse at nodes
    half_nodes: np.ndarray     # 0 followed by the positive nodes
    half_forward: np.ndarray
    origin_mass: float         # cdf(0)
    tol: float = INVERSION_TOL

    @property
    def forward_table(self) -> np.ndarray:
        return np.column_stack([self.nodes, self.forward])


def _half_forward(d: AngularDensity, c0: float, x):
    # x >= 0 only
    return TWO_PI * (_density.cdf(d, x) - c0)


def build(d: AngularDensity, tol: float = INVERSION_TOL) -> DeformationMap:
    """Tabulate the deformation map of a validated density."""
    report = _density.validate(d)
    if not report.ok:
        name = report.failures[0]
        raise DensityValidationError(
            name, f"cannot build a deformation map from an invalid density "
                  f"(defect {report[name].defect:.3g})", report)
    c0 = _density.cdf(d, 0.0)
    half_nodes = np.concatenate([[0.0], d.nodes[d.nodes > 0.0]])
    half_forward = _half_forward(d, c0, half_nodes)
    half_forward[0] = 0.0
    if np.any(np.diff(half_forward) <= 0.0):
        raise MapConstructionError("forward table is not strictly increasing")
    nodes = d.nodes.copy()
    forward = np.sign(nodes) * _half_forward(d, c0, np.abs(nodes))
    if np.any(np.diff(forward) <= 0.0):
        raise MapConstructionError("forward table is not strictly increasing")
    return DeformationMap(density=d, nodes=nodes, forward=forward,
                          half_nodes=half_nodes, half_forward=half_forward,
                          origin_mass=c0, tol=tol)


def gamma_inverse(m: DeformationMap, x):
    """Map a detector-frame coordinate to the flat (oven-frame) coordinate."""
    x = np.asarray(wrap_closed(x), dtype=float)
    out = np.sign(x) * _half_forward(m.density, m.origin_mass, np.abs(x))
    if out.ndim == 0:
        return float(out)
    return out


def gamma(m: DeformationMap, y):
    """The unique x with ``gamma_inverse(m, x) == y``, to within ``m.tol``."""
    y = np.asarray(wrap_closed(y), dtype=float)
    scalar = y.ndim == 0
    y = np.atleast_1d(y)
    target = np.abs(y)

    hn, hf = m.half_nodes, m.half_forward
    k = np.clip(np.searchsorted(hf, target, side="right") - 1, 0, len(hn) - 2)
    lo = hn[k].copy()
    hi = hn[k + 1].copy()
    # secant start inside the bracketing cell
    frac = (target - hf[k]) / (hf[k + 1] - hf[k])
    x = lo + np.clip(frac, 0.0, 1.0) * (hi - lo)

    active = np.ones(x.shape, dtype=bool)
    for _ in range(_MAX_ITER):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        xa = x[idx]
        f = _half_forward(m.density, m.origin_mass, xa) - target[idx]
        done = (np.abs(f) <= _NEWTON_TOL) | (hi[idx] - lo[idx] <= 4e-16 * np.pi)
        below = f < 0.0
        lo[idx] = np.where(below, xa, lo[idx])
        hi[idx] = np.where(below, hi[idx], xa)
        slope = TWO_PI * np.asarray(m.density(xa))
        with np.errstate(divide="ignore", invalid="ignore"):
            step = xa - f / slope
        ok = (slope > 0.0) & (step > lo[idx]) & (step < hi[idx])
        nxt = np.where(ok, step, 0.5 * (lo[idx] + hi[idx]))
        x[idx] = np.where(done, xa, nxt)
        active[idx[done]] = False

    out = np.sign(y) * x
    if scalar:
        return float(out[0])
    return out


def round_trip_error(m: DeformationMap, y) -> float:
    return float(np.max(np.abs(gamma_inverse(m, gamma(m, y)) - np.asarray(y))))
