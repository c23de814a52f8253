"""Closed-form correlation laws, CHSH statistics, holonomy and inverse design."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import density as _density
from .circle import ANGLE_ATOL, sub, wrap, wrap_closed
from .density import AngularDensity, DensityValidationError
from .gamma import DeformationMap, build, gamma_inverse

FLAT_CHSH_BOUND = 2.0
DESIGN_ENDPOINT_TOL = 1e-6
DESIGN_MONOTONE_SLACK = 1e-9
DESIGN_FLOOR_TOL = 1e-6


class InconsistentQuadrupleError(ValueError):
    pass


class DesignError(ValueError):
    def __init__(self, constraint, message):
        super().__init__(f"{constraint}: {message}")
        self.constraint = constraint


@dataclass(frozen=True)
class DetectorQuadruple:
    """Relative angles theta_ij of Bob's b_j with respect to Alice's a_i."""

    theta11: float
    theta12: float
    theta21: float
    theta22: float

    def __post_init__(self):
        for name in ("theta11", "theta12", "theta21", "theta22"):
            object.__setattr__(self, name, wrap_closed(float(getattr(self, name))))
        defect = self.consistency_defect
        if defect > ANGLE_ATOL:
            raise InconsistentQuadrupleError(
                f"theta11 + theta22 - theta12 - theta21 = {defect:.3g} (mod 2pi), expected 0")

    @property
    def consistency_defect(self) -> float:
        return float(quadruple_defect(self.as_tuple()))

    @classmethod
    def from_orientations(cls, a1, a2, b1, b2):
        return cls(sub(b1, a1), sub(b2, a1), sub(b1, a2), sub(b2, a2))

    @classmethod
    def canonical(cls):
        """The quadruple that maximizes the quantum violation: -pi/4, pi/4, pi/4, 3pi/4."""
        q = np.pi / 4
        return cls(-q, q, q, 3 * q)

    @classmethod
    def parse(cls, text: str):
        parts = [float(p) for p in text.split(",")]
        if len(parts) != 4:
            raise ValueError(f"expected four comma-separated angles, got {text!r}")
        return cls(*parts)

    def as_tuple(self):
        return (self.theta11, self.theta12, self.theta21, self.theta22)


@dataclass(frozen=True)
class HolonomyReport:
    delta_raw: float
    delta_wrapped: float
    density_kind: str
    quadruple: DetectorQuadruple

    def to_dict(self) -> dict:
        return {
            "delta_raw": self.delta_raw,
            "delta_wrapped": self.delta_wrapped,
            "density": self.density_kind,
            "angles": list(self.quadruple.as_tuple()),
        }


def corr_flat(theta):
    return 1.0 - (2.0 / np.pi) * np.abs(wrap_closed(theta))


def corr_deform(m: DeformationMap, theta):
    return 1.0 - (2.0 / np.pi) * np.abs(gamma_inverse(m, theta))


def chsh_terms(correlator, q: DetectorQuadruple):
    return tuple(float(correlator(t)) for t in q.as_tuple())


def quadruple_defect(thetas):
    """Consistency defect |wrap(t11 + t22 - t12 - t21)| along the last axis."""
    t = np.asarray(thetas, dtype=float)
    return np.abs(wrap(t[..., 0] + t[..., 3] - t[..., 1] - t[..., 2]))


def chsh_values(correlator, thetas):
    """Vectorized CHSH statistic for an ``(..., 4)`` array of quadruples."""
    t = np.asarray(thetas, dtype=float)
    if np.any(quadruple_defect(t) > ANGLE_ATOL):
        raise InconsistentQuadrupleError("array contains inconsistent quadruples")
    e = np.asarray(correlator(t), dtype=float)
    return np.abs(e[..., 0] + e[..., 1] + e[..., 2] - e[..., 3])


def chsh_value(correlator, q: DetectorQuadruple) -> float:
    """|E11 + E12 + E21 - E22| for the given correlation law."""
    if not isinstance(q, DetectorQuadruple):
        q = DetectorQuadruple(*q)
    e11, e12, e21, e22 = chsh_terms(correlator, q)
    return abs(e11 + e12 + e21 - e22)


def holonomy(m: DeformationMap, q: DetectorQuadruple) -> HolonomyReport:
    """Coordinate shift accumulated around the setting cycle
    (a2,b1) -> (a1,b1) -> (a1,b2) -> (a2,b2) -> back to a2.

    Each hop relates two detectors' coordinates by a gamma_inverse shift;
    the flat map makes the shifts cancel exactly by consistency.
    """
    if not isinstance(q, DetectorQuadruple):
        q = DetectorQuadruple(*q)
    g11, g12, g21, g22 = (gamma_inverse(m, t) for t in q.as_tuple())
    raw = g21 + g12 - g11 - g22
    return HolonomyReport(delta_raw=float(raw), delta_wrapped=wrap(raw),
                          density_kind=m.density.kind, quadruple=q)


def _uniform_grid(theta):
    if theta.ndim != 1 or theta.size < 33:
        raise DesignError("grid", "need at least 33 target points")
    if abs(theta[0]) > 1e-9 or abs(theta[-1] - np.pi) > 1e-9:
        raise DesignError("grid", "target grid must span [0, pi]")
    h = np.pi / (theta.size - 1)
    if np.max(np.abs(np.diff(theta) - h)) > 1e-9:
        raise DesignError("grid", "target grid is not uniform")
    return h


def design_density(theta, e_target) -> AngularDensity:
    """Density whose deformed correlation law reproduces ``e_target``.

    ``theta`` is a uniform grid on [0, pi].  The half-line density is
    -E'/4 from second-order finite differences, mirrored to [-pi, 0); the
    result is checked by rebuilding the map and comparing correlations.
    """
    theta = np.asarray(theta, dtype=float)
    e = np.asarray(e_target, dtype=float)
    if theta.shape != e.shape:
        raise DesignError("grid", "theta and E differ in length")
    h = _uniform_grid(theta)
    if not np.all(np.isfinite(e)):
        raise DesignError("finite", "target contains non-finite values")
    if abs(e[0] - 1.0) > DESIGN_ENDPOINT_TOL:
        raise DesignError("endpoint", f"E(0) = {e[0]:.9g}, expected 1")
    if abs(e[-1] + 1.0) > DESIGN_ENDPOINT_TOL:
        raise DesignError("endpoint", f"E(pi) = {e[-1]:.9g}, expected -1")
    rises = np.diff(e)
    if rises.max() > DESIGN_MONOTONE_SLACK:
        k = int(np.argmax(rises))
        raise DesignError(
            "non_negativity",
            f"E increases by {rises[k]:.3g} on [{theta[k]:.6g}, {theta[k + 1]:.6g}]")

    rho_half = np.maximum(-np.gradient(e, h, edge_order=2) / 4.0, 0.0)
    xi = np.concatenate([-theta[:0:-1], theta])
    rho = np.concatenate([rho_half[:0:-1], rho_half])
    try:
        d = _density.from_table(xi, rho)
    except DensityValidationError as exc:
        raise DesignError(exc.constraint, str(exc)) from exc

    m = build(d)
    achieved = corr_deform(m, theta)
    curvature = np.max(np.abs(np.gradient(np.gradient(e, h, edge_order=2), h, edge_order=2)))
    tol = max(2.0 * h * curvature, DESIGN_FLOOR_TOL)
    err = float(np.max(np.abs(achieved - e)))
    if err > tol:
        raise DesignError("round_trip", f"reproduced correlation off by {err:.3g} > {tol:.3g}")
    return d


def correlation_table(m: DeformationMap, n: int = 2049):
    """Correlation law of ``m`` sampled on a uniform grid over [0, pi]."""
    theta = np.linspace(0.0, np.pi, n)
    return theta, corr_deform(m, theta)
