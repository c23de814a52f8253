"""Circular arithmetic on the half-open interval [-pi, pi).

Every angle in the package is a plain float (or float ndarray) in radians.
``wrap`` is the single canonicalizer; everything else builds on it.
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi
ANGLE_ATOL = 1e-12


class DomainError(ValueError):
    """Raised for non-finite angles."""


def _check_finite(x):
    if not np.all(np.isfinite(x)):
        raise DomainError(f"angle must be finite, got {x!r}")


def wrap(x):
    """Return the representative of ``x`` (mod 2*pi) in [-pi, pi).

    Works elementwise on arrays; scalars come back as Python floats.
    """
    _check_finite(x)
    y = np.mod(np.asarray(x, dtype=float) + np.pi, TWO_PI) - np.pi
    # np.mod can round up to exactly 2*pi for tiny negative arguments
    y = np.where(y >= np.pi, y - TWO_PI, y)
    y = np.where(y < -np.pi, -np.pi, y)
    if y.ndim == 0:
        return float(y)
    return y


def wrap_closed(x):
    """Like :func:`wrap`, but leaves values already in [-pi, pi] untouched.

    Useful where +pi and -pi carry different meaning, e.g. the endpoints of
    a deformation map's table.
    """
    _check_finite(x)
    arr = np.asarray(x, dtype=float)
    out = np.where(np.abs(arr) <= np.pi, arr, wrap(arr))
    if out.ndim == 0:
        return float(out)
    return out


def add(a, b):
    return wrap(np.asarray(a, dtype=float) + np.asarray(b, dtype=float))


def sub(a, b):
    return wrap(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))


def sign_of(a):
    """Binary detector response: -1 on [-pi, 0), +1 on [0, pi)."""
    s = np.where(np.asarray(a) >= 0.0, 1, -1)
    if s.ndim == 0:
        return int(s)
    return s.astype(np.int8)


def circular_distance(a, b):
    """Shortest arc length between two angles, in [0, pi]."""
    return np.abs(wrap(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))
