"""Per-round semantics of the flat and the deformed games.

All evaluators are vectorized: pass scalars for a single round or equal-shape
arrays for a batch.  Outcomes are +-1 (``int`` for scalars, ``int8`` arrays).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .circle import sign_of, sub, wrap
from .gamma import DeformationMap, gamma, gamma_inverse


class FlatRound(NamedTuple):
    theta: float       # angle of Bob's detector relative to Alice's
    lambda_rel: float  # oven vector relative to Alice's detector


class DeformedRound(NamedTuple):
    theta: float
    delta_b0: float    # Bob's detector relative to the oven vector, at the detection point


class JointOrientation(NamedTuple):
    alpha: float       # Alice, absolute
    beta: float        # Bob, absolute
    lambda_abs: float  # oven vector, absolute

    @property
    def theta(self):
        return sub(self.beta, self.alpha)

    @property
    def deltas(self):
        return sub(self.lambda_abs, self.alpha), sub(self.lambda_abs, self.beta)

    @property
    def gauge(self):
        """Joint absolute orientation -(dA + dB)/2 with the oven vector as reference."""
        da, db = self.deltas
        return -0.5 * (np.asarray(da) + np.asarray(db))


def flat_outcomes(theta, lambda_rel):
    delta_b = sub(lambda_rel, theta)
    return sign_of(wrap(lambda_rel)), sign_of(delta_b)


def flat_outcomes_absolute(alpha, beta, lambda_abs):
    da, db = JointOrientation(alpha, beta, lambda_abs).deltas
    return sign_of(da), sign_of(db)


def deformed_outcomes_shifted(shift, delta_b0):
    """Deformed-game round given the precomputed coordinate shift gamma_inverse(theta)."""
    delta_a0 = sub(delta_b0, shift)
    return -sign_of(delta_a0), -sign_of(wrap(delta_b0))


def deformed_outcomes(m: DeformationMap, theta, delta_b0):
    return deformed_outcomes_shifted(gamma_inverse(m, theta), delta_b0)


def deformed_outcomes_detector_frame(m: DeformationMap, theta, delta_b_far):
    """Same round, described from the far (flat) detector frames.

    ``delta_b_far`` is Bob's far-field coordinate, distributed as rho when the
    game is sampled in this frame.  Alice's far-field coordinate follows by
    composing the map, shifting, and mapping back.
    """
    shifted = sub(gamma_inverse(m, delta_b_far), gamma_inverse(m, theta))
    delta_a_far = gamma(m, shifted)
    return -sign_of(delta_a_far), -sign_of(wrap(delta_b_far))


def counterfactual_flat(lambda_abs, a1, a2, b1, b2):
    """All four detector responses to one shared oven vector.

    Returns ``((sa1, sa2, sb1, sb2), combination)`` where combination is
    sa1*(sb1 + sb2) + sa2*(sb1 - sb2); its magnitude is always 2.
    """
    sa1 = sign_of(sub(lambda_abs, a1))
    sa2 = sign_of(sub(lambda_abs, a2))
    sb1 = sign_of(sub(lambda_abs, b1))
    sb2 = sign_of(sub(lambda_abs, b2))
    combo = (np.asarray(sa1, dtype=np.int64) * (sb1 + np.asarray(sb2, dtype=np.int64))
             + np.asarray(sa2, dtype=np.int64) * (sb1 - np.asarray(sb2, dtype=np.int64)))
    if np.ndim(combo) == 0:
        combo = int(combo)
    return (sa1, sa2, sb1, sb2), combo
