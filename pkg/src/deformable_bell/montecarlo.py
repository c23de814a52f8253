"""Seeded Monte Carlo estimation of correlations and CHSH statistics.

Reproducibility contract: every random variate consumed by round ``i`` is a
function of ``(seed, purpose, i)`` only (plus the grid-point index in a
sweep).  Rounds are grouped into fixed blocks of ``BLOCK_SIZE``; block ``b``
of purpose ``p`` draws from a Philox stream keyed by the seed sequence
``(seed, p, b)``.  Workers process whole blocks and return integer tallies,
so the result is bit-identical for any worker count.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import density as _density
from .analytic import DetectorQuadruple, corr_deform, corr_flat
from .circle import TWO_PI, wrap
from .game import deformed_outcomes_detector_frame, deformed_outcomes_shifted, flat_outcomes
from .gamma import DeformationMap, build, gamma, gamma_inverse

BLOCK_SIZE = 1 << 16
MODELS = ("flat", "deform")
POLICIES = ("referee-random", "fixed-counts")
FRAMES = ("oven", "detector")
SIGMA_LEVEL = 4.0

# purpose tags for substream keys
_HIDDEN = 1
_SETTING = 2


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "flat"
    density: str = "uniform"
    theta: float | None = None
    quadruple: tuple[float, float, float, float] | None = None
    rounds: int = 1_000_000
    seed: int = 0
    policy: str = "referee-random"
    grid_size: int = _density.DEFAULT_GRID_SIZE

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.policy not in POLICIES:
            raise ConfigError(f"policy must be one of {POLICIES}, got {self.policy!r}")
        if not isinstance(self.rounds, (int, np.integer)) or self.rounds < 1:
            raise ConfigError(f"rounds must be a positive integer, got {self.rounds!r}")
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.theta is not None and not math.isfinite(self.theta):
            raise ConfigError("theta must be finite")
        if self.quadruple is not None:
            q = DetectorQuadruple(*self.quadruple)
            object.__setattr__(self, "quadruple", q.as_tuple())

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        if data.get("quadruple") is not None:
            data["quadruple"] = tuple(float(v) for v in data["quadruple"])
        return cls(**data)

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["quadruple"] is not None:
            d["quadruple"] = list(d["quadruple"])
        return d

    def digest(self, dens: _density.AngularDensity | None = None) -> str:
        payload = self.to_dict()
        payload["seed"] = str(self.seed)
        if self.model == "deform" and dens is not None:
            payload["density_sha256"] = dens.digest()
        text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


@dataclass(frozen=True)
class CorrelationEstimate:
    theta: float
    e_hat: float
    stderr: float
    n: int
    n_same: int
    n_diff: int
    e_analytic: float | None = None

    @classmethod
    def from_counts(cls, theta, n_same, n_diff, e_analytic=None):
        n = int(n_same + n_diff)
        if n == 0:
            e = se = float("nan")
        else:
            e = float((n_same - n_diff) / n)
            se = math.sqrt(max(0.0, 1.0 - e * e) / n)
        return cls(theta=float(theta), e_hat=e, stderr=se, n=n,
                   n_same=int(n_same), n_diff=int(n_diff), e_analytic=e_analytic)

    @property
    def z_score(self) -> float:
        if self.e_analytic is None:
            return float("nan")
        diff = self.e_hat - self.e_analytic
        if self.stderr == 0.0:
            return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / self.stderr

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("e_hat", "stderr"):
            if math.isnan(d[k]):
                d[k] = None
        return d


@dataclass(frozen=True)
class ChshReport:
    settings: tuple[CorrelationEstimate, ...]
    statistic: float
    statistic_stderr: float
    flat_bound_exceeded: bool
    insufficient_data: bool
    seed: int
    config_digest: str
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        nan_none = lambda v: None if isinstance(v, float) and math.isnan(v) else v  # noqa: E731
        return {
            "settings": [dict(s.to_dict(), setting=lab) for s, lab in zip(self.settings, SETTING_LABELS)],
            "statistic": nan_none(self.statistic),
            "statistic_stderr": nan_none(self.statistic_stderr),
            "flat_bound_exceeded": self.flat_bound_exceeded,
            "insufficient_data": self.insufficient_data,
            "seed": self.seed,
            "config_digest": self.config_digest,
            "config": self.config,
        }


SETTING_LABELS = ("11", "12", "21", "22")


@dataclass(frozen=True)
class ZeroMeanReport:
    theta: float
    mean_a: float
    mean_b: float
    stderr: float
    n: int

    def to_dict(self) -> dict:
        return asdict(self)


def substream(seed: int, *key: int) -> np.random.Generator:
    """Generator keyed by ``(seed, *key)``; independent of call order."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *key])))


def _uniforms(seed, key, block, count):
    return substream(seed, *key, block).random(count)


def _blocks(n):
    return [(b, b * BLOCK_SIZE, min(BLOCK_SIZE, n - b * BLOCK_SIZE))
            for b in range(-(-n // BLOCK_SIZE))]


def _run_blocks(fn, n, workers):
    blocks = _blocks(n)
    if workers is None or workers <= 1 or len(blocks) == 1:
        parts = [fn(*blk) for blk in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda blk: fn(*blk), blocks))
    # integer sums commute, so completion order is irrelevant
    return np.sum(parts, axis=0)


class _Model:
    """Round evaluator bound to a model, a density and a sampling frame."""

    def __init__(self, model, dmap: DeformationMap | None, frame="oven"):
        if frame not in FRAMES:
            raise ConfigError(f"frame must be one of {FRAMES}")
        if frame == "detector" and model != "deform":
            raise ConfigError("detector-frame sampling applies to the deformed model only")
        self.model = model
        self.dmap = dmap
        self.frame = frame

    def shift(self, theta):
        if self.model == "flat":
            return np.asarray(wrap(theta), dtype=float)
        return np.asarray(gamma_inverse(self.dmap, theta), dtype=float)

    def analytic(self, theta):
        if self.model == "flat":
            return float(corr_flat(theta))
        return float(corr_deform(self.dmap, theta))

    def outcomes(self, theta, shift, u):
        lam = wrap(TWO_PI * u - np.pi)
        if self.model == "flat":
            return flat_outcomes(theta, lam)
        if self.frame == "oven":
            return deformed_outcomes_shifted(shift, lam)
        return deformed_outcomes_detector_frame(self.dmap, theta, gamma(self.dmap, lam))


def _prepare(config: ExperimentConfig, frame="oven"):
    dens = dmap = None
    if config.model == "deform":
        try:
            dens = _density.resolve(config.density, config.grid_size)
        except ValueError as exc:
            if isinstance(exc, (_density.DensityValidationError, _density.DensityFileError)):
                raise
            raise ConfigError(str(exc)) from exc
        dmap = build(dens)
    return _Model(config.model, dmap, frame), dens


def _single_tally(model: _Model, theta, seed, key):
    shift = model.shift(theta)

    def block(b, start, count):
        u = _uniforms(seed, (*key, _HIDDEN), b, count)
        sa, sb = model.outcomes(theta, shift, u)
        same = int(np.count_nonzero(sa == sb))
        return np.array([same, count - same, int(np.sum(sa, dtype=np.int64)),
                         int(np.sum(sb, dtype=np.int64))], dtype=np.int64)

    return block


def run_correlation(config: ExperimentConfig, workers: int = 1, frame: str = "oven",
                    _key=()) -> CorrelationEstimate:
    """Estimate E(theta) from ``config.rounds`` independent rounds."""
    if config.theta is None:
        raise ConfigError("run_correlation needs a single theta")
    model, _ = _prepare(config, frame)
    return _estimate(model, config.theta, config.rounds, config.seed, workers, _key)


def _estimate(model, theta, rounds, seed, workers, key=()):
    tally = _run_blocks(_single_tally(model, theta, seed, key), rounds, workers)
    return CorrelationEstimate.from_counts(theta, tally[0], tally[1], model.analytic(theta))


def run_sweep(model: str, thetas, rounds: int, seed: int, density="uniform",
              grid_size: int = _density.DEFAULT_GRID_SIZE, workers: int = 1,
              frame: str = "oven") -> list[CorrelationEstimate]:
    """One estimate per grid angle, each on its own substream."""
    thetas = [float(t) for t in thetas]
    if not thetas:
        raise ConfigError("theta grid is empty")
    config = ExperimentConfig(model=model, density=density if isinstance(density, str) else "uniform",
                              theta=thetas[0], rounds=rounds, seed=seed, grid_size=grid_size)
    if isinstance(density, _density.AngularDensity):
        ev = _Model(model, build(density) if model == "deform" else None, frame)
    else:
        ev, _ = _prepare(config, frame)
    return [_estimate(ev, t, rounds, seed, workers, key=(1000 + i,)) for i, t in enumerate(thetas)]


def zero_mean_check(config: ExperimentConfig, workers: int = 1) -> ZeroMeanReport:
    """Single-party outcome averages, which must vanish for every setting."""
    if config.theta is None:
        raise ConfigError("zero_mean_check needs a single theta")
    model, _ = _prepare(config)
    tally = _run_blocks(_single_tally(model, config.theta, config.seed, ()), config.rounds, workers)
    n = config.rounds
    return ZeroMeanReport(theta=float(config.theta), mean_a=float(tally[2] / n), mean_b=float(tally[3] / n),
                          stderr=1.0 / math.sqrt(n), n=n)


def run_chsh(config: ExperimentConfig, workers: int = 1) -> ChshReport:
    """Play the four-setting game, one referee-chosen setting per round."""
    if config.quadruple is None:
        raise ConfigError("run_chsh needs a detector quadruple")
    model, dens = _prepare(config)
    thetas = np.array(config.quadruple, dtype=float)
    shifts = model.shift(thetas)
    seed = config.seed

    def block(b, start, count):
        u = _uniforms(seed, (_HIDDEN,), b, count)
        if config.policy == "fixed-counts":
            setting = (start + np.arange(count)) % 4
        else:
            setting = np.minimum((4.0 * _uniforms(seed, (_SETTING,), b, count)).astype(np.int64), 3)
        sa, sb = model.outcomes(thetas[setting], shifts[setting], u)
        same = sa == sb
        out = np.zeros((4, 2), dtype=np.int64)
        out[:, 0] = np.bincount(setting[same], minlength=4)
        out[:, 1] = np.bincount(setting[~same], minlength=4)
        return out

    tally = _run_blocks(block, config.rounds, workers)
    estimates = tuple(
        CorrelationEstimate.from_counts(t, tally[k, 0], tally[k, 1], model.analytic(t))
        for k, t in enumerate(thetas))
    insufficient = any(e.n == 0 for e in estimates)
    if insufficient:
        stat = se = float("nan")
        exceeded = False
    else:
        e11, e12, e21, e22 = (e.e_hat for e in estimates)
        stat = abs(e11 + e12 + e21 - e22)
        se = math.sqrt(sum(e.stderr ** 2 for e in estimates))
        exceeded = stat - 2.0 > SIGMA_LEVEL * se
    return ChshReport(settings=estimates, statistic=stat, statistic_stderr=se,
                      flat_bound_exceeded=bool(exceeded), insufficient_data=insufficient,
                      seed=int(seed), config_digest=config.digest(dens), config=config.to_dict())
