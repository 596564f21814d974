"""Samplers for symmetric stable increments and random paths.

The continuous-time processes handled here are the rotation-invariant
strictly stable ones, with characteristic function exp(-t c |u|^alpha),
plus planar/space Brownian motion as the alpha = 2 member and a
heavy-tailed compound Poisson walk used by the exit-time experiments.

Everything takes an explicit ``numpy.random.Generator``; nothing touches
global random state. ``trial_rng`` derives independent, reproducible
per-trial generators from a master seed so results do not depend on how
trials are scheduled across threads.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

__all__ = [
    "StableSpec",
    "PathSample",
    "sample_stable_1d",
    "sample_positive_stable",
    "sample_isotropic_vec",
    "sample_walk_path",
    "sample_cpp_path",
    "stream_id",
    "trial_rng",
]

_FLAVORS = ("isotropic", "brownian", "cpp")
_JUMP_LAWS = ("pareto", "gaussian")


@dataclass(frozen=True)
class StableSpec:
    """Parameters of one process under study.

    flavor "isotropic": exponent c |u|^alpha, alpha in (0, 2].
    flavor "brownian":  standard d-dim Brownian motion; alpha is pinned
                        to 2 and c = 1/2 gives X(1) ~ N(0, I).
    flavor "cpp":       compound Poisson with heavy-tailed jumps plus a
                        constant drift, used for exit-time studies; alpha
                        and c are ignored by the samplers.
    """

    alpha: float = 2.0
    c: float = 0.5
    d: int = 2
    flavor: str = "isotropic"
    tail_alpha: float | None = None
    jump_rate: float | None = None
    drift: tuple[float, ...] | None = None
    jump_law: str = "pareto"

    def __post_init__(self):
        if self.flavor not in _FLAVORS:
            raise ParameterError(f"unknown flavor {self.flavor!r}")
        if not isinstance(self.d, int) or isinstance(self.d, bool) or self.d < 1:
            raise ParameterError(f"d must be a positive integer, got {self.d!r}")
        if self.flavor == "brownian":
            object.__setattr__(self, "alpha", 2.0)
        alpha = float(self.alpha)
        if not 0.0 < alpha <= 2.0:
            raise ParameterError(f"alpha must lie in (0, 2], got {alpha!r}")
        object.__setattr__(self, "alpha", alpha)
        c = float(self.c)
        if c <= 1e-12:
            raise ParameterError(f"scale c must exceed 1e-12, got {c!r}")
        object.__setattr__(self, "c", c)
        if self.flavor == "cpp":
            if self.jump_law not in _JUMP_LAWS:
                raise ParameterError(f"unknown jump law {self.jump_law!r}")
            if self.jump_law == "pareto":
                if self.tail_alpha is None or not 0.0 < float(self.tail_alpha) < 2.0:
                    raise ParameterError(
                        f"tail_alpha must lie in (0, 2), got {self.tail_alpha!r}"
                    )
                object.__setattr__(self, "tail_alpha", float(self.tail_alpha))
            if self.jump_rate is None or float(self.jump_rate) < 0.0:
                raise ParameterError(
                    f"jump_rate must be >= 0, got {self.jump_rate!r}"
                )
            object.__setattr__(self, "jump_rate", float(self.jump_rate))
            drift = self.drift if self.drift is not None else (0.0,) * self.d
            drift = tuple(float(v) for v in drift)
            if len(drift) != self.d:
                raise ParameterError(
                    f"drift must have length d={self.d}, got {len(drift)}"
                )
            object.__setattr__(self, "drift", drift)


@dataclass
class PathSample:
    """A sampled path skeleton: times[0] = 0, points[0] = origin.

    ``points`` has shape (len(times), d). Times are strictly increasing.
    Treat instances as immutable once built.
    """

    times: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.times.ndim != 1 or self.points.ndim != 2:
            raise ParameterError("times must be 1-d and points 2-d")
        if len(self.times) != len(self.points) or len(self.times) < 1:
            raise ParameterError("times and points must align and be nonempty")
        if self.times[0] != 0.0 or np.any(self.points[0] != 0.0):
            raise ParameterError("paths must start at the origin at time 0")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0.0):
            raise ParameterError("times must be strictly increasing")

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def sample_stable_1d(alpha, scale, rng, size=None):
    """Symmetric alpha-stable draw(s) with char. fn. exp(-scale^alpha |s|^alpha).

    Chambers-Mallows-Stuck with phi uniform on (-pi/2, pi/2) and a unit
    exponential mixing variable; alpha = 1 reduces to a Cauchy tangent,
    alpha = 2 reduces to N(0, 2 scale^2) through the same expression.
    """
    alpha = float(alpha)
    if not 0.0 < alpha <= 2.0:
        raise ParameterError(f"alpha must lie in (0, 2], got {alpha!r}")
    scale = float(scale)
    if scale <= 0.0:
        raise ParameterError(f"scale must be positive, got {scale!r}")
    phi = (rng.random(size) - 0.5) * math.pi
    if alpha == 1.0:
        return scale * np.tan(phi)
    w = rng.standard_exponential(size)
    x = (
        np.sin(alpha * phi)
        / np.cos(phi) ** (1.0 / alpha)
        * (np.cos((1.0 - alpha) * phi) / w) ** ((1.0 - alpha) / alpha)
    )
    return scale * x


def sample_positive_stable(beta, rng, size=None):
    """Positive strictly stable draw(s) with Laplace transform exp(-s^beta),
    beta in (0, 1), via the single-uniform representation

        [sin(beta V) / sin(V)^{1/beta}] [sin((1-beta) V) / W]^{(1-beta)/beta}

    with V uniform on (0, pi) and W unit exponential.
    """
    beta = float(beta)
    if not 0.0 < beta < 1.0:
        raise ParameterError(f"beta must lie in (0, 1), got {beta!r}")
    v = rng.random(size) * math.pi
    w = rng.standard_exponential(size)
    return (
        np.sin(beta * v)
        / np.sin(v) ** (1.0 / beta)
        * (np.sin((1.0 - beta) * v) / w) ** ((1.0 - beta) / beta)
    )


def sample_isotropic_vec(spec: StableSpec, rng, size=None):
    """Unit-time increment(s) of the process described by ``spec``.

    Returns shape (d,) for size None, else (size, d). For alpha < 2 the
    draw is a Gaussian vector subordinated by a positive (alpha/2)-stable
    factor, which reproduces exp(-c |u|^alpha) exactly.
    """
    if spec.flavor == "cpp":
        raise ParameterError("compound Poisson increments have no unit-time sampler")
    n = 1 if size is None else int(size)
    g = rng.standard_normal((n, spec.d))
    if spec.alpha == 2.0:
        out = math.sqrt(2.0 * spec.c) * g
    else:
        a0 = sample_positive_stable(spec.alpha / 2.0, rng, n)
        out = np.sqrt(2.0 * spec.c ** (2.0 / spec.alpha) * a0)[:, None] * g
    return out[0] if size is None else out


def sample_walk_path(spec: StableSpec, n_steps: int, horizon: float, rng) -> PathSample:
    """Hull skeleton of the process on [0, horizon]: an n-step random walk
    whose increments are exact unit-time draws scaled by (horizon/n)^(1/alpha).

    Self-similarity makes each skeleton point exactly distributed as the
    process at that grid time; only the in-between excursions are lost.
    """
    if not isinstance(n_steps, int) or isinstance(n_steps, bool) or n_steps < 1:
        raise ParameterError(f"n_steps must be a positive integer, got {n_steps!r}")
    horizon = float(horizon)
    if horizon <= 0.0:
        raise ParameterError(f"horizon must be positive, got {horizon!r}")
    incs = sample_isotropic_vec(spec, rng, n_steps)
    incs *= (horizon / n_steps) ** (1.0 / spec.alpha)
    pts = np.empty((n_steps + 1, spec.d))
    pts[0] = 0.0
    np.cumsum(incs, axis=0, out=pts[1:])
    times = np.arange(n_steps + 1, dtype=np.float64) * (horizon / n_steps)
    return PathSample(times, pts)


def sample_cpp_path(spec: StableSpec, horizon: float, rng) -> PathSample:
    """Compound Poisson path with drift on [0, horizon], recorded at t = 0,
    every jump time, and the horizon.

    Pareto jumps have norm U^(-1/tail_alpha) (support [1, inf)) and a
    uniform random direction; the Gaussian law draws N(0, I_d) jumps and
    exists as a light-tailed control. Simultaneous jump times, which occur
    with probability zero but are possible in floating point, are merged.
    """
    if spec.flavor != "cpp":
        raise ParameterError("sample_cpp_path requires a cpp-flavored spec")
    horizon = float(horizon)
    if horizon <= 0.0:
        raise ParameterError(f"horizon must be positive, got {horizon!r}")
    n_jumps = int(rng.poisson(spec.jump_rate * horizon)) if spec.jump_rate > 0 else 0
    drift = np.asarray(spec.drift, dtype=np.float64)
    jt = np.sort(rng.random(n_jumps) * horizon) if n_jumps else np.empty(0)
    jt = jt[jt > 0.0]
    n_jumps = len(jt)
    if n_jumps == 0:
        times = np.array([0.0, horizon])
        pts = np.vstack([np.zeros(spec.d), drift * horizon])
        return PathSample(times, pts)
    if spec.jump_law == "pareto":
        norms = rng.random(n_jumps) ** (-1.0 / spec.tail_alpha)
        dirs = rng.standard_normal((n_jumps, spec.d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        jumps = norms[:, None] * dirs
    else:
        jumps = rng.standard_normal((n_jumps, spec.d))
    uniq, inv = np.unique(jt, return_inverse=True)
    if len(uniq) < n_jumps:
        merged = np.zeros((len(uniq), spec.d))
        np.add.at(merged, inv, jumps)
        jt, jumps = uniq, merged
    times = np.concatenate(([0.0], jt, [horizon])) if jt[-1] < horizon else np.concatenate(([0.0], jt))
    pts = np.zeros((len(times), spec.d))
    pts[1 : len(jt) + 1] = np.cumsum(jumps, axis=0)
    if len(times) > len(jt) + 1:
        pts[-1] = pts[-2]
    pts += times[:, None] * drift
    return PathSample(times, pts)


def stream_id(name: str) -> int:
    """Stable 64-bit stream label for an experiment name."""
    if not name:
        raise ParameterError("stream name must be nonempty")
    digest = hashlib.blake2s(name.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def trial_rng(master_seed: int, stream: int, trial: int) -> np.random.Generator:
    """Generator for one trial, independent across (stream, trial) pairs.

    Seeding by the full (master_seed, stream, trial) tuple makes every
    trial reproducible in isolation, so parallel schedules and trial order
    cannot change any result.
    """
    return np.random.default_rng((int(master_seed), int(stream), int(trial)))
