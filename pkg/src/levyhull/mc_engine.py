"""Monte Carlo experiment runners for hull functionals.

Each experiment draws independent trials, pushes them through the hull
pipeline, and reduces to an EstimateResult, attaching the matching
closed-form target when one exists. Reproducibility contract: every trial
seeds its own generator from (master_seed, experiment stream, trial
index), and results land in index-addressed slots, so the output is
bit-identical for any thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .closed_form import (
    ClosedFormTarget,
    ball_intrinsic_volume,
    ev_intrinsic_isotropic,
    expected_faces_at_origin,
)
from .errors import ConfigError, ParameterError
from .hullgeom import (
    _point_triangles_dist,
    geom_eps,
    hull2d,
    hull3d,
    intrinsic_volumes_2d,
    intrinsic_volumes_3d,
)
from .results import EstimateResult
from .rng_stable import StableSpec, sample_walk_path, stream_id, trial_rng

__all__ = [
    "ExperimentConfig",
    "ExperimentKind",
    "hill_tail_index",
    "ks_two_sample",
    "run_boundary_origin_experiment",
    "run_faces_experiment",
    "run_gram_experiment",
    "run_interior_endpoint_experiment",
    "run_intrinsic_volume_experiment",
    "run_tail_index_experiment",
]


class ExperimentKind(str, Enum):
    INTRINSIC_VOLUMES = "intrinsic_volumes"
    GRAM_DETERMINANT = "gram_determinant"
    BOUNDARY_ORIGIN = "boundary_origin"
    INTERIOR_ENDPOINT = "interior_endpoint"
    TAIL_INDEX = "tail_index"
    FACES_COUNT = "faces_count"


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment request: which statistic, which process, how hard."""

    experiment: ExperimentKind
    spec: StableSpec
    n_steps: int = 10_000
    trials: int = 10_000
    j_orders: tuple = ()
    horizon: float = 1.0
    master_seed: int = 0
    tolerance_sigma: float = 4.0
    hill_k: int | None = None

    def __post_init__(self):
        try:
            object.__setattr__(self, "experiment", ExperimentKind(self.experiment))
        except ValueError:
            raise ConfigError(f"unknown experiment {self.experiment!r}") from None
        if not isinstance(self.spec, StableSpec):
            raise ConfigError("spec must be a StableSpec")
        if int(self.trials) < 100:
            raise ConfigError(f"trials must be >= 100, got {self.trials!r}")
        if int(self.n_steps) < 1:
            raise ConfigError(f"n_steps must be >= 1, got {self.n_steps!r}")
        object.__setattr__(self, "trials", int(self.trials))
        object.__setattr__(self, "n_steps", int(self.n_steps))
        js = tuple(int(j) for j in self.j_orders)
        if js and not set(js) <= set(range(1, self.spec.d + 1)):
            raise ConfigError(
                f"j_orders {js!r} must lie in 1..{self.spec.d}"
            )
        object.__setattr__(self, "j_orders", js)
        if not self.horizon > 0.0:
            raise ConfigError(f"horizon must be > 0, got {self.horizon!r}")
        if not self.tolerance_sigma > 0.0:
            raise ConfigError(
                f"tolerance_sigma must be > 0, got {self.tolerance_sigma!r}"
            )
        if self.hill_k is not None and int(self.hill_k) < 1:
            raise ConfigError(f"hill_k must be >= 1, got {self.hill_k!r}")

    def orders(self) -> tuple:
        return self.j_orders or tuple(range(1, self.spec.d + 1))


def _map_trials(fn, trials: int, threads: int = 1):
    """Run fn(t) for t in range(trials); any thread count, same output
    order because each result is written to its own index."""
    if threads <= 1:
        for t in range(trials):
            fn(t)
        return
    block = max(1, -(-trials // (threads * 8)))

    def run_block(lo: int, hi: int):
        for t in range(lo, hi):
            fn(t)

    with ThreadPoolExecutor(max_workers=threads) as ex:
        futs = [
            ex.submit(run_block, lo, min(lo + block, trials))
            for lo in range(0, trials, block)
        ]
        for f in futs:
            f.result()


def _require_walk_spec(spec: StableSpec, dims=(2, 3)):
    if spec.d not in dims:
        raise ConfigError(f"dimension {spec.d} unsupported here (allowed {dims})")
    if spec.flavor == "cpp":
        raise ConfigError("experiment needs a stable or Brownian walk, not cpp")


def _hull_of(points: np.ndarray, d: int):
    return hull2d(points) if d == 2 else hull3d(points)


def _intrinsic_values(poly) -> tuple:
    """(V_1, ..., V_d) for a hull in its ambient dimension, with the
    degenerate cases (possible only at tiny n_steps) filled in by hand."""
    if poly.dim == 2:
        iv = intrinsic_volumes_2d(poly)
        return (iv[1], iv[2])
    if poly.intrinsic_dim == 3:
        iv = intrinsic_volumes_3d(poly)
        return (iv[1], iv[2], iv[3])
    v = poly.vertices
    if poly.intrinsic_dim == 0:
        return (0.0, 0.0, 0.0)
    if poly.intrinsic_dim == 1:
        return (float(np.linalg.norm(v[-1] - v[0])), 0.0, 0.0)
    # planar ring in 3-space: intrinsic volumes live in the affine hull
    nxt = np.roll(v, -1, axis=0)
    perim = float(np.linalg.norm(nxt - v, axis=1).sum())
    area = 0.5 * float(np.linalg.norm(np.cross(v, nxt).sum(axis=0)))
    return (perim / 2.0, area, 0.0)


def _edge_distances_2d(poly, x: np.ndarray) -> np.ndarray:
    v = poly.vertices
    e = np.roll(v, -1, axis=0) - v
    tt = ((x - v) * e).sum(axis=1) / np.maximum((e * e).sum(axis=1), 1e-300)
    proj = v + np.clip(tt, 0.0, 1.0)[:, None] * e
    return np.linalg.norm(x - proj, axis=1)


def _boundary_distance(poly, x: np.ndarray) -> float:
    """Distance from x to the hull's boundary. Degenerate hulls are all
    boundary, so the distance is to the body itself."""
    v = poly.vertices
    if poly.intrinsic_dim == 0:
        return float(np.linalg.norm(x - v[0]))
    if poly.intrinsic_dim == 1:
        seg = poly.vertices
        e = seg[-1] - seg[0]
        t = float(np.clip((x - seg[0]) @ e / max(e @ e, 1e-300), 0.0, 1.0))
        return float(np.linalg.norm(x - (seg[0] + t * e)))
    if poly.dim == 2:
        return float(_edge_distances_2d(poly, x).min())
    if poly.intrinsic_dim == 2:
        return 0.0  # flat body in 3-space has empty interior
    f = np.asarray(poly.facets)
    return float(
        _point_triangles_dist(
            x, poly.vertices[f[:, 0]], poly.vertices[f[:, 1]], poly.vertices[f[:, 2]]
        ).min()
    )


def _count_incident_faces(poly, x: np.ndarray, tol: float) -> int:
    """Number of hull faces (edges in 2D, facets in 3D) passing within tol
    of x; ties count as incident."""
    if poly.intrinsic_dim < poly.dim:
        return 1 if _boundary_distance(poly, x) <= tol else 0
    if poly.dim == 2:
        return int((_edge_distances_2d(poly, x) <= tol).sum())
    f = np.asarray(poly.facets)
    d = _point_triangles_dist(
        x, poly.vertices[f[:, 0]], poly.vertices[f[:, 1]], poly.vertices[f[:, 2]]
    )
    return int((d <= tol).sum())


def run_intrinsic_volume_experiment(cfg: ExperimentConfig, threads: int = 1):
    """Mean V_j of walk hulls, one EstimateResult per requested j, each
    with its closed-form target scaled by horizon^(j/alpha)."""
    _require_walk_spec(cfg.spec)
    spec = cfg.spec
    js = cfg.orders()
    stream = stream_id("intrinsic_volumes")
    vals = np.empty((cfg.trials, len(js)))
    cols = {j: k for k, j in enumerate(js)}

    def one(t: int):
        rng = trial_rng(cfg.master_seed, stream, t)
        path = sample_walk_path(spec, cfg.n_steps, cfg.horizon, rng)
        iv = _intrinsic_values(_hull_of(path.points, spec.d))
        for j, k in cols.items():
            vals[t, k] = iv[j - 1]

    _map_trials(one, cfg.trials, threads)
    out = []
    for j, k in cols.items():
        limit = ev_intrinsic_isotropic(spec.alpha, spec.c, spec.d, j)
        tgt = ClosedFormTarget(
            "ev_intrinsic",
            limit * cfg.horizon ** (j / spec.alpha),
            {
                "alpha": spec.alpha,
                "c": spec.c,
                "d": spec.d,
                "j": j,
                "horizon": cfg.horizon,
                "n_steps": cfg.n_steps,
            },
        )
        out.append(
            EstimateResult.from_samples(vals[:, k], seed=cfg.master_seed, target=tgt)
        )
    return out


_GRAM_CHUNK = 8192


def run_gram_experiment(
    d: int,
    j: int,
    dist: str = "gaussian",
    trials: int = 10_000,
    seed: int = 0,
    threads: int = 1,
) -> EstimateResult:
    """E sqrt(det M^T M) for M with j i.i.d. standard Gaussian columns in
    R^d, against the target j! V_j((2 pi)^(-1/2) B^d)."""
    d, j, trials = int(d), int(j), int(trials)
    if not 1 <= j <= d <= 6:
        raise ParameterError(f"need 1 <= j <= d <= 6, got j={j}, d={d}")
    if dist not in ("gaussian", "standard_gaussian"):
        raise ParameterError(f"unsupported distribution {dist!r}")
    if trials < 2:
        raise ParameterError("need at least 2 trials")
    target = ClosedFormTarget(
        "gram_det",
        math.factorial(j)
        * ball_intrinsic_volume(d, j, 1.0 / math.sqrt(2.0 * math.pi)),
        {"d": d, "j": j, "dist": dist},
    )
    stream = stream_id("gram_determinant")
    out = np.empty(trials)

    def block(b: int):
        lo = b * _GRAM_CHUNK
        n = min(_GRAM_CHUNK, trials - lo)
        rng = trial_rng(seed, stream, lo)
        x = rng.standard_normal((n, j, d))
        dets = np.linalg.det(x @ np.swapaxes(x, 1, 2))
        out[lo : lo + n] = np.sqrt(np.maximum(dets, 0.0))

    _map_trials(block, -(-trials // _GRAM_CHUNK), threads)
    return EstimateResult.from_samples(out, seed=seed, target=target)


def run_boundary_origin_experiment(cfg: ExperimentConfig, threads: int = 1):
    """Frequency of the origin lying on the hull boundary, plus the
    Markov bound E(faces at origin); the frequency can never exceed the
    bound beyond noise since the face count is >= 1 on that event."""
    _require_walk_spec(cfg.spec, dims=(2,))
    stream = stream_id("boundary_origin")
    vals = np.empty(cfg.trials)
    origin = np.zeros(2)

    def one(t: int):
        rng = trial_rng(cfg.master_seed, stream, t)
        path = sample_walk_path(cfg.spec, cfg.n_steps, cfg.horizon, rng)
        poly = hull2d(path.points)
        tol = geom_eps(poly.vertices)
        vals[t] = 1.0 if _boundary_distance(poly, origin) <= tol else 0.0

    _map_trials(one, cfg.trials, threads)
    freq = EstimateResult.from_samples(vals, seed=cfg.master_seed)
    return freq, expected_faces_at_origin(cfg.n_steps, 2)


def run_interior_endpoint_experiment(
    cfg: ExperimentConfig, threads: int = 1
) -> EstimateResult:
    """Frequency of the walk endpoint falling strictly inside the hull of
    the whole path; tends to 1 as n_steps grows. Ties with the boundary
    tolerance count as non-interior."""
    _require_walk_spec(cfg.spec)
    stream = stream_id("interior_endpoint")
    vals = np.empty(cfg.trials)
    d = cfg.spec.d

    def one(t: int):
        rng = trial_rng(cfg.master_seed, stream, t)
        path = sample_walk_path(cfg.spec, cfg.n_steps, cfg.horizon, rng)
        poly = _hull_of(path.points, d)
        if poly.intrinsic_dim < d:
            vals[t] = 0.0
            return
        tol = geom_eps(poly.vertices)
        vals[t] = 1.0 if _boundary_distance(poly, path.points[-1]) > tol else 0.0

    _map_trials(one, cfg.trials, threads)
    return EstimateResult.from_samples(vals, seed=cfg.master_seed)


def run_faces_experiment(cfg: ExperimentConfig, threads: int = 1) -> EstimateResult:
    """Mean number of hull faces containing the origin, against the exact
    combinatorial formula. The 3D formula is a validation gate rather than
    a settled identity, so reporting layers mark d = 3 as informational."""
    _require_walk_spec(cfg.spec)
    stream = stream_id("faces_count")
    vals = np.empty(cfg.trials)
    d = cfg.spec.d
    origin = np.zeros(d)

    def one(t: int):
        rng = trial_rng(cfg.master_seed, stream, t)
        path = sample_walk_path(cfg.spec, cfg.n_steps, cfg.horizon, rng)
        poly = _hull_of(path.points, d)
        tol = geom_eps(poly.vertices)
        vals[t] = float(_count_incident_faces(poly, origin, tol))

    _map_trials(one, cfg.trials, threads)
    target = ClosedFormTarget(
        "expected_faces_at_origin",
        expected_faces_at_origin(cfg.n_steps, d),
        {"n": cfg.n_steps, "d": d},
    )
    return EstimateResult.from_samples(vals, seed=cfg.master_seed, target=target)


def hill_tail_index(samples, k: int | None = None) -> float:
    """Hill estimator of the tail index from the top k order statistics:
    k / sum(log(X_(i) / X_(k+1))). Default k = floor(len**0.6)."""
    arr = np.asarray(samples, dtype=np.float64).ravel()
    if arr.size < 3:
        raise ParameterError("need at least 3 samples")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise ParameterError("samples must be finite and strictly positive")
    if k is None:
        k = int(arr.size**0.6)
    k = int(k)
    if not 1 <= k < arr.size:
        raise ParameterError(f"k must satisfy 1 <= k < {arr.size}, got {k}")
    srt = np.sort(arr)[::-1]
    s = float(np.log(srt[:k] / srt[k]).sum())
    if s <= 0.0:
        return math.inf
    return k / s


def run_tail_index_experiment(cfg: ExperimentConfig, threads: int = 1):
    """Hill tail index of per-trial V_j samples (first requested j). Heavy
    stable jumps should reproduce the index alpha; the stderr is the
    asymptotic hill deviation estimate / sqrt(k)."""
    _require_walk_spec(cfg.spec)
    j = cfg.orders()[0]
    stream = stream_id("tail_index")
    vals = np.empty(cfg.trials)
    col = j - 1

    def one(t: int):
        rng = trial_rng(cfg.master_seed, stream, t)
        path = sample_walk_path(cfg.spec, cfg.n_steps, cfg.horizon, rng)
        vals[t] = _intrinsic_values(_hull_of(path.points, cfg.spec.d))[col]

    _map_trials(one, cfg.trials, threads)
    k = cfg.hill_k if cfg.hill_k is not None else int(cfg.trials**0.6)
    est = hill_tail_index(vals, k)
    stderr = est / math.sqrt(k) if math.isfinite(est) else 0.0
    return EstimateResult(
        mean=est, stderr=stderr, trials=cfg.trials, seed=cfg.master_seed
    )


def _kolmogorov_sf(lam: float) -> float:
    if lam < 1e-8:
        return 1.0
    total = 0.0
    for jj in range(1, 101):
        term = 2.0 * (-1.0) ** (jj - 1) * math.exp(-2.0 * jj * jj * lam * lam)
        total += term
        if abs(term) < 1e-16:
            break
    return min(max(total, 0.0), 1.0)


def ks_two_sample(a, b) -> tuple:
    """Two-sample Kolmogorov-Smirnov statistic with the asymptotic
    p-value."""
    a = np.sort(np.asarray(a, dtype=np.float64).ravel())
    b = np.sort(np.asarray(b, dtype=np.float64).ravel())
    if a.size == 0 or b.size == 0:
        raise ParameterError("both samples must be non-empty")
    data = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, data, side="right") / a.size
    cdf_b = np.searchsorted(b, data, side="right") / b.size
    stat = float(np.abs(cdf_a - cdf_b).max())
    en = a.size * b.size / (a.size + b.size)
    lam = (math.sqrt(en) + 0.12 + 0.11 / math.sqrt(en)) * stat
    return stat, _kolmogorov_sf(lam)
