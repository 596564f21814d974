"""Exit-time splitting, renewal statistics, and long-horizon convergence
experiments.

A path is split at the successive first times it travels unit distance
from its previous anchor. The anchors form an embedded random walk, the
exit count per unit time obeys a renewal law, and rescaled hulls of
heavy-jump processes approach the hull of a stable path. Exit detection
conventions: "grid" takes the first sample at distance >= 1 (positive
time bias, exact for pure-jump paths sampled at jump times), "linear"
interpolates the crossing on the segment (exact for piecewise-linear
motion), and passing ``drift`` scans the piecewise jump-plus-drift motion
exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .closed_form import ClosedFormTarget, gamma_fn
from .errors import ConfigError, ParameterError
from .hullgeom import hausdorff, hull2d, hull3d, intrinsic_volumes_2d
from .mc_engine import _map_trials, hill_tail_index, ks_two_sample
from .results import EstimateResult
from .rng_stable import (
    PathSample,
    StableSpec,
    sample_cpp_path,
    sample_walk_path,
    stream_id,
    trial_rng,
)

__all__ = [
    "ExitRecord",
    "estimate_mean_exit_time",
    "exit_times",
    "exit_value_tail_experiment",
    "hull_range_continuity_check",
    "renewal_ratio_experiment",
    "scaled_hull_convergence",
]


@dataclass(frozen=True)
class ExitRecord:
    """Successive unit-ball exit times and positions along one path."""

    exit_times: np.ndarray
    exit_points: np.ndarray
    horizon: float

    def __post_init__(self):
        t = np.asarray(self.exit_times, dtype=np.float64)
        p = np.asarray(self.exit_points, dtype=np.float64)
        if t.ndim != 1 or p.ndim != 2 or len(t) != len(p):
            raise ParameterError("exit_times (k,) must align with exit_points (k, d)")
        if not self.horizon > 0.0:
            raise ParameterError(f"horizon must be > 0, got {self.horizon!r}")
        if t.size:
            if not (np.all(np.diff(t) > 0.0) and t[0] > 0.0 and t[-1] <= self.horizon):
                raise ParameterError(
                    "exit times must be strictly increasing within (0, horizon]"
                )
            anchors = np.vstack([np.zeros((1, p.shape[1])), p])
            steps = np.linalg.norm(np.diff(anchors, axis=0), axis=1)
            if float(steps.min()) < 1.0 - 1e-6:
                raise ParameterError("consecutive exit increments must reach length 1")
        t.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "exit_times", t)
        object.__setattr__(self, "exit_points", p)
        object.__setattr__(self, "horizon", float(self.horizon))

    @property
    def n_exits(self) -> int:
        return int(self.exit_times.size)

    def count_up_to(self, s: float) -> int:
        return int(np.searchsorted(self.exit_times, s, side="right"))


def _exits_grid(times, pts):
    out_t, out_p = [], []
    anchor = pts[0]
    start, n = 1, len(pts)
    block = 2048
    while start < n:
        stop = min(start + block, n)
        d2 = ((pts[start:stop] - anchor) ** 2).sum(axis=1)
        hits = np.nonzero(d2 >= 1.0)[0]
        if hits.size == 0:
            start = stop
            continue
        k = start + int(hits[0])
        out_t.append(times[k])
        out_p.append(pts[k])
        anchor = pts[k]
        start = k + 1
    return out_t, out_p


def _first_sphere_crossing(q, v, s_lo, s_hi):
    """Smallest s in (s_lo, s_hi] with ||q + s v|| = 1, or None; assumes
    the motion starts inside the closed unit ball."""
    vv = float(v @ v)
    if vv <= 0.0:
        return None
    qv = float(q @ v)
    disc = qv * qv - vv * (float(q @ q) - 1.0)
    if disc < 0.0:
        return None
    s = (-qv + math.sqrt(disc)) / vv
    if s <= s_lo + 1e-15 or s > s_hi + 1e-12:
        return None
    return min(s, s_hi)


def _exits_linear(times, pts):
    # The ball is convex, so a segment with both endpoints inside the
    # anchor ball stays inside: only the first sample at distance >= 1
    # can close a crossing segment, which lets the search run blockwise.
    out_t, out_p = [], []
    anchor = pts[0].copy()
    start, n = 1, len(pts)
    block = 2048
    while start < n:
        stop = min(start + block, n)
        d2 = ((pts[start:stop] - anchor) ** 2).sum(axis=1)
        hits = np.nonzero(d2 >= 1.0)[0]
        if hits.size == 0:
            start = stop
            continue
        k = start + int(hits[0])
        a, b = pts[k - 1], pts[k]
        seg = b - a
        dt = times[k] - times[k - 1]
        s_lo = 0.0
        while True:
            s = _first_sphere_crossing(a - anchor, seg, s_lo, 1.0)
            if s is None:
                s = 1.0  # endpoint sits on the sphere within rounding
            out_t.append(times[k - 1] + s * dt)
            anchor = a + s * seg
            out_p.append(anchor.copy())
            s_lo = s
            if s >= 1.0 or ((b - anchor) ** 2).sum() < 1.0:
                break
        start = k + 1
    return out_t, out_p


def _exits_with_drift(times, pts, v):
    out_t, out_p = [], []
    anchor = pts[0].copy()
    last_t = 0.0
    for k in range(len(pts) - 1):
        p_k = pts[k]
        dt = times[k + 1] - times[k]
        s_lo = 0.0
        while True:
            s = _first_sphere_crossing(p_k - anchor, v, s_lo, dt)
            if s is None:
                break
            last_t = times[k] + s
            anchor = p_k + s * v
            out_t.append(last_t)
            out_p.append(anchor.copy())
            s_lo = s
        # the jump lands the path at pts[k + 1]; it may exit outright
        if float(np.linalg.norm(pts[k + 1] - anchor)) >= 1.0:
            last_t = max(times[k + 1], np.nextafter(last_t, math.inf))
            anchor = pts[k + 1].copy()
            out_t.append(last_t)
            out_p.append(anchor.copy())
    return out_t, out_p


def exit_times(path: PathSample, drift=None, mode: str = "grid") -> ExitRecord:
    """Scan a path for its successive unit-ball exits.

    mode "grid": exits at the first sample point at distance >= 1 from the
    anchor (exact for pure-jump paths sampled at jump times). mode
    "linear": exact crossing of the linearly interpolated segment, so the
    recorded increment has length exactly 1. Passing ``drift`` treats the
    samples as jump positions of a jump-plus-drift motion and scans that
    motion exactly; mode is ignored.
    """
    if not isinstance(path, PathSample):
        raise ParameterError("path must be a PathSample")
    times, pts = path.times, path.points
    if drift is not None:
        v = np.asarray(drift, dtype=np.float64)
        if v.shape != (pts.shape[1],):
            raise ParameterError("drift must match the path dimension")
        out_t, out_p = _exits_with_drift(times, pts, v)
    elif mode == "grid":
        out_t, out_p = _exits_grid(times, pts)
    elif mode == "linear":
        out_t, out_p = _exits_linear(times, pts)
    else:
        raise ParameterError(f"unknown mode {mode!r}")
    d = pts.shape[1]
    return ExitRecord(
        np.asarray(out_t, dtype=np.float64),
        np.asarray(out_p, dtype=np.float64).reshape(len(out_t), d),
        horizon=float(times[-1]),
    )


def _sample_any_path(spec: StableSpec, horizon: float, n_steps: int, rng):
    if spec.flavor == "cpp":
        return sample_cpp_path(spec, horizon, rng)
    return sample_walk_path(spec, n_steps, horizon, rng)


def _record_for(spec: StableSpec, horizon: float, n_steps: int, rng) -> ExitRecord:
    path = _sample_any_path(spec, horizon, n_steps, rng)
    if spec.flavor == "cpp":
        drift = np.asarray(spec.drift, dtype=np.float64)
        if float(np.abs(drift).max()) > 0.0:
            return exit_times(path, drift=drift)
        return exit_times(path, mode="grid")
    return exit_times(path, mode="linear")


def estimate_mean_exit_time(
    spec: StableSpec,
    trials: int = 2000,
    seed: int = 0,
    horizon: float = 40.0,
    dt: float = 0.01,
    threads: int = 1,
) -> EstimateResult:
    """Mean first exit time from the unit ball, from an independent batch
    of paths. Paths that never exit within the horizon are dropped (their
    count is recoverable from ``trials`` minus the result's trials)."""
    if trials < 2:
        raise ParameterError("need at least 2 trials")
    stream = stream_id("mean_exit_time")
    n_steps = max(1, int(round(horizon / dt)))
    vals = np.full(trials, np.nan)

    def one(t: int):
        rec = _record_for(spec, horizon, n_steps, trial_rng(seed, stream, t))
        if rec.n_exits:
            vals[t] = rec.exit_times[0]

    _map_trials(one, trials, threads)
    got = vals[~np.isnan(vals)]
    if got.size < 2:
        raise ConfigError("almost no paths exited; increase the horizon")
    return EstimateResult.from_samples(got, seed=seed)


def renewal_ratio_experiment(
    spec: StableSpec,
    t_values,
    trials: int = 1000,
    seed: int = 0,
    dt: float = 0.01,
    et1_trials: int | None = None,
    threads: int = 1,
):
    """E[N_t / t] for each t, against the renewal rate 1/E(T_1) estimated
    from an independent batch. Both sides scan paths sampled at the same
    dt, so the grid detection bias largely cancels in the comparison. The
    rate estimate rides along in each result's target params."""
    t_values = [float(t) for t in t_values]
    if not t_values or any(t <= 0.0 for t in t_values):
        raise ParameterError("t_values must be positive")
    if trials < 2:
        raise ParameterError("need at least 2 trials")
    et1 = estimate_mean_exit_time(
        spec,
        trials=et1_trials or max(trials, 1000),
        seed=seed + 1,
        dt=dt,
        threads=threads,
    )
    rate = 1.0 / et1.mean
    out = []
    for t_idx, t in enumerate(t_values):
        stream = stream_id(f"renewal_ratio_{t_idx}")
        n_steps = max(1, int(round(t / dt)))
        vals = np.empty(trials)

        def one(k: int, t=t, n_steps=n_steps, stream=stream, vals=vals):
            rec = _record_for(spec, t, n_steps, trial_rng(seed, stream, k))
            vals[k] = rec.n_exits / t

        _map_trials(one, trials, threads)
        target = ClosedFormTarget(
            "renewal_rate",
            rate,
            {
                "t": t,
                "dt": dt,
                "et1_mean": et1.mean,
                "et1_stderr": et1.stderr,
                "et1_trials": et1.trials,
            },
        )
        out.append(EstimateResult.from_samples(vals, seed=seed, target=target))
    return out


def _fit_attractor_scale(inc_coords: np.ndarray, alpha: float) -> float:
    """Per-increment scale c of the stable law attracting the embedded
    walk, from its increment first coordinates. Heavy tails are pinned by
    the tail constant (top order statistics mapped through the Tauberian
    factor); the Gaussian edge alpha = 2 is pinned by the variance. A
    median fit is not consistent here: the bulk of heavy-jump sums lags
    the stable law long after the tail has converged."""
    x = np.asarray(inc_coords, dtype=np.float64)
    x = x[np.isfinite(x)]
    if x.size < 50:
        raise ConfigError("too few embedded increments to fit a scale")
    if alpha >= 2.0:
        c = float(np.var(x)) / 2.0  # exp(-c u^2) has variance 2c
        if c <= 0.0:
            raise ConfigError("degenerate increments; cannot fit a scale")
        return c
    mag = np.sort(np.abs(x))
    n = mag.size
    k = min(n - 1, max(20, int(n**0.6)))
    xk = float(mag[n - k - 1])
    if xk <= 0.0:
        raise ConfigError("degenerate increments; cannot fit a scale")
    tail_const = (k / n) * xk**alpha  # P(|inc| > t) ~ tail_const * t^-alpha
    tauberian = math.pi / (2.0 * gamma_fn(alpha) * math.sin(math.pi * alpha / 2.0))
    return tail_const * tauberian


def scaled_hull_convergence(
    spec: StableSpec,
    t_large: float,
    trials: int = 400,
    seed: int = 0,
    n_steps_limit: int = 2000,
    threads: int = 1,
):
    """Compare V_1 of the rescaled long-horizon hull t^(-1/alpha) Z_t with
    V_1 of a fitted stable-walk hull run to time 1/E(T_1). Returns
    (ks_stat, p_value, report). The comparison is one-dimensional: it
    probes the scaling limit, not the full set-valued law."""
    if spec.flavor != "cpp":
        raise ConfigError("convergence experiment expects a compound-jump spec")
    if spec.d != 2:
        raise ConfigError("convergence experiment implemented for d = 2")
    if not t_large >= 10.0:
        raise ParameterError(f"t_large must be >= 10, got {t_large!r}")
    if trials < 10:
        raise ParameterError("need at least 10 trials")
    if spec.jump_law == "pareto":
        alpha = float(spec.tail_alpha)
        if not 0.0 < alpha < 2.0:
            raise ConfigError("heavy-jump tail index must lie in (0, 2)")
    else:
        alpha = 2.0  # square-integrable jumps attract to the Gaussian law

    # batch of exit records: renewal spans and embedded-walk increments,
    # pooled across paths (the renewal increments are i.i.d.)
    stream_fit = stream_id("scaled_hull_fit")
    fit_trials = max(300, trials)
    spans = [None] * fit_trials
    incs = [None] * fit_trials
    fit_horizon = 60.0 / max(spec.jump_rate, 1e-12)

    def fit_one(k: int):
        rec = _record_for(spec, fit_horizon, 1, trial_rng(seed, stream_fit, k))
        if rec.n_exits:
            spans[k] = np.diff(rec.exit_times, prepend=0.0)
            anchors = np.vstack([np.zeros(spec.d), rec.exit_points])
            incs[k] = np.diff(anchors, axis=0)[:, 0]

    _map_trials(fit_one, fit_trials, threads)
    if sum(s is not None for s in spans) < 10:
        raise ConfigError("almost no paths exited; raise jump_rate or horizon")
    all_spans = np.concatenate([s for s in spans if s is not None])
    all_incs = np.concatenate([v for v in incs if v is not None])
    et1 = float(all_spans.mean())
    c_fit = _fit_attractor_scale(all_incs, alpha)
    limit_spec = StableSpec(alpha=alpha, c=c_fit, d=2)

    stream_a = stream_id("scaled_hull_long")
    stream_b = stream_id("scaled_hull_limit")
    va = np.empty(trials)
    vb = np.empty(trials)
    factor = t_large ** (-1.0 / alpha)

    def one_long(k: int):
        rng = trial_rng(seed, stream_a, k)
        path = sample_cpp_path(spec, t_large, rng)
        poly = hull2d(factor * path.points)
        va[k] = intrinsic_volumes_2d(poly)[1]

    def one_limit(k: int):
        rng = trial_rng(seed, stream_b, k)
        path = sample_walk_path(limit_spec, n_steps_limit, 1.0 / et1, rng)
        poly = hull2d(path.points)
        vb[k] = intrinsic_volumes_2d(poly)[1]

    _map_trials(one_long, trials, threads)
    _map_trials(one_limit, trials, threads)
    stat, p = ks_two_sample(va, vb)
    report = {
        "alpha": alpha,
        "t_large": t_large,
        "trials": trials,
        "et1_mean": et1,
        "fitted_c": c_fit,
        "ks_stat": stat,
        "p_value": p,
        "mean_long": float(va.mean()),
        "mean_limit": float(vb.mean()),
    }
    return stat, p, report


def exit_value_tail_experiment(
    spec: StableSpec,
    trials: int = 10_000,
    seed: int = 0,
    k: int | None = None,
    threads: int = 1,
) -> float:
    """Hill tail index of the first-exit displacement norm ||X(T_1)||.
    Heavy pareto jumps hand their tail to the overshoot; returns inf for
    degenerate (drift-only) exits, which have no tail at all."""
    if spec.flavor != "cpp":
        raise ConfigError("exit-tail experiment expects a compound-jump spec")
    if trials < 10:
        raise ParameterError("need at least 10 trials")
    stream = stream_id("exit_value_tail")
    horizon = 60.0 / max(spec.jump_rate, 1e-12) if spec.jump_rate > 0 else 10.0
    vals = np.full(trials, np.nan)

    def one(t: int):
        rec = _record_for(spec, horizon, 1, trial_rng(seed, stream, t))
        if rec.n_exits:
            vals[t] = float(np.linalg.norm(rec.exit_points[0]))

    _map_trials(one, trials, threads)
    got = vals[~np.isnan(vals)]
    if got.size < 10:
        raise ConfigError("almost no paths exited within the horizon")
    if float(got.std()) < 1e-12:
        return math.inf  # degenerate exit norm, e.g. pure drift
    return hill_tail_index(got, k)


def hull_range_continuity_check(path_a: PathSample, path_b: PathSample) -> bool:
    """Hulls are 1-Lipschitz in the uniform path distance: check that the
    Hausdorff gap between the two range hulls is at most the largest
    pointwise gap (plus geometric tolerance) on a shared time grid."""
    if not isinstance(path_a, PathSample) or not isinstance(path_b, PathSample):
        raise ParameterError("both arguments must be PathSample")
    if path_a.points.shape != path_b.points.shape or not np.allclose(
        path_a.times, path_b.times
    ):
        raise ParameterError("paths must share one time grid")
    d = path_a.points.shape[1]
    if d not in (2, 3):
        raise ParameterError("implemented for dimensions 2 and 3")
    uniform = float(np.linalg.norm(path_a.points - path_b.points, axis=1).max())
    build = hull2d if d == 2 else hull3d
    ha, hb = build(path_a.points), build(path_b.points)
    tol = 1e-9 * (1.0 + float(np.abs(path_a.points).max()))
    return hausdorff(ha, hb) <= uniform + tol
