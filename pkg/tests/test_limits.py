"""Exit-time records, renewal ratios, scaling-limit comparisons, and the
hull continuity bound."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyhull.errors import ConfigError, ParameterError
from levyhull.hullgeom import hausdorff, hull2d, intrinsic_volumes_2d
from levyhull.limits import (
    ExitRecord,
    estimate_mean_exit_time,
    exit_times,
    exit_value_tail_experiment,
    hull_range_continuity_check,
    renewal_ratio_experiment,
    scaled_hull_convergence,
)
from levyhull.mc_engine import ks_two_sample
from levyhull.rng_stable import (
    PathSample,
    StableSpec,
    sample_cpp_path,
    sample_walk_path,
    stream_id,
    trial_rng,
)

BROWNIAN2 = StableSpec(alpha=2.0, c=0.5, d=2, flavor="brownian")
HEAVY = StableSpec(alpha=1.5, c=1.0, d=2, flavor="cpp", tail_alpha=1.5, jump_rate=3.0)
DRIFT_ONLY = StableSpec(
    alpha=1.5, c=1.0, d=2, flavor="cpp", tail_alpha=1.5, jump_rate=0.0,
    drift=(2.0, 0.0),
)


def _line_path(xs, times=None):
    xs = np.asarray(xs, dtype=np.float64)
    pts = np.column_stack([xs, np.zeros_like(xs)])
    t = np.arange(len(xs), dtype=np.float64) if times is None else np.asarray(times)
    return PathSample(times=t, points=pts)


class TestExitRecord:
    def test_round_trip_and_counts(self):
        rec = ExitRecord(
            np.array([0.5, 1.25]), np.array([[1.0, 0.0], [2.1, 0.0]]), horizon=2.0
        )
        assert rec.n_exits == 2
        assert rec.count_up_to(0.4) == 0
        assert rec.count_up_to(0.5) == 1
        assert rec.count_up_to(2.0) == 2
        assert not rec.exit_times.flags.writeable

    def test_empty_record(self):
        rec = ExitRecord(np.empty(0), np.empty((0, 2)), horizon=1.0)
        assert rec.n_exits == 0
        assert rec.count_up_to(1.0) == 0

    def test_rejects_non_increasing_times(self):
        with pytest.raises(ParameterError):
            ExitRecord(
                np.array([0.5, 0.5]), np.array([[1.0, 0.0], [2.1, 0.0]]), horizon=1.0
            )

    def test_rejects_times_beyond_horizon(self):
        with pytest.raises(ParameterError):
            ExitRecord(np.array([1.5]), np.array([[1.0, 0.0]]), horizon=1.0)

    def test_rejects_misaligned_shapes(self):
        with pytest.raises(ParameterError):
            ExitRecord(np.array([0.5]), np.array([[1.0, 0.0], [2.0, 0.0]]), horizon=1.0)

    def test_rejects_short_increment(self):
        with pytest.raises(ParameterError):
            ExitRecord(
                np.array([0.5, 0.8]), np.array([[1.0, 0.0], [1.5, 0.0]]), horizon=1.0
            )


class TestExitTimes:
    def test_pure_drift_exits_every_half_unit(self):
        path = sample_cpp_path(DRIFT_ONLY, 1.0, np.random.default_rng(0))
        rec = exit_times(path, drift=DRIFT_ONLY.drift)
        assert rec.exit_times.tolist() == [0.5, 1.0]
        assert rec.exit_points.tolist() == [[1.0, 0.0], [2.0, 0.0]]

    def test_path_inside_ball_gives_empty_record(self):
        path = sample_walk_path(BROWNIAN2, 50, 1e-6, np.random.default_rng(1))
        rec = exit_times(path, mode="linear")
        assert rec.n_exits == 0

    def test_grid_mode_takes_first_sample_at_unit_distance(self):
        rec = exit_times(_line_path([0.0, 0.5, 1.5, 3.0]))
        assert rec.exit_times.tolist() == [2.0, 3.0]
        assert rec.exit_points[:, 0].tolist() == [1.5, 3.0]

    def test_linear_mode_lands_exactly_on_the_sphere(self):
        rec = exit_times(_line_path([0.0, 0.5, 1.5, 3.0]), mode="linear")
        assert rec.exit_times == pytest.approx([1.5, 2.0 + 1.0 / 3.0, 3.0], abs=1e-12)
        assert rec.exit_points[:, 0] == pytest.approx([1.0, 2.0, 3.0], abs=1e-12)
        steps = np.diff(
            np.vstack([np.zeros(2), rec.exit_points]), axis=0
        )
        assert np.linalg.norm(steps, axis=1) == pytest.approx(1.0, abs=1e-12)

    def test_zero_drift_scan_matches_grid_scan_on_jump_paths(self):
        for seed in range(40):
            path = sample_cpp_path(HEAVY, 3.0, np.random.default_rng(seed))
            a = exit_times(path, mode="grid")
            b = exit_times(path, drift=(0.0, 0.0))
            assert a.exit_times.tolist() == b.exit_times.tolist()
            assert a.exit_points.tolist() == b.exit_points.tolist()

    def test_heavy_jump_first_exit_time_matches_first_jump_clock(self):
        # pareto jump norms are >= 1, so the first jump always exits and
        # T_1 is an exponential clock with the jump rate
        vals = []
        stream = stream_id("t1_clock")
        for k in range(2000):
            path = sample_cpp_path(HEAVY, 20.0, trial_rng(0, stream, k))
            rec = exit_times(path, mode="grid")
            assert rec.n_exits >= 1
            vals.append(rec.exit_times[0])
        vals = np.asarray(vals)
        target = 1.0 / HEAVY.jump_rate
        z = (vals.mean() - target) / (vals.std(ddof=1) / math.sqrt(vals.size))
        assert abs(z) < 4.0

    def test_grid_exits_are_sample_times_with_unit_spacing(self):
        for seed in range(5):
            path = sample_walk_path(BROWNIAN2, 2000, 6.0, np.random.default_rng(seed))
            rec = exit_times(path)
            assert np.all(np.isin(rec.exit_times, path.times))
            anchors = np.vstack([np.zeros(2), rec.exit_points])
            gaps = np.linalg.norm(np.diff(anchors, axis=0), axis=1)
            assert gaps.min() >= 1.0

    def test_validation(self):
        path = _line_path([0.0, 2.0])
        with pytest.raises(ParameterError):
            exit_times(path, mode="spline")
        with pytest.raises(ParameterError):
            exit_times(path, drift=(1.0, 0.0, 0.0))
        with pytest.raises(ParameterError):
            exit_times(np.zeros((3, 2)))


class TestMeanExitTime:
    def test_brownian_unit_ball_exit_time_near_half(self):
        # continuous-time value is 1/d = 0.5; grid detection biases it up
        res = estimate_mean_exit_time(
            BROWNIAN2, trials=500, seed=3, horizon=12.0, dt=0.005
        )
        assert 0.45 < res.mean < 0.62
        assert res.trials == 500

    def test_grid_bias_is_positive_and_shrinks_with_dt(self):
        coarse = estimate_mean_exit_time(
            BROWNIAN2, trials=700, seed=5, horizon=12.0, dt=0.15
        )
        fine = estimate_mean_exit_time(
            BROWNIAN2, trials=700, seed=6, horizon=12.0, dt=0.01
        )
        assert coarse.mean > 0.5 and fine.mean > 0.5
        gap = coarse.mean - fine.mean
        assert gap > 3.0 * math.hypot(coarse.stderr, fine.stderr)

    def test_errors_when_paths_never_exit(self):
        with pytest.raises(ConfigError):
            estimate_mean_exit_time(BROWNIAN2, trials=50, seed=0, horizon=1e-4)

    def test_needs_two_trials(self):
        with pytest.raises(ParameterError):
            estimate_mean_exit_time(BROWNIAN2, trials=1)


class TestRenewalRatio:
    def test_pure_drift_rate_is_exactly_two(self):
        res = renewal_ratio_experiment(
            DRIFT_ONLY, [10.0], trials=50, seed=0, et1_trials=50
        )
        r = res[0]
        assert r.mean == 2.0
        assert r.stderr == 0.0
        assert r.target.value == 2.0

    def test_brownian_ratio_approaches_independent_rate(self):
        res = renewal_ratio_experiment(
            BROWNIAN2, [5.0, 50.0], trials=300, seed=2, dt=0.02, et1_trials=800
        )
        gaps = [abs(r.mean - r.target.value) / r.target.value for r in res]
        assert gaps[1] < gaps[0]
        r = res[1]
        rate_err = r.target.value * (
            r.target.params["et1_stderr"] / r.target.params["et1_mean"]
        )
        combined = math.hypot(r.stderr, rate_err)
        assert abs(r.mean - r.target.value) < 4.0 * combined

    def test_tiny_horizon_ratio_is_small_and_nonnegative(self):
        res = renewal_ratio_experiment(
            BROWNIAN2, [0.05], trials=120, seed=1, dt=0.005, et1_trials=120
        )
        assert 0.0 <= res[0].mean < 2.0

    def test_validation(self):
        with pytest.raises(ParameterError):
            renewal_ratio_experiment(BROWNIAN2, [], trials=100, seed=0)
        with pytest.raises(ParameterError):
            renewal_ratio_experiment(BROWNIAN2, [1.0, -2.0], trials=100, seed=0)
        with pytest.raises(ParameterError):
            renewal_ratio_experiment(BROWNIAN2, [1.0], trials=1, seed=0)


class TestScaledHullConvergence:
    def test_heavy_tail_ks_statistic_decreases(self):
        spec = StableSpec(
            alpha=1.5, c=1.0, d=2, flavor="cpp", tail_alpha=1.5, jump_rate=1.0
        )
        gaps = []
        for seed in range(3):
            lo, _, _ = scaled_hull_convergence(spec, 1e2, trials=300, seed=seed)
            hi, _, rep = scaled_hull_convergence(spec, 1e4, trials=300, seed=seed)
            gaps.append(lo - hi)
            assert rep["alpha"] == 1.5
        assert sum(g > 0 for g in gaps) >= 2
        assert float(np.mean(gaps)) > 0.02

    def test_gaussian_jumps_share_the_trend_at_sqrt_scaling(self):
        spec = StableSpec(
            alpha=2.0, c=0.5, d=2, flavor="cpp", jump_law="gaussian", jump_rate=2.0
        )
        lo, _, rep_lo = scaled_hull_convergence(spec, 1e2, trials=300, seed=4)
        hi, p_hi, rep_hi = scaled_hull_convergence(spec, 1e4, trials=300, seed=4)
        assert rep_lo["alpha"] == 2.0
        assert hi < lo
        assert p_hi > 0.05

    def test_split_sample_self_comparison_passes(self):
        spec = StableSpec(alpha=1.5, c=1.35, d=2)
        stream = stream_id("split_self")
        ok = 0
        runs = 20
        for seed in range(runs):
            vals = np.empty(300)
            for k in range(300):
                p = sample_walk_path(spec, 700, 1.0, trial_rng(seed, stream, k))
                vals[k] = intrinsic_volumes_2d(hull2d(p.points))[1]
            _, pv = ks_two_sample(vals[:150], vals[150:])
            ok += pv > 0.01
        assert ok >= 19

    def test_validation(self):
        with pytest.raises(ConfigError):
            scaled_hull_convergence(BROWNIAN2, 1e3, trials=100, seed=0)
        heavy = StableSpec(
            alpha=1.5, c=1.0, d=2, flavor="cpp", tail_alpha=1.5, jump_rate=1.0
        )
        with pytest.raises(ParameterError):
            scaled_hull_convergence(heavy, 5.0, trials=100, seed=0)
        with pytest.raises(ParameterError):
            scaled_hull_convergence(heavy, 1e3, trials=5, seed=0)

    def test_heavy_tail_bounds_enforced_upstream(self):
        with pytest.raises(ParameterError):
            StableSpec(
                alpha=1.5, c=1.0, d=2, flavor="cpp", tail_alpha=2.5, jump_rate=1.0
            )


class TestExitValueTail:
    def test_pareto_overshoot_recovers_tail_index(self):
        est = exit_value_tail_experiment(HEAVY, trials=6000, seed=5)
        assert abs(est - 1.5) < 0.2

    def test_lower_tail_index_also_recovered(self):
        spec = StableSpec(
            alpha=1.5, c=1.0, d=2, flavor="cpp", tail_alpha=0.8, jump_rate=3.0
        )
        est = exit_value_tail_experiment(spec, trials=4000, seed=3)
        assert abs(est - 0.8) < 0.25

    def test_gaussian_jumps_flagged_as_light(self):
        spec = StableSpec(
            alpha=2.0, c=0.5, d=2, flavor="cpp", jump_law="gaussian", jump_rate=2.0
        )
        est = exit_value_tail_experiment(spec, trials=3000, seed=1)
        assert est > 3.0

    def test_pure_drift_is_degenerate(self):
        assert exit_value_tail_experiment(DRIFT_ONLY, trials=100, seed=7) == math.inf

    def test_validation(self):
        with pytest.raises(ConfigError):
            exit_value_tail_experiment(BROWNIAN2, trials=100, seed=0)
        with pytest.raises(ParameterError):
            exit_value_tail_experiment(HEAVY, trials=5, seed=0)


class TestHullRangeContinuity:
    def _pair(self, seed, scale, d=2):
        spec = BROWNIAN2 if d == 2 else StableSpec(alpha=2.0, c=0.5, d=3, flavor="brownian")
        pa = sample_walk_path(spec, 300, 1.0, np.random.default_rng(seed))
        rng = np.random.default_rng(seed + 1000)
        delta = scale * (2.0 * rng.random(pa.points.shape) - 1.0)
        delta[0] = 0.0
        pb = PathSample(times=pa.times.copy(), points=pa.points + delta)
        return pa, pb

    def test_identical_paths(self):
        pa, _ = self._pair(0, 0.0)
        assert hull_range_continuity_check(pa, pa)

    def test_constant_shift_after_origin(self):
        pa, _ = self._pair(3, 0.0)
        shift = np.tile([0.3, -0.1], (pa.points.shape[0], 1))
        shift[0] = 0.0
        pb = PathSample(times=pa.times.copy(), points=pa.points + shift)
        assert hull_range_continuity_check(pa, pb)

    def test_uniform_perturbation_bounded_by_point_one(self):
        pa, pb = self._pair(7, 0.1)
        assert hull_range_continuity_check(pa, pb)

    def test_three_dimensional_paths(self):
        pa, pb = self._pair(11, 0.2, d=3)
        assert hull_range_continuity_check(pa, pb)

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 10_000), st.floats(0.0, 0.5))
    def test_bound_holds_for_random_perturbations(self, seed, scale):
        pa, pb = self._pair(seed, scale)
        assert hull_range_continuity_check(pa, pb)

    def test_validation(self):
        pa, _ = self._pair(0, 0.0)
        short = sample_walk_path(BROWNIAN2, 100, 1.0, np.random.default_rng(0))
        with pytest.raises(ParameterError):
            hull_range_continuity_check(pa, short)
        with pytest.raises(ParameterError):
            hull_range_continuity_check(pa, pa.points)


class TestRenewalInvariants:
    def test_exit_increments_are_iid_across_ranks(self):
        first, second = [], []
        stream = stream_id("iid_check")
        for k in range(400):
            path = sample_walk_path(BROWNIAN2, 2000, 6.0, trial_rng(0, stream, k))
            rec = exit_times(path, mode="linear")
            if rec.n_exits >= 2:
                anchors = np.vstack([np.zeros(2), rec.exit_points])
                steps = np.diff(anchors, axis=0)
                first.append(steps[0, 0])
                second.append(steps[1, 0])
        assert len(first) > 320
        _, p = ks_two_sample(np.asarray(first), np.asarray(second))
        assert p > 0.01

    def test_count_second_moment_stable_under_trial_doubling(self):
        def second_moment(trials, seed):
            stream = stream_id("count_moment")
            vals = np.empty(trials)
            for k in range(trials):
                path = sample_walk_path(
                    BROWNIAN2, 2500, 5.0, trial_rng(seed, stream, k)
                )
                vals[k] = exit_times(path).n_exits ** 2
            return vals.mean(), vals.std(ddof=1) / math.sqrt(trials)

        m1, s1 = second_moment(250, 1)
        m2, s2 = second_moment(500, 2)
        assert abs(m1 - m2) < 4.0 * math.hypot(s1, s2)

    def test_path_hull_sandwiched_by_anchor_hull_plus_unit_ball(self):
        for seed in range(8):
            path = sample_walk_path(BROWNIAN2, 3000, 6.0, np.random.default_rng(seed))
            rec = exit_times(path)
            anchors = np.vstack([np.zeros(2), rec.exit_points])
            gap = hausdorff(hull2d(anchors), hull2d(path.points))
            assert gap <= 1.0 + 1e-9
