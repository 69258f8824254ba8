import numpy as np
import pytest
from scipy import stats

from stereomc import geometry as geo
from stereomc import sbps, targets
from stereomc.errors import DegenerateGradient, DomainError
from stereomc.rng import RngStream
from stereomc.sbps import (
    ClockSettings,
    EventPath,
    PhaseState,
    SbpsConfig,
    bounce_intensity,
    bps_run,
    discretize_path,
    first_arrival_inversion,
    first_arrivals_inversion,
    first_arrival_thinning,
    flow,
    refresh_velocity,
    reflect_velocity,
    sbps_run,
)


def phase(rng, d):
    z = rng.standard_normal(d + 1)
    z /= np.linalg.norm(z)
    v = rng.standard_normal(d + 1)
    v -= np.dot(z, v) * z
    v /= np.linalg.norm(v)
    return PhaseState(z, v)


class TestFlow:
    def test_identity_at_zero(self):
        st0 = phase(np.random.default_rng(0), 5)
        st1 = flow(st0, 0.0)
        assert np.allclose(st1.z, st0.z) and np.allclose(st1.v, st0.v)

    def test_quarter_turn(self):
        st0 = phase(np.random.default_rng(1), 4)
        st1 = flow(st0, np.pi / 2)
        assert np.allclose(st1.z, st0.v, atol=1e-12)
        assert np.allclose(st1.v, -st0.z, atol=1e-12)

    def test_full_period(self):
        st0 = phase(np.random.default_rng(2), 7)
        st1 = flow(st0, 2 * np.pi)
        assert np.allclose(st1.z, st0.z, atol=1e-9)
        assert np.allclose(st1.v, st0.v, atol=1e-9)

    def test_group_property(self):
        rng = np.random.default_rng(3)
        st0 = phase(rng, 6)
        for _ in range(20):
            a, b = rng.uniform(-3, 3, 2)
            one = flow(flow(st0, a), b)
            two = flow(st0, a + b)
            assert np.allclose(one.z, two.z, atol=1e-10)
            assert np.allclose(one.v, two.v, atol=1e-10)


class TestBounceIntensity:
    def test_zero_for_flat_target(self):
        d = 40
        t = targets.student_t(d, nu=d)
        cfg = geo.ProjectionConfig.standard(d)
        rng = np.random.default_rng(4)
        for _ in range(20):
            st0 = phase(rng, d)
            assert bounce_intensity(st0, t, cfg) <= 1e-9

    def test_positive_part_identity(self):
        d = 5
        t = targets.gaussian(d)
        cfg = geo.ProjectionConfig.standard(d)
        rng = np.random.default_rng(5)
        for _ in range(30):
            st0 = phase(rng, d)
            grad = geo.tangent_grad_log_target(st0.z, t, cfg)
            lam_f = bounce_intensity(st0, t, cfg)
            lam_b = bounce_intensity(PhaseState(st0.z, -st0.v), t, cfg)
            assert lam_f - lam_b == -np.dot(st0.v, grad)

    def test_matches_finite_difference_gradient(self):
        d = 4
        t = targets.gaussian(d)
        cfg = geo.ProjectionConfig.standard(d)
        rng = np.random.default_rng(6)
        hits = 0
        for _ in range(100):
            st0 = phase(rng, d)
            if st0.z[-1] > 0.95:
                continue
            eps = 1e-5
            lp = lambda zz: geo.log_target_sphere(zz / np.linalg.norm(zz), t, cfg)
            fd = (lp(np.cos(eps) * st0.z + np.sin(eps) * st0.v) - lp(np.cos(eps) * st0.z - np.sin(eps) * st0.v)) / (2 * eps)
            want = max(0.0, -fd)
            got = bounce_intensity(st0, t, cfg)
            assert got == pytest.approx(want, rel=1e-5, abs=1e-7)
            hits += 1
        assert hits >= 90


class TestReflect:
    def test_orthogonal_component_untouched(self):
        d = 6
        t = targets.gaussian(d)
        cfg = geo.ProjectionConfig.standard(d)
        rng = np.random.default_rng(7)
        st0 = phase(rng, d)
        grad = geo.tangent_grad_log_target(st0.z, t, cfg)
        # velocity orthogonal to the gradient within the tangent plane
        v = rng.standard_normal(d + 1)
        v -= np.dot(st0.z, v) * st0.z
        v -= np.dot(grad, v) * grad / np.dot(grad, grad)
        v /= np.linalg.norm(v)
        out = reflect_velocity(PhaseState(st0.z, v), t, cfg)
        assert np.allclose(out, v, atol=1e-9)

    def test_full_reversal_along_gradient(self):
        d = 6
        t = targets.gaussian(d)
        cfg = geo.ProjectionConfig.standard(d)
        st0 = phase(np.random.default_rng(8), d)
        grad = geo.tangent_grad_log_target(st0.z, t, cfg)
        v = grad / np.linalg.norm(grad)
        out = reflect_velocity(PhaseState(st0.z, v), t, cfg)
        assert np.allclose(out, -v, atol=1e-9)

    def test_involution_and_rate_flip(self):
        d = 9
        t = targets.student_t(d, nu=4.0)
        cfg = geo.ProjectionConfig.standard(d)
        rng = np.random.default_rng(9)
        for _ in range(25):
            st0 = phase(rng, d)
            grad = geo.tangent_grad_log_target(st0.z, t, cfg)
            if np.linalg.norm(grad) < 1e-8:
                continue
            v1 = reflect_velocity(st0, t, cfg)
            assert abs(np.dot(v1, st0.z)) <= 1e-10
            assert np.linalg.norm(v1) == pytest.approx(1.0, abs=1e-12)
            assert np.dot(v1, grad) == pytest.approx(-np.dot(st0.v, grad), abs=1e-10)
            v2 = reflect_velocity(PhaseState(st0.z, v1), t, cfg)
            assert np.allclose(v2, st0.v, atol=1e-10)

    def test_degenerate_gradient_raises(self):
        d = 12
        t = targets.student_t(d, nu=d)
        cfg = geo.ProjectionConfig.standard(d)
        st0 = phase(np.random.default_rng(10), d)
        with pytest.raises(DegenerateGradient):
            reflect_velocity(st0, t, cfg)


class TestRefresh:
    def test_tangent_and_unit(self):
        rng = RngStream(11)
        z = np.random.default_rng(12).standard_normal(9)
        z /= np.linalg.norm(z)
        for _ in range(200):
            v = refresh_velocity(z, rng)
            assert abs(np.dot(v, z)) <= 1e-12
            assert abs(np.linalg.norm(v) - 1.0) <= 1e-12

    def test_first_moment_vanishes(self):
        rng = RngStream(13)
        z = np.zeros(8)
        z[3] = 1.0
        n = 100_000
        acc = np.zeros(8)
        for _ in range(n):
            acc += refresh_velocity(z, rng)
        assert np.linalg.norm(acc / n) <= 4 / np.sqrt(n)

    def test_angular_uniformity_d2(self):
        rng = RngStream(14)
        z = np.array([0.0, 0.0, 1.0])  # tangent plane is the xy-plane
        n = 72_000
        angles = np.empty(n)
        for i in range(n):
            v = refresh_velocity(z, rng)
            angles[i] = np.arctan2(v[1], v[0])
        hist, _ = np.histogram(angles, bins=36, range=(-np.pi, np.pi))
        chi2 = np.sum((hist - n / 36) ** 2 / (n / 36))
        assert stats.chi2.sf(chi2, 35) > 0.01


class TestClock:
    def test_flat_rate_never_rings(self):
        clock = ClockSettings()
        out = first_arrival_inversion(lambda ts: np.zeros(ts.shape), 1.0, 50.0, clock)
        assert out is None

    def test_constant_rate_exponential_law(self):
        clock = ClockSettings()
        gen = np.random.default_rng(15)
        taus = first_arrivals_inversion(lambda ts: np.full(ts.shape, 1.3), gen.standard_exponential(40_000), 1e9, clock)
        assert stats.kstest(taus, "expon", args=(0, 1 / 1.3)).pvalue > 0.01

    def test_vectorized_matches_single_calls(self):
        clock = ClockSettings()
        chi = lambda ts: 0.4 + 0.3 * np.sin(ts) ** 2
        es = np.random.default_rng(16).standard_exponential(200)
        single = np.array([first_arrival_inversion(chi, float(e), 30.0, clock) for e in es])
        many = first_arrivals_inversion(chi, es, 30.0, clock)
        assert np.array_equal(single, many)

    def test_thinning_constant_rate(self):
        clock = ClockSettings()
        gen = np.random.default_rng(17)
        taus = np.array([first_arrival_thinning(lambda ts: np.full(ts.shape, 0.9), 1e9, gen, clock) for _ in range(30_000)])
        assert stats.kstest(taus, "expon", args=(0, 1 / 0.9)).pvalue > 0.01

    def test_truncation_returns_none(self):
        clock = ClockSettings()
        gen = np.random.default_rng(18)
        out = first_arrival_thinning(lambda ts: np.full(ts.shape, 0.05), 0.5, gen, clock)
        # arrival within half a unit at rate 0.05 is unlikely for most draws
        assert out is None or out < 0.5


class TestSbpsRun:
    def test_flat_target_all_refresh(self):
        d = 60
        t = targets.student_t(d, nu=d)
        conf = SbpsConfig(t, geo.ProjectionConfig.standard(d), refresh_rate=0.2, n_events=150, seed=19)
        ep = sbps_run(conf)
        assert ep.counts["bounce"] == 0
        assert ep.counts["refresh"] == 150
        assert ep.kinds[-1] == "horizon"

    def test_no_refresh_gaussian_only_bounces(self):
        t = targets.gaussian(2)
        conf = SbpsConfig(t, geo.ProjectionConfig.standard(2), refresh_rate=0.0, n_events=50, seed=20)
        ep = sbps_run(conf)
        assert ep.counts["refresh"] == 0
        assert ep.counts["bounce"] == 50

    def test_refresh_fraction_increases_with_rate(self):
        d = 100
        t = targets.gaussian(d)
        cfg = geo.ProjectionConfig.standard(d)
        fracs = []
        for rate in (0.2, 0.5, 1.0, 2.0):
            ep = sbps_run(SbpsConfig(t, cfg, refresh_rate=rate, n_events=600, seed=21))
            fracs.append(ep.counts["refresh"] / ep.n_switches)
        assert all(b > a - 0.02 for a, b in zip(fracs, fracs[1:]))
        assert fracs[-1] > fracs[0]

    def test_phase_invariants_at_events(self):
        t = targets.gaussian(5)
        ep = sbps_run(SbpsConfig(t, geo.ProjectionConfig.standard(5), refresh_rate=0.5, n_events=400, seed=22))
        dots = np.abs(np.sum(ep.states * ep.velocities, axis=1))
        norms_z = np.abs(np.linalg.norm(ep.states, axis=1) - 1)
        norms_v = np.abs(np.linalg.norm(ep.velocities, axis=1) - 1)
        assert dots.max() <= 1e-9
        assert norms_z.max() <= 1e-9
        assert norms_v.max() <= 1e-9
        assert ep.meta["max_phase_drift"] <= 1e-9

    def test_event_times_increase_and_horizon_closes(self):
        t = targets.gaussian(3)
        ep = sbps_run(SbpsConfig(t, geo.ProjectionConfig.standard(3), refresh_rate=1.0, total_time=50.0, seed=23))
        body = ep.times[:-1]
        assert np.all(np.diff(body) > 0)
        assert ep.kinds[-1] == "horizon"
        assert ep.times[-1] == pytest.approx(ep.total_time)
        assert ep.total_time == pytest.approx(50.0)

    def test_determinism(self):
        t = targets.gaussian(4)
        conf = SbpsConfig(t, geo.ProjectionConfig.standard(4), refresh_rate=0.7, n_events=100, seed=24)
        a, b = sbps_run(conf), sbps_run(conf)
        assert np.array_equal(a.times, b.times)
        assert np.array_equal(a.states, b.states)

    def test_clock_method_does_not_disturb_refresh_stream(self):
        # coupled randomness: switching inversion -> thinning keeps every
        # refresh velocity draw identical
        d = 30
        t = targets.student_t(d, nu=d)  # flat: all events are refreshes
        cfg = geo.ProjectionConfig.standard(d)
        a = sbps_run(SbpsConfig(t, cfg, refresh_rate=0.5, n_events=60, seed=25, clock=ClockSettings(method="inversion")))
        b = sbps_run(SbpsConfig(t, cfg, refresh_rate=0.5, n_events=60, seed=25, clock=ClockSettings(method="thinning")))
        assert np.array_equal(a.times, b.times)
        assert np.array_equal(a.velocities, b.velocities)

    def test_horizon_validation(self):
        t = targets.gaussian(2)
        with pytest.raises(DomainError):
            SbpsConfig(t, geo.ProjectionConfig.standard(2), refresh_rate=0.5, seed=0)


class TestBpsRun:
    def test_zero_gradient_slab_never_bounces(self):
        d = 3
        slab = targets.TargetModel(
            dim=d,
            family="custom",
            log_density=lambda x: np.zeros(np.asarray(x).shape[:-1]),
            grad_log_density=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        )
        ep = bps_run(slab, refresh_rate=1.0, total_time=100.0, seed=26, init=(np.zeros(d), np.array([1.0, 0, 0])))
        assert ep.counts["bounce"] == 0
        assert ep.counts["refresh"] > 50

    def test_d1_gaussian_second_moment(self):
        t = targets.gaussian(1)
        ep = bps_run(t, refresh_rate=0.3, total_time=10_000.0, seed=27)
        tr = discretize_path(ep, 5)
        from stereomc.diagnostics import batch_means_se

        x2 = tr.states[:, 0] ** 2
        mean, se = batch_means_se(x2, ep.total_time, 50)
        assert abs(mean - 1.0) <= 3 * se

    def test_speed_preserved(self):
        t = targets.gaussian(4)
        ep = bps_run(t, refresh_rate=0.4, n_events=300, seed=28)
        speeds = np.linalg.norm(ep.velocities, axis=1)
        assert np.max(np.abs(speeds - 1.0)) <= 1e-10


class TestDiscretize:
    def test_sample_count_convention(self):
        t = targets.gaussian(2)
        ep = sbps_run(SbpsConfig(t, geo.ProjectionConfig.standard(2), refresh_rate=0.5, total_time=100.0, seed=29))
        tr = discretize_path(ep, 5)
        assert len(tr.states) == 500
        assert tr.source_times is not None
        assert tr.source_times[0] == pytest.approx(0.1)

    def test_piecewise_constant_euclidean_reconstruction(self):
        # zero velocities make the path piecewise constant; samples must hit it exactly
        times = np.array([1.0, 2.5, 4.0])
        states = np.array([[1.0], [2.0], [2.0]])
        vels = np.zeros((3, 1))
        ep = EventPath(
            times=times,
            kinds=["refresh", "refresh", "horizon"],
            states=states,
            velocities=vels,
            v_dot_grad=np.zeros(3),
            initial_state=np.array([0.5]),
            initial_velocity=np.zeros(1),
            total_time=4.0,
            counts={"refresh": 2, "horizon": 1},
            flow_kind="euclidean",
            projection=None,
        )
        tr = discretize_path(ep, 2)
        want = np.array([0.5, 0.5, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0])
        assert np.array_equal(tr.states[:, 0], want)

    def test_quadrature_order_on_great_circle(self):
        # g = first coordinate along an equatorial arc: the sample mean
        # converges to the time integral at second order
        cfg = geo.ProjectionConfig.standard(2, radius=1.0)
        theta0 = 0.3
        z = np.array([np.cos(theta0), np.sin(theta0), 0.0])
        v = np.array([-np.sin(theta0), np.cos(theta0), 0.0])
        T = 2.0
        ep = EventPath(
            times=np.array([T]),
            kinds=["horizon"],
            states=flow(PhaseState(z, v), T).z[None, :],
            velocities=flow(PhaseState(z, v), T).v[None, :],
            v_dot_grad=np.zeros(1),
            initial_state=z,
            initial_velocity=v,
            total_time=T,
            counts={"horizon": 1},
            flow_kind="sphere",
            projection=cfg,
        )
        exact = (np.sin(theta0 + T) - np.sin(theta0)) / T
        errs = []
        for spu in (5, 10, 20):
            tr = discretize_path(ep, spu)
            errs.append(abs(tr.states[:, 0].mean() - exact))
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.3)
        assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.3)
