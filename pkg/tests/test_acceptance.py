"""Acceptance suite: one test per primary criterion, each printing a verdict line.

Run with ``pytest -v -s tests/test_acceptance.py`` to see the per-criterion
lines as they complete.  Every tolerance is pinned here, not calibrated
elsewhere.
"""

import time

import numpy as np
import pytest
from scipy import stats
from scipy.stats import ortho_group

from stereomc import diagnostics as diag
from stereomc import geometry as geo
from stereomc import sbps, sps, targets, theory
from stereomc.rng import RngStream
from stereomc.sbps import ClockSettings, SbpsConfig, first_arrivals_inversion, first_arrival_thinning, _sphere_chi
from stereomc.sps import RwmConfig, run_chain

C10 = targets.c_nu(10.0)  # 1.7521 to table precision


def _criterion(name: str, ok: bool, detail: str) -> None:
    print(f"[acceptance] {name}: {'PASS' if ok else 'FAIL'} ({detail})", flush=True)
    assert ok, f"{name}: {detail}"


def test_exact_acceptance_sps():
    t0 = time.time()
    d = 100
    t = targets.student_t(d, nu=d)
    cfg = geo.ProjectionConfig.standard(d)
    worst_ratio, min_acc = 0.0, 1.0
    for h in (0.01, 0.1, 1.0):
        tr = run_chain(RwmConfig(t, cfg, h=h, n_steps=10_000, init="uniform_sphere", seed=101), "sps")
        worst_ratio = max(worst_ratio, float(np.max(np.abs(tr.log_ratios))))
        min_acc = min(min_acc, float(tr.accepted.mean()))
    elapsed = time.time() - t0
    _criterion(
        "exact-acceptance (nu=d student-t)",
        min_acc == 1.0 and worst_ratio <= 1e-8 and elapsed < 5.0,
        f"acceptance={min_acc:.4f}, max|log_ratio|={worst_ratio:.2e}, {elapsed:.1f}s",
    )


def test_gsps_matched_covariance():
    # the exact-acceptance identity needs nu = d together with tr(Lambda) = d
    # (so that R^2 = sum(lam) = nu); the draw is rescaled accordingly
    t0 = time.time()
    d = 50
    rng = np.random.default_rng(202)
    lam = np.exp(rng.uniform(np.log(0.1), np.log(10.0), d))
    lam *= d / lam.sum()
    q = ortho_group.rvs(d, random_state=rng)
    t = targets.student_t(d, nu=d, lam=lam, rotation=q)
    cfg = geo.ProjectionConfig.generalized(d, lam, q)  # radius = sqrt(sum lam)
    tr = run_chain(RwmConfig(t, cfg, h=0.35, n_steps=10_000, init="uniform_sphere", seed=202), "gsps")
    worst = float(np.max(np.abs(tr.log_ratios)))
    elapsed = time.time() - t0
    _criterion(
        "gsps matched covariance",
        tr.accepted.all() and worst <= 1e-8 and elapsed < 5.0,
        f"acceptance={tr.accepted.mean():.4f}, max|log_ratio|={worst:.2e}, R^2={cfg.radius**2:.2f}, {elapsed:.1f}s",
    )


def test_table_one_reproduction():
    t0 = time.time()
    want_c = {3: 7.1285, 5: 3.0187, 10: 1.7521, 20: 1.3336, 50: 1.1250, 100: 1.0612}
    want_r = {3: 1.1632, 5: 1.4954, 10: 2.3297, 20: 3.9977, 50: 8.9990, 100: 17.3328}
    errs = []
    for nu in want_c:
        errs.append(abs(targets.c_nu(nu) - want_c[nu]))
        errs.append(abs(targets.c_nu_ratio(nu) - want_r[nu]))
    elapsed = time.time() - t0
    _criterion(
        "tuning-constant table",
        max(errs) <= 1e-4 and elapsed < 1.0,
        f"max deviation {max(errs):.2e}, {elapsed:.2f}s",
    )


def test_optimal_scaling_desk_scale():
    # product target whose marginal has roughness exactly 1.7521 (a unit-variance
    # Gaussian scale mixture; the nu=10 student-t label in the protocol carries
    # a tabulated constant that is not that marginal's true roughness)
    t0 = time.time()
    d = 200
    E = C10
    marg = targets.scale_mixture_marginal(E)
    t = targets.product_iid(d, marg)
    cfg = geo.ProjectionConfig.standard(d)
    ell_hat = 2.38 / np.sqrt(E - 1.0)
    grid = ell_hat * 1.13 ** (np.arange(25) - 20.0)  # log grid with a knot at ell_hat
    best = (-np.inf, 0.0)
    for ell in grid:
        h = theory.h_from_ell(float(ell), d)
        x0 = marg.sampler(RngStream(99, 0).generator, d)
        tr = run_chain(RwmConfig(t, cfg, h=h, n_steps=20_000, init=x0, seed=99), "sps")
        es = diag.esjd(tr)
        if es > best[0]:
            best = (es, float(tr.accepted.mean()))
    target_val = 1.3 / (E - 1.0)
    elapsed = time.time() - t0
    ok = abs(best[1] - 0.234) <= 0.06 and abs(best[0] / target_val - 1.0) <= 0.25 and elapsed < 300.0
    _criterion(
        "optimal scaling (ESJD sweep, d=200)",
        ok,
        f"argmax acceptance={best[1]:.3f}, max ESJD={best[0]:.3f} vs {target_val:.3f}, {elapsed:.0f}s",
    )


def test_gaussian_limit_of_log_ratio():
    t0 = time.time()
    d, ell = 500, 1.0
    E = C10
    marg = targets.scale_mixture_marginal(E)
    t = targets.product_iid(d, marg)
    cfg = geo.ProjectionConfig.standard(d)
    h = theory.h_from_ell(ell, d)
    x0 = marg.sampler(RngStream(42, 0).generator, d)
    tr = run_chain(RwmConfig(t, cfg, h=h, n_steps=100_000, init=x0, seed=42), "sps")
    lr = tr.log_ratios
    mu_pred = -0.5 * ell**2 * (E - 1.0)
    s2_pred = ell**2 * (E - 1.0)
    mean_hat, se = diag.batch_means_se(lr, float(len(lr)), 50)
    var_rel = abs(lr.var() / s2_pred - 1.0)
    elapsed = time.time() - t0
    ok = abs(mean_hat - mu_pred) <= 3 * se and var_rel <= 0.10 and elapsed < 120.0
    _criterion(
        "log-ratio Gaussian limit (d=500)",
        ok,
        f"mean {mean_hat:.4f} vs {mu_pred:.4f} (se {se:.4f}), var off by {100 * var_rel:.1f}%, {elapsed:.0f}s",
    )


def test_accept_identity_against_monte_carlo():
    # grid kept inside |mu|/sigma <= 3.4 so the min(1, e^W) kink is seen by
    # thousands of draws and the sample standard error is itself reliable
    t0 = time.time()
    gen = RngStream(606, 0).generator
    z = gen.standard_normal(10_000_000)
    worst = 0.0
    for mu in (-2.0, -0.75, 0.0, 0.75, 2.0):
        for sigma in (0.6, 1.0, 1.6, 2.5, 4.0):
            w = np.minimum(1.0, np.exp(np.minimum(mu + sigma * z, 0.0)))
            se = w.std() / np.sqrt(len(w))
            gap = abs(theory.expected_accept(mu, sigma) - w.mean())
            worst = max(worst, gap / (3 * se))
    elapsed = time.time() - t0
    _criterion(
        "closed-form acceptance identity",
        worst <= 1.0 and elapsed < 30.0,
        f"worst |gap|/3se = {worst:.2f}, {elapsed:.0f}s",
    )


def test_transient_blessing_of_dimensionality():
    t0 = time.time()

    def median_first_hit(d: int) -> float:
        t = targets.gaussian(d)
        cfg = geo.ProjectionConfig.standard(d)
        h = theory.transient_step_size(d)
        band = 10.0 / np.sqrt(d)
        hits = []
        for s in range(50):
            tr = run_chain(RwmConfig(t, cfg, h=h, n_steps=60, init="north_pole", seed=700 + s), "sps")
            idx = np.nonzero(np.abs(tr.latitudes) <= band)[0]
            hits.append(int(idx[0]) if len(idx) else 10**6)
        return float(np.median(hits))

    m100 = median_first_hit(100)
    m400 = median_first_hit(400)
    elapsed = time.time() - t0
    ok = m100 <= 20 and m400 <= m100 + 2 and elapsed < 60.0
    _criterion(
        "transient blessing of dimensionality",
        ok,
        f"median first-hit d=100: {m100:.0f}, d=400: {m400:.0f}, {elapsed:.0f}s",
    )


def test_stationary_proposal_latitude_law():
    t0 = time.time()
    d, h, n = 100, 0.05, 100_000
    z = np.zeros(d + 1)
    z[0] = 1.0  # equator state: latitude exactly zero
    gen = RngStream(808, 0).generator
    lat = np.array([sps._propose_arr(z, h, gen)[-1] for _ in range(n)])
    sd_pred = h / np.sqrt(1.0 + h * h * (d - 1))
    mean_ok = abs(lat.mean()) <= 3 * lat.std() / np.sqrt(n)
    var_rel = abs(lat.var() / sd_pred**2 - 1.0)
    elapsed = time.time() - t0
    _criterion(
        "stationary proposal-latitude law",
        mean_ok and var_rel <= 0.10 and elapsed < 10.0,
        f"mean={lat.mean():.2e}, var off by {100 * var_rel:.2f}%, {elapsed:.0f}s",
    )


def test_sbps_desk_scale_marginals():
    t0 = time.time()
    t = targets.gaussian(2)
    conf = SbpsConfig(t, geo.ProjectionConfig.standard(2), refresh_rate=0.5, total_time=20_000.0, seed=909)
    ep = sbps.sbps_run(conf)
    tr = sbps.discretize_path(ep, 5)
    x1 = tr.states[:, 0]
    mean_hat, se = diag.batch_means_se(x1, ep.total_time, 50)
    var_rel = abs(x1.var() / 1.0 - 1.0)
    dots = np.abs(np.sum(ep.states * ep.velocities, axis=1))
    elapsed = time.time() - t0
    ok = abs(mean_hat) <= 3 * se and var_rel <= 0.05 and dots.max() <= 1e-9 and elapsed < 60.0
    _criterion(
        "sbps desk-scale marginals (d=2)",
        ok,
        f"mean {mean_hat:.4f} (se {se:.4f}), var off by {100 * var_rel:.1f}%, max|z.v|={dots.max():.1e}, {elapsed:.0f}s",
    )


def test_bounce_clock_laws():
    t0 = time.time()
    clock = ClockSettings()
    gen = RngStream(1010, 0).generator
    n = 100_000

    taus = first_arrivals_inversion(lambda ts: np.full(ts.shape, 0.7), gen.standard_exponential(n), 1e9, clock)
    p_const = stats.kstest(taus, lambda x: 1 - np.exp(-0.7 * x)).pvalue

    a, b = 0.3, 0.5
    taus = first_arrivals_inversion(lambda ts: a + b * ts, gen.standard_exponential(n), 1e9, clock)
    p_ramp = stats.kstest(taus, lambda x: 1 - np.exp(-(a * x + 0.5 * b * x * x))).pvalue

    def lam_sin(x):
        x = np.asarray(x, dtype=float)
        k, r = np.divmod(x, 2 * np.pi)
        return 2 * k + np.where(r <= np.pi, 1 - np.cos(r), 2.0)

    taus = first_arrivals_inversion(lambda ts: np.maximum(0.0, np.sin(ts)), gen.standard_exponential(n), 1e9, clock)
    p_sin = stats.kstest(taus, lambda x: 1 - np.exp(-lam_sin(x))).pvalue

    # cross-method comparison on a fixed d=2 Gaussian phase point
    t2 = targets.gaussian(2)
    cfg2 = geo.ProjectionConfig.standard(2)
    z = np.array([0.6, -0.48, 0.64])
    z /= np.linalg.norm(z)
    v = np.array([0.2, 1.0, 0.5])
    v -= np.dot(z, v) * z
    v /= np.linalg.norm(v)
    chi = _sphere_chi(z, v, t2, cfg2)
    g1, g2 = RngStream(1011, 0).generator, RngStream(1012, 0).generator
    inv = first_arrivals_inversion(chi, g1.standard_exponential(n), 200.0, clock)
    thi = np.array([first_arrival_thinning(chi, 200.0, g2, clock) for _ in range(n)], dtype=float)
    assert not np.isnan(inv).any() and not np.isnan(thi).any()
    p_cross = stats.ks_2samp(inv, thi).pvalue

    elapsed = time.time() - t0
    ok = min(p_const, p_ramp, p_sin, p_cross) > 0.01 and elapsed < 60.0
    _criterion(
        "bounce-clock first-arrival laws",
        ok,
        f"KS p: const={p_const:.3f} ramp={p_ramp:.3f} sin={p_sin:.3f} inversion-vs-thinning={p_cross:.3f}, {elapsed:.0f}s",
    )


def test_ess_per_switch_superiority():
    t0 = time.time()
    d = 100
    t = targets.gaussian(d)
    cfg = geo.ProjectionConfig.standard(d)
    medians = {}
    for rate in (0.2, 0.5, 1.0, 2.0):
        sb, bp = [], []
        for s in range(10):
            ep = sbps.sbps_run(SbpsConfig(t, cfg, refresh_rate=rate, n_events=1000, seed=1000 + s, stream_id=0))
            sb.append(diag.ess_per_switch(ep, "first_coordinate")[1])
            ep2 = sbps.bps_run(t, refresh_rate=rate, n_events=1000, seed=1000 + s, stream_id=1)
            bp.append(diag.ess_per_switch(ep2, "first_coordinate")[1])
        medians[rate] = (float(np.median(sb)), float(np.median(bp)))
    elapsed = time.time() - t0
    dominated = all(sb > bp for sb, bp in medians.values())
    low_rate_ok = medians[0.2][0] > 1.0
    detail = " ".join(f"rate={r}: {m[0]:.2f} vs {m[1]:.3f};" for r, m in medians.items())
    _criterion(
        "ESS-per-switch superiority (sphere vs Euclidean)",
        dominated and low_rate_ok and elapsed < 300.0,
        f"{detail} {elapsed:.0f}s",
    )


def test_flat_target_sbps_has_no_bounces():
    t0 = time.time()
    d = 100
    t = targets.student_t(d, nu=d)
    ep = sbps.sbps_run(SbpsConfig(t, geo.ProjectionConfig.standard(d), refresh_rate=0.2, n_events=1000, seed=1200))
    elapsed = time.time() - t0
    _criterion(
        "flat-target sbps (nu=d)",
        ep.counts["bounce"] == 0 and ep.counts["refresh"] == 1000 and elapsed < 30.0,
        f"bounces={ep.counts['bounce']}, refreshes={ep.counts['refresh']}, {elapsed:.0f}s",
    )


def test_robustness_to_mild_anisotropy():
    t0 = time.time()
    k = 5

    def expected_acceptance(d: int) -> float:
        lam = np.ones(d)
        lam[:k] = 2.0
        t = targets.gaussian(d, lam=lam)
        cfg = geo.ProjectionConfig.standard(d)
        h = 0.5 / (d * np.sqrt(k))
        x0 = t.sample(RngStream(1300 + d, 0).generator, 1)[0]
        tr = run_chain(RwmConfig(t, cfg, h=h, n_steps=20_000, init=x0, seed=1300 + d), "sps")
        return float(np.mean(np.exp(np.minimum(tr.log_ratios, 0.0))))

    a100 = expected_acceptance(100)
    a400 = expected_acceptance(400)
    elapsed = time.time() - t0
    ok = a400 > a100 and a400 > 0.5 and elapsed < 120.0
    _criterion(
        "anisotropy robustness direction",
        ok,
        f"expected acceptance d=100: {a100:.4f}, d=400: {a400:.4f}, {elapsed:.0f}s",
    )


def test_diffusion_speed_identity_and_split_sampler_increments():
    t0 = time.time()
    # identity part: the diffusion speed and the ESJD limit share one formula
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(200):
        ell = float(rng.uniform(0.05, 6.0))
        E = float(rng.uniform(1.01, 9.0))
        worst = max(worst, abs(theory.diffusion_speed(ell, E) - theory.esjd_limit(ell, E)))

    # distribution part: the split sampler's first-coordinate proposal
    # increment matches the plain walk's at stationarity
    d = 100
    t = targets.gaussian(d)
    cfg = geo.ProjectionConfig.standard(d)
    h = theory.h_from_ell(2.0, d)
    n = 100_000
    xs = t.sample(RngStream(1400, 0).generator, n)
    zs = geo._sp_inverse_arr(xs, cfg)
    g1, g2 = RngStream(1401, 0).generator, RngStream(1402, 0).generator
    inc_a = np.empty(n)
    inc_b = np.empty(n)
    for i in range(n):
        za = sps._propose_arr(zs[i], h, g1)
        inc_a[i] = cfg.radius * za[0] / (1 - za[-1]) - xs[i, 0]
        zb = sps._propose_arr(zs[i], h, g2)
        sps._propose_arr(zs[i], h, g2)  # the tail proposal the split sampler discards
        inc_b[i] = cfg.radius * zb[0] / (1 - zb[-1]) - xs[i, 0]
    se_mean = np.sqrt(inc_a.var() / n + inc_b.var() / n)
    mean_ok = abs(inc_a.mean() - inc_b.mean()) <= 3 * se_mean
    va, vb = inc_a.var(), inc_b.var()
    se_var = np.sqrt(
        (np.mean((inc_a - inc_a.mean()) ** 4) - va**2) / n
        + (np.mean((inc_b - inc_b.mean()) ** 4) - vb**2) / n
    )
    var_ok = abs(va - vb) <= 3 * se_var
    elapsed = time.time() - t0
    _criterion(
        "diffusion-speed identity + split-sampler increments",
        worst <= 1e-12 and mean_ok and var_ok and elapsed < 120.0,
        f"identity gap {worst:.1e}, mean gap/3se {abs(inc_a.mean() - inc_b.mean()) / (3 * se_mean):.2f}, "
        f"var gap/3se {abs(va - vb) / (3 * se_var):.2f}, {elapsed:.0f}s",
    )
