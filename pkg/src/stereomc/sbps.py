"""Bouncy particle samplers: great-circle flow on the sphere and the Euclidean baseline.

The sphere process moves along great circles, z(t) = cos(t) z + sin(t) v,
v(t) = cos(t) v - sin(t) z, bouncing at the arrivals of an inhomogeneous
Poisson clock with rate max(0, -v . grad log pi_S) and refreshing the velocity
at an independent exponential clock.  Bounces reflect the velocity in the
tangential gradient; refreshments redraw it uniformly on the tangent
great-sphere.

The bounce clock is simulated by numerical inversion of the integrated rate:
composite Simpson over consecutive windows at a grid density of
``points_per_period`` per 2*pi, each window refined by doubling until two
successive estimates agree to ``tolerance``, then a fine-grid solve of
Lambda(tau) = E inside the bracketing cell.  A thinning clock with a gridded
bound times ``safety`` is provided as an independent cross-check; both methods
draw from the same dedicated clock stream, so switching methods never perturbs
the refreshment draws.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import geometry as geo
from .errors import ClockError, DegenerateDraw, DegenerateGradient, DomainError
from .geometry import EPS_POLE, ProjectionConfig, SpherePoint
from .rng import RngStream
from .sps import Trace
from .targets import TargetModel

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhaseState:
    """Position on the sphere plus a unit tangent velocity."""

    z: np.ndarray
    v: np.ndarray

    def __post_init__(self) -> None:
        z = np.asarray(self.z, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if z.shape != v.shape or z.ndim != 1:
            raise DomainError("z and v must be vectors of equal length")
        if abs(np.linalg.norm(z) - 1.0) > 1e-10 or abs(np.linalg.norm(v) - 1.0) > 1e-10:
            raise DomainError("z and v must be unit vectors (1e-10)")
        if abs(float(np.dot(z, v))) > 1e-10:
            raise DomainError("v must be tangent to the sphere at z (|z.v| <= 1e-10)")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "v", v)


def orthonormalize(z: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Repair rounding drift: normalize z, project v off z, normalize v."""
    z = z / np.linalg.norm(z)
    v = v - np.dot(z, v) * z
    return z, v / np.linalg.norm(v)


def flow(state: PhaseState, t: float) -> PhaseState:
    """Great-circle flow for time t; flow(., 2*pi) is the identity."""
    c, s = math.cos(t), math.sin(t)
    return PhaseState(c * state.z + s * state.v, c * state.v - s * state.z)


def bounce_intensity(state: PhaseState, target: TargetModel, cfg: ProjectionConfig) -> float:
    """Event rate max(0, -v . grad log pi_S(z)) at the given phase point."""
    grad = geo.tangent_grad_log_target(state.z, target, cfg)
    return max(0.0, -float(np.dot(state.v, grad)))


def reflect_velocity(state: PhaseState, target: TargetModel, cfg: ProjectionConfig) -> np.ndarray:
    """Specular reflection of v in the tangential gradient.

    Flips the gradient component of the velocity (so the post-bounce rate in
    the reversed direction equals the pre-bounce rate) and leaves the
    orthogonal part untouched; an involution.
    """
    grad = geo.tangent_grad_log_target(state.z, target, cfg)
    g2 = float(np.dot(grad, grad))
    if g2 <= 1e-24:
        raise DegenerateGradient("reflection at a vanishing tangential gradient")
    v = state.v - 2.0 * (float(np.dot(state.v, grad)) / g2) * grad
    z, v = orthonormalize(state.z, v)
    return v


def refresh_velocity(z, rng: RngStream | np.random.Generator) -> np.ndarray:
    """Uniform draw from {v : z.v = 0, |v| = 1} via a projected Gaussian."""
    gen = rng.generator if isinstance(rng, RngStream) else rng
    zc = z.coords if isinstance(z, SpherePoint) else np.asarray(z, dtype=float)
    for _ in range(2):
        w = gen.standard_normal(zc.shape[0])
        w -= np.dot(zc, w) * zc
        n = np.linalg.norm(w)
        if n >= 1e-14:
            return w / n
    raise DegenerateDraw("tangent refresh draw collapsed twice in a row")


@dataclass(frozen=True)
class ClockSettings:
    """Approximation parameters of the bounce clock.

    The tolerance is relative with an absolute floor of the same size, so
    windows with (numerically) zero rate converge immediately instead of
    chasing rounding noise.
    """

    points_per_period: int = 1024
    tolerance: float = 1e-8
    safety: float = 1.5
    window: float = math.pi / 2.0
    max_doublings: int = 2
    method: str = "inversion"  # or "thinning"

    def __post_init__(self) -> None:
        if self.points_per_period < 8 or self.window <= 0:
            raise DomainError("clock grid too coarse")
        if self.method not in ("inversion", "thinning"):
            raise DomainError(f"unknown clock method {self.method!r}")

    @property
    def base_subintervals(self) -> int:
        m = int(math.ceil(self.points_per_period * self.window / TWO_PI))
        return m + (m % 2)


@dataclass
class SbpsConfig:
    target: TargetModel
    projection: ProjectionConfig
    refresh_rate: float
    total_time: float | None = None
    n_events: int | None = None
    seed: int = 0
    stream_id: int = 0
    clock: ClockSettings = field(default_factory=ClockSettings)
    init: tuple[np.ndarray, np.ndarray] | str = "uniform"

    def __post_init__(self) -> None:
        if self.refresh_rate < 0:
            raise DomainError(f"refresh rate must be nonnegative, got {self.refresh_rate}")
        if (self.total_time is None) == (self.n_events is None):
            raise DomainError("specify exactly one horizon: total_time or n_events")


@dataclass(frozen=True)
class EventPath:
    """Ordered event records of one continuous-time run.

    ``states``/``velocities`` hold the post-event phase; ``v_dot_grad`` the
    post-event rate argument v . grad(log pi_S).  ``flow_kind`` distinguishes
    great-circle paths (state width d+1) from straight-line Euclidean paths
    (state width d).  The final record is the horizon; for event-count
    horizons it shares the time of the last event.
    """

    times: np.ndarray
    kinds: list[str]
    states: np.ndarray
    velocities: np.ndarray
    v_dot_grad: np.ndarray
    initial_state: np.ndarray
    initial_velocity: np.ndarray
    total_time: float
    counts: dict
    flow_kind: str
    projection: ProjectionConfig | None
    meta: dict = field(default_factory=dict)

    @property
    def n_switches(self) -> int:
        """Non-horizon event count (the denominator of ESS per switch)."""
        return sum(1 for k in self.kinds if k != "horizon")


def _simpson_window(chi_vals: np.ndarray, dt: float) -> tuple[float, np.ndarray]:
    """Composite Simpson total and cumulative values at even-indexed nodes."""
    f0 = chi_vals[:-2:2]
    f1 = chi_vals[1:-1:2]
    f2 = chi_vals[2::2]
    incr = (dt / 3.0) * (f0 + 4.0 * f1 + f2)
    cum = np.concatenate(([0.0], np.cumsum(incr)))
    return float(cum[-1]), cum


class _PoleCapped(Exception):
    pass


def _cap_poles(vals: np.ndarray, finite_mask: np.ndarray, counts: dict) -> np.ndarray:
    """Replace non-finite grid values by the nearest finite neighbour's value."""
    if finite_mask.all():
        return vals
    if not finite_mask.any():
        raise ClockError("intensity non-finite on the whole clock window (pole crossing)")
    counts["pole_caps"] = counts.get("pole_caps", 0) + int((~finite_mask).sum())
    idx = np.arange(len(vals))
    good = idx[finite_mask]
    nearest = good[np.clip(np.searchsorted(good, idx[~finite_mask]), 0, len(good) - 1)]
    out = vals.copy()
    out[~finite_mask] = vals[nearest]
    return out


def _window_values(chi: Callable[[np.ndarray], np.ndarray], t0: float, t1: float, m: int, counts: dict):
    ts = np.linspace(t0, t1, m + 1)
    vals = chi(ts)
    finite = np.isfinite(vals)
    vals = _cap_poles(vals, finite, counts)
    return ts, vals


def _converged(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol * max(abs(a), 1.0)


def _adaptive_window(chi, t0: float, t1: float, clock: ClockSettings, counts: dict):
    """Simpson integral over one window, doubling the grid until stable.

    Each doubling evaluates only the new midpoints; the first convergence
    check subsamples the base grid, so an already-converged window costs one
    batched rate evaluation.
    """
    m = clock.base_subintervals
    ts, vals = _window_values(chi, t0, t1, m, counts)
    dt = (t1 - t0) / m
    total, cum = _simpson_window(vals, dt)
    if m >= 4:
        coarse, _ = _simpson_window(vals[::2], 2.0 * dt)
        if _converged(total, coarse, clock.tolerance):
            return ts, vals, total, cum
    for _ in range(clock.max_doublings):
        mids = t0 + dt * (np.arange(m) + 0.5)
        mv = chi(mids)
        mv = _cap_poles(mv, np.isfinite(mv), counts)
        m *= 2
        dt *= 0.5
        merged = np.empty(m + 1)
        merged[::2] = vals
        merged[1::2] = mv
        vals = merged
        ts = np.linspace(t0, t1, m + 1)
        total2, cum = _simpson_window(vals, dt)
        done = _converged(total2, total, clock.tolerance)
        total = total2
        if done:
            break
    return ts, vals, total, cum


def first_arrival_inversion(
    chi: Callable[[np.ndarray], np.ndarray],
    e_target: float,
    t_max: float,
    clock: ClockSettings,
    counts: dict | None = None,
) -> float | None:
    """First arrival of the inhomogeneous Poisson process with rate chi.

    Solves Lambda(tau) = e_target by window-wise Simpson integration; returns
    None if Lambda(t_max) < e_target.
    """
    counts = counts if counts is not None else {}
    t0 = 0.0
    acc = 0.0
    guard = 0
    while t0 < t_max:
        guard += 1
        if guard > 10_000_000:
            raise ClockError("bounce clock failed to terminate (runaway window loop)")
        t1 = min(t0 + clock.window, t_max)
        ts, vals, total, cum = _adaptive_window(chi, t0, t1, clock, counts)
        if acc + total < e_target:
            acc += total
            t0 = t1
            continue
        return _solve_in_window(chi, ts, cum, e_target - acc, None, 0, counts)
    return None


def _solve_in_window(chi, ts, cum, need: float, fine_cache: dict | None, win_key, counts: dict) -> float:
    """Locate Lambda^{-1}(need) inside an integrated window (fine Simpson + interp)."""
    even_ts = ts[::2]
    j = int(np.searchsorted(cum, need, side="left"))
    j = min(max(j, 1), len(cum) - 1)
    key = (win_key, j)
    if fine_cache is not None and key in fine_cache:
        even_fts, fcum = fine_cache[key]
    else:
        a, b = even_ts[j - 1], even_ts[j]
        fine = 64
        fts = np.linspace(a, b, fine + 1)
        fvals = chi(fts)
        fvals = _cap_poles(fvals, np.isfinite(fvals), counts)
        _, fcum = _simpson_window(fvals, (b - a) / fine)
        even_fts = fts[::2]
        if fine_cache is not None:
            fine_cache[key] = (even_fts, fcum)
    rem = need - cum[j - 1]
    k = int(np.searchsorted(fcum, rem, side="left"))
    k = min(max(k, 1), len(fcum) - 1)
    seg = fcum[k] - fcum[k - 1]
    frac = 0.0 if seg <= 0 else (rem - fcum[k - 1]) / seg
    return float(even_fts[k - 1] + frac * (even_fts[k] - even_fts[k - 1]))


def first_arrivals_inversion(
    chi: Callable[[np.ndarray], np.ndarray],
    e_targets: np.ndarray,
    t_max: float,
    clock: ClockSettings,
    counts: dict | None = None,
) -> np.ndarray:
    """Many first-arrival draws from one fixed rate, sharing the quadrature.

    The integrated rate is a deterministic function, so windows are evaluated
    once and reused for every exponential target; results agree with repeated
    :func:`first_arrival_inversion` calls to the last bit.  Entries that see
    no arrival before ``t_max`` come back as NaN.
    """
    counts = counts if counts is not None else {}
    es = np.asarray(e_targets, dtype=float)
    out = np.full(es.shape, np.nan)
    order = np.argsort(es)
    windows: list[tuple[float, np.ndarray, np.ndarray]] = []  # (acc_start, ts, cum)
    acc_ends: list[float] = []
    acc = 0.0
    t0 = 0.0
    exhausted = t0 >= t_max
    fine_cache: dict = {}

    for idx in order:
        e = float(es[idx])
        while (not acc_ends or acc_ends[-1] < e) and not exhausted:
            t1 = min(t0 + clock.window, t_max)
            ts, _, total, cum = _adaptive_window(chi, t0, t1, clock, counts)
            windows.append((acc, ts, cum))
            acc += total
            acc_ends.append(acc)
            t0 = t1
            exhausted = t0 >= t_max
        w = bisect.bisect_left(acc_ends, e)
        if w >= len(acc_ends):
            continue  # no arrival before t_max
        acc_start, ts, cum = windows[w]
        out[idx] = _solve_in_window(chi, ts, cum, e - acc_start, fine_cache, w, counts)
    return out


def first_arrival_thinning(
    chi: Callable[[np.ndarray], np.ndarray],
    t_max: float,
    gen: np.random.Generator,
    clock: ClockSettings,
    counts: dict | None = None,
) -> float | None:
    """Thinning clock: per-window gridded bound times the safety factor.

    Candidate times are generated in blocks and the rate is evaluated on the
    block at once.  A discovered bound violation restarts the window with the
    bound doubled, keeping the draw exact for smooth rates.
    """
    counts = counts if counts is not None else {}
    t0 = 0.0
    guard = 0
    block = 16
    while t0 < t_max:
        guard += 1
        if guard > 10_000_000:
            raise ClockError("thinning clock failed to terminate")
        t1 = min(t0 + clock.window, t_max)
        _, vals = _window_values(chi, t0, t1, 32, counts)
        bound = float(vals.max()) * clock.safety
        if bound <= 0.0:
            t0 = t1
            continue
        while True:  # repeated until the window is cleared or an arrival fires
            t = t0
            outcome = None  # "arrival", "window_done" or "violation"
            while outcome is None:
                gaps = gen.standard_exponential(block) / bound
                cand = t + np.cumsum(gaps)
                inside = cand < t1
                pts = cand[inside]
                if len(pts):
                    c = chi(pts)
                    bad = ~np.isfinite(c)
                    if bad.any():
                        counts["pole_caps"] = counts.get("pole_caps", 0) + int(bad.sum())
                        c = np.where(bad, bound, c)
                    accept = gen.random(len(pts)) * bound < c
                    hits = np.nonzero(accept)[0]
                    viols = np.nonzero(c > bound)[0]
                    # a violation before the first acceptance invalidates the bound
                    if len(viols) and (not len(hits) or viols[0] <= hits[0]):
                        bound *= 2.0
                        counts["thinning_restarts"] = counts.get("thinning_restarts", 0) + 1
                        outcome = "violation"
                        break
                    if len(hits):
                        return float(pts[hits[0]])
                if not inside.all():
                    outcome = "window_done"
                else:
                    t = cand[-1]
            if outcome == "window_done":
                break
        t0 = t1
    return None


def _sphere_chi(z: np.ndarray, v: np.ndarray, target: TargetModel, cfg: ProjectionConfig):
    """Batched event rate along the great circle through (z, v).

    Works on the standard image of the state (the generalized projection is
    the standard one composed with a stretch/rotation, which is pulled back
    through the target gradient), with fused row reductions: this is the hot
    kernel of every continuous-time run.
    """
    zv = np.vstack([z, v])
    vz = np.vstack([v, -z])
    d, r = cfg.dim, cfg.radius
    r2 = r * r
    generalized = cfg.mode == "generalized"

    def rate(zz: np.ndarray, vv: np.ndarray) -> np.ndarray:
        lat = zz[:, -1]
        xs = zz[:, :-1] * (r / (1.0 - lat))[:, None]
        if generalized:
            g = target.grad_log_density((xs * cfg._sqrt_lam) @ cfg.rotation.T)
            gs = (g @ cfg.rotation) * cfg._sqrt_lam
        else:
            gs = target.grad_log_density(xs)
        s = r2 + np.einsum("ij,ij->i", xs, xs)
        gx = np.einsum("ij,ij->i", gs, xs)
        th = np.einsum("ij,ij->i", vv[:, :-1], gs) * (s / (2.0 * r))
        tl = vv[:, -1] * (gx + d) * s / (2.0 * r2)
        return np.maximum(0.0, -(th + tl))

    def chi(ts: np.ndarray) -> np.ndarray:
        cs = np.empty((ts.shape[0], 2))
        np.cos(ts, out=cs[:, 0])
        np.sin(ts, out=cs[:, 1])
        zz = cs @ zv
        vv = cs @ vz
        ok = zz[:, -1] < 1.0 - EPS_POLE
        if ok.all():
            return rate(zz, vv)
        out = np.full(ts.shape, np.nan)
        if ok.any():
            out[ok] = rate(zz[ok], vv[ok])
        return out

    return chi


def _euclid_chi(x: np.ndarray, v: np.ndarray, target: TargetModel):
    def chi(ts: np.ndarray) -> np.ndarray:
        pos = x + ts[:, None] * v
        g = target.grad_log_density(pos)
        return np.maximum(0.0, -np.sum(g * v, axis=-1))

    return chi


def simulate_bounce_time(
    state: PhaseState,
    target: TargetModel,
    cfg: ProjectionConfig,
    clock: ClockSettings,
    rng: RngStream | np.random.Generator,
    t_max: float = np.inf,
) -> float | None:
    """First bounce time along the great circle from ``state``, or None before t_max."""
    gen = rng.generator if isinstance(rng, RngStream) else rng
    chi = _sphere_chi(state.z, state.v, target, cfg)
    if clock.method == "thinning":
        return first_arrival_thinning(chi, t_max, gen, clock)
    e = float(gen.standard_exponential())
    return first_arrival_inversion(chi, e, t_max, clock)


def _search_cap(chi, clock: ClockSettings, counts: dict) -> float:
    """Integrated rate over one period; zero means the clock never rings."""
    m = clock.points_per_period + (clock.points_per_period % 2)
    _, vals = _window_values(chi, 0.0, TWO_PI, m, counts)
    total, _ = _simpson_window(vals, TWO_PI / m)
    return total


def sbps_run(config: SbpsConfig) -> EventPath:
    """Run the sphere bouncy particle sampler to its horizon.

    Deterministic given (seed, stream_id): the clock, the refreshments and the
    initial state draw each own a dedicated sub-stream.
    """
    target, cfg = config.target, config.projection
    d1 = target.dim + 1
    stream = RngStream(config.seed, config.stream_id)
    init_s, clock_s, refresh_s = stream.split(3)

    if isinstance(config.init, str):
        if config.init != "uniform":
            raise DomainError(f"unknown init {config.init!r}")
        w = init_s.generator.standard_normal(d1)
        z = w / np.linalg.norm(w)
        if z[-1] >= 1.0 - EPS_POLE:
            z = -z
        v = refresh_velocity(z, init_s)
    else:
        z = np.asarray(config.init[0], dtype=float).copy()
        v = np.asarray(config.init[1], dtype=float).copy()
        z, v = orthonormalize(z, v)

    counts: dict = {"bounce": 0, "refresh": 0, "forced_refresh": 0}
    times: list[float] = []
    kinds: list[str] = []
    states: list[np.ndarray] = []
    vels: list[np.ndarray] = []
    vdg: list[float] = []
    z0, v0 = z.copy(), v.copy()
    t = 0.0
    max_drift = 0.0

    time_horizon = config.total_time is not None

    def emit(kind: str, z: np.ndarray, v: np.ndarray) -> None:
        times.append(t)
        kinds.append(kind)
        states.append(z.copy())
        vels.append(v.copy())
        grad = geo.tangent_grad_log_target(z, target, cfg) if z[-1] < 1.0 - EPS_POLE else np.zeros(d1)
        vdg.append(float(np.dot(v, grad)))

    while True:
        remaining = (config.total_time - t) if time_horizon else np.inf
        if time_horizon and remaining <= 0:
            break
        tau_r = refresh_s.exponential(config.refresh_rate) if config.refresh_rate > 0 else np.inf
        t_search = min(tau_r, remaining)
        chi = _sphere_chi(z, v, target, cfg)
        forced_refresh_at: float | None = None
        if not np.isfinite(t_search):
            # no refresh clock and no time horizon: event-count horizon with a
            # possibly silent bounce clock
            if _search_cap(chi, config.clock, counts) <= config.clock.tolerance:
                t += TWO_PI  # one full rotation, then close the path
                st = flow(PhaseState(z, v), TWO_PI)
                z, v = np.asarray(st.z), np.asarray(st.v)
                break
        try:
            if config.clock.method == "thinning":
                tau_b = first_arrival_thinning(chi, t_search, clock_s.generator, config.clock, counts)
            else:
                e = float(clock_s.generator.standard_exponential())
                tau_b = first_arrival_inversion(chi, e, t_search, config.clock, counts)
        except ClockError:
            # documented deviation: a pole-swallowed window forces a refresh
            # before the crossing instead of killing the run
            counts["forced_refresh"] += 1
            forced_refresh_at = 0.5 * t_search if np.isfinite(t_search) else 0.5 * config.clock.window
            tau_b = None

        if forced_refresh_at is not None:
            tau, kind = forced_refresh_at, "refresh"
        elif tau_b is not None:
            tau, kind = tau_b, "bounce"
        elif tau_r <= remaining:
            tau, kind = tau_r, "refresh"
        else:
            tau, kind = remaining, "horizon"

        st = flow(PhaseState(z, v), tau)
        z, v = np.asarray(st.z), np.asarray(st.v)
        t += tau
        if kind == "horizon":
            break
        max_drift = max(max_drift, abs(float(np.dot(z, v))))
        z, v = orthonormalize(z, v)
        if kind == "bounce":
            v = reflect_velocity(PhaseState(z, v), target, cfg)
            counts["bounce"] += 1
        else:
            v = refresh_velocity(z, refresh_s)
            counts["refresh"] += 1
        emit(kind, z, v)
        if not time_horizon and counts["bounce"] + counts["refresh"] + counts["forced_refresh"] >= config.n_events:
            break

    total_time = t
    times.append(total_time)
    kinds.append("horizon")
    states.append(z.copy())
    vels.append(v.copy())
    vdg.append(0.0)
    counts["horizon"] = 1

    return EventPath(
        times=np.asarray(times),
        kinds=kinds,
        states=np.asarray(states),
        velocities=np.asarray(vels),
        v_dot_grad=np.asarray(vdg),
        initial_state=z0,
        initial_velocity=v0,
        total_time=total_time,
        counts=counts,
        flow_kind="sphere",
        projection=cfg,
        meta={
            "sampler": "sbps",
            "seed": config.seed,
            "stream_id": config.stream_id,
            "refresh_rate": config.refresh_rate,
            "d": target.dim,
            "family": target.family,
            "clock_method": config.clock.method,
            "max_phase_drift": max_drift,
        },
    )


def bps_run(
    target: TargetModel,
    refresh_rate: float,
    total_time: float | None = None,
    n_events: int | None = None,
    seed: int = 0,
    stream_id: int = 0,
    clock: ClockSettings | None = None,
    init: tuple[np.ndarray, np.ndarray] | str = "stationary",
) -> EventPath:
    """Euclidean bouncy particle sampler baseline with straight-line flow.

    ``init="stationary"`` draws the start from the target (available for the
    built-in families) with a uniform unit velocity.
    """
    if (total_time is None) == (n_events is None):
        raise DomainError("specify exactly one horizon: total_time or n_events")
    if refresh_rate < 0:
        raise DomainError("refresh rate must be nonnegative")
    clock = clock or ClockSettings()
    d = target.dim
    stream = RngStream(seed, stream_id)
    init_s, clock_s, refresh_s = stream.split(3)

    if isinstance(init, str):
        if init != "stationary":
            raise DomainError(f"unknown init {init!r}")
        if target.sample is None:
            raise DomainError("target has no exact sampler; pass an explicit init")
        x = target.sample(init_s.generator, 1)[0]
        w = init_s.generator.standard_normal(d)
        v = w / np.linalg.norm(w)
    else:
        x = np.asarray(init[0], dtype=float).copy()
        v = np.asarray(init[1], dtype=float).copy()
        v = v / np.linalg.norm(v)

    counts: dict = {"bounce": 0, "refresh": 0}
    times: list[float] = []
    kinds: list[str] = []
    states: list[np.ndarray] = []
    vels: list[np.ndarray] = []
    vdg: list[float] = []
    x0, v0 = x.copy(), v.copy()
    t = 0.0
    time_horizon = total_time is not None

    while True:
        remaining = (total_time - t) if time_horizon else np.inf
        if time_horizon and remaining <= 0:
            break
        tau_r = refresh_s.exponential(refresh_rate) if refresh_rate > 0 else np.inf
        t_search = min(tau_r, remaining)
        chi = _euclid_chi(x, v, target)
        if not np.isfinite(t_search):
            t_search = np.inf  # straight-line flow guarantees an eventual bounce for decaying targets
        if clock.method == "thinning":
            tau_b = first_arrival_thinning(chi, t_search, clock_s.generator, clock, counts)
        else:
            e = float(clock_s.generator.standard_exponential())
            tau_b = first_arrival_inversion(chi, e, t_search, clock, counts)

        if tau_b is not None:
            tau, kind = tau_b, "bounce"
        elif tau_r <= remaining:
            tau, kind = tau_r, "refresh"
        else:
            tau, kind = remaining, "horizon"

        x = x + tau * v
        t += tau
        if kind == "horizon":
            break
        if kind == "bounce":
            g = target.grad_log_density(x)
            g2 = float(np.dot(g, g))
            if g2 <= 1e-24:
                raise DegenerateGradient("bounce fired at a vanishing gradient")
            v = v - 2.0 * (float(np.dot(v, g)) / g2) * g
            v = v / np.linalg.norm(v)
            counts["bounce"] += 1
        else:
            w = refresh_s.generator.standard_normal(d)
            v = w / np.linalg.norm(w)
            counts["refresh"] += 1
        times.append(t)
        kinds.append(kind)
        states.append(x.copy())
        vels.append(v.copy())
        vdg.append(float(np.dot(v, target.grad_log_density(x))))
        if not time_horizon and counts["bounce"] + counts["refresh"] >= n_events:
            break

    total = t
    times.append(total)
    kinds.append("horizon")
    states.append(x.copy())
    vels.append(v.copy())
    vdg.append(0.0)
    counts["horizon"] = 1

    return EventPath(
        times=np.asarray(times),
        kinds=kinds,
        states=np.asarray(states),
        velocities=np.asarray(vels),
        v_dot_grad=np.asarray(vdg),
        initial_state=x0,
        initial_velocity=v0,
        total_time=total,
        counts=counts,
        flow_kind="euclidean",
        projection=None,
        meta={
            "sampler": "bps",
            "seed": seed,
            "stream_id": stream_id,
            "refresh_rate": refresh_rate,
            "d": d,
            "family": target.family,
            "clock_method": clock.method,
        },
    )


def discretize_path(path: EventPath, samples_per_unit: int = 5) -> Trace:
    """Evaluate the deterministic flow at midpoint times (k + 1/2)/samples_per_unit.

    Midpoint sampling makes the sample mean a second-order quadrature of the
    path integral, which the diagnostics rely on.  T whole units at the
    default rate give exactly 5T samples.
    """
    if samples_per_unit < 1:
        raise DomainError("samples_per_unit must be a positive integer")
    dt = 1.0 / samples_per_unit
    n = int(math.floor(path.total_time / dt + 1e-9))
    t_samples = (np.arange(n) + 0.5) * dt
    t_samples = t_samples[t_samples <= path.total_time]
    n = len(t_samples)

    seg_times = np.concatenate(([0.0], path.times))
    seg_states = np.vstack([path.initial_state[None, :], path.states])
    seg_vels = np.vstack([path.initial_velocity[None, :], path.velocities])
    idx = np.searchsorted(seg_times, t_samples, side="right") - 1
    idx = np.clip(idx, 0, len(seg_times) - 1)
    rel = t_samples - seg_times[idx]

    meta = dict(path.meta)
    meta["samples_per_unit"] = samples_per_unit
    meta["n_switches"] = path.n_switches
    meta["total_time"] = path.total_time

    if path.flow_kind == "sphere":
        c, s = np.cos(rel)[:, None], np.sin(rel)[:, None]
        zz = c * seg_states[idx] + s * seg_vels[idx]
        lat = zz[:, -1]
        cfg = path.projection
        states = np.full((n, cfg.dim), np.nan)
        ok = lat < 1.0 - EPS_POLE
        if not ok.all():
            meta["pole_samples"] = int((~ok).sum())
        if ok.any():
            states[ok] = geo.sp_forward(zz[ok], cfg)
        lats = lat
    else:
        states = seg_states[idx] + rel[:, None] * seg_vels[idx]
        lats = np.full(n, np.nan)

    n_tr = max(n - 1, 0)
    return Trace(
        states=states,
        latitudes=lats,
        accepted=np.ones(n_tr, dtype=bool),
        log_ratios=np.zeros(n_tr),
        meta=meta,
        source_times=t_samples,
    )
