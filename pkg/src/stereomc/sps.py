"""Random-walk Metropolis samplers on the sphere, plus the Euclidean baseline.

The sphere walk proposes a Gaussian step in the tangent space at the current
state and reprojects to the sphere; that kernel is symmetric, so the
Metropolis ratio is just the transported-density ratio.  The coordinate-split
variant draws two independent sphere proposals and splices the first Euclidean
coordinate of one onto the remaining coordinates of the other; its ratio is
evaluated in Euclidean form because the spliced point generally has no shared
sphere preimage.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import geometry as geo
from .errors import DegenerateProposal, DomainError
from .geometry import EPS_POLE, ProjectionConfig, SpherePoint
from .rng import RngStream
from .targets import TargetModel

Init = Union[str, np.ndarray]


@dataclass
class RwmConfig:
    """Chain settings shared by the sphere samplers and the Euclidean baseline."""

    target: TargetModel
    projection: ProjectionConfig
    h: float
    n_steps: int
    init: Init = "uniform_sphere"
    seed: int = 0
    stream_id: int = 0

    def __post_init__(self) -> None:
        if not self.h > 0:
            raise DomainError(f"step size must be positive, got {self.h}")
        if self.n_steps < 0:
            raise DomainError(f"n_steps must be nonnegative, got {self.n_steps}")
        if (
            isinstance(self.init, str)
            and self.init == "north_pole"
            and self.target.family == "student_t"
            and self.target.params.get("nu", np.inf) < self.target.dim
        ):
            warnings.warn(
                "north-pole start with nu < d: the transported density diverges at the pole, "
                "so the first proposal is rejected with probability one and the chain sticks; "
                "prefer init='uniform_sphere'",
                stacklevel=2,
            )


@dataclass(frozen=True)
class Trace:
    """Discrete-time chain output.

    ``states`` has one more row than ``accepted``/``log_ratios``; row t+1 is
    the state after step t, and a rejected step repeats the previous row
    bitwise.
    """

    states: np.ndarray          # (n+1, d)
    latitudes: np.ndarray       # (n+1,)
    accepted: np.ndarray        # (n,) bool
    log_ratios: np.ndarray      # (n,)
    meta: dict = field(default_factory=dict)
    source_times: np.ndarray | None = None  # only for discretized continuous paths

    @property
    def n_steps(self) -> int:
        return len(self.accepted)


def sps_propose(z, h: float, rng: RngStream | np.random.Generator) -> SpherePoint:
    """Tangent Gaussian step of scale h, reprojected to the sphere.

    The density of the proposal ẑ from z equals that of z from ẑ, so no
    Hastings correction is ever needed.
    """
    gen = rng.generator if isinstance(rng, RngStream) else rng
    zc = z.coords if isinstance(z, SpherePoint) else np.asarray(z, dtype=float)
    out = _propose_arr(zc, h, gen)
    return SpherePoint(out)


def _propose_arr(zc: np.ndarray, h: float, gen: np.random.Generator) -> np.ndarray:
    for _ in range(2):
        step = h * gen.standard_normal(zc.shape[0])
        step -= np.dot(zc, step) * zc
        w = zc + step
        n = np.linalg.norm(w)
        if n >= 1e-14:
            return w / n
    raise DegenerateProposal("proposal collapsed to the origin twice in a row")


class _SphereState:
    """Mutable chain state: sphere coordinates plus the cached transported log density."""

    __slots__ = ("z", "log_pi_s", "at_pole")

    def __init__(self, z: np.ndarray, target: TargetModel, cfg: ProjectionConfig):
        self.z = z
        self.at_pole = z[-1] >= 1.0 - EPS_POLE
        self.log_pi_s = -np.inf if self.at_pole else _log_pi_s(z, target, cfg)


def _log_pi_s(zc: np.ndarray, target: TargetModel, cfg: ProjectionConfig) -> float:
    x = cfg.radius * zc[:-1] / (1.0 - zc[-1])
    if cfg.mode == "generalized":
        x = (x * cfg._sqrt_lam) @ cfg.rotation.T
    return float(target.log_density(x)) + cfg.dim * (np.log(2.0 * cfg.radius**2) - np.log1p(-zc[-1]))


def _pole_limit_class(target: TargetModel, cfg: ProjectionConfig) -> str:
    """Sign of lim log pi_S at the pole: 'zero', 'finite' (nu = d) or 'infinite' mass."""
    if target.family == "student_t":
        nu = target.params["nu"]
        if nu > target.dim:
            return "zero"
        if nu == target.dim:
            return "finite"
        return "infinite"
    # gaussian and the supported product marginals all have lighter-than-borderline tails
    return "zero"


def sps_step(
    state: _SphereState | SpherePoint,
    config: RwmConfig,
    rng: RngStream | np.random.Generator,
) -> tuple[_SphereState, bool, float]:
    """One Metropolis step on the sphere.

    Proposals landing inside the pole guard are auto-rejected (log ratio -inf)
    rather than erroring, preserving the Markov property; the guard set has
    probability zero under the proposal law.
    """
    gen = rng.generator if isinstance(rng, RngStream) else rng
    if isinstance(state, SpherePoint):
        state = _SphereState(np.array(state.coords), config.target, config.projection)
    znew = _propose_arr(state.z, config.h, gen)
    cand = _SphereState(znew, config.target, config.projection)
    if cand.at_pole:
        return state, False, -np.inf
    if state.at_pole:
        # exact-pole start: decide by the limit of the transported density
        cls = _pole_limit_class(config.target, config.projection)
        if cls == "zero":
            log_ratio = np.inf
        elif cls == "infinite":
            log_ratio = -np.inf
        else:  # nu = d: the transported density is globally constant
            log_ratio = 0.0
    else:
        log_ratio = cand.log_pi_s - state.log_pi_s
    if log_ratio >= 0 or np.log(gen.random()) < log_ratio:
        return cand, True, float(log_ratio)
    return state, False, float(log_ratio)


# the generalized sampler is the same kernel driven by a generalized projection;
# with lam = 1, Q = I it reproduces the standard sampler draw for draw
gsps_step = sps_step


class _RspsState:
    __slots__ = ("z", "x", "log_pi_j")

    def __init__(self, z: np.ndarray, x: np.ndarray, log_pi_j: float):
        self.z = z
        self.x = x
        self.log_pi_j = log_pi_j  # log pi(x) + d log(R^2 + |x|^2_*)

    @staticmethod
    def at(z: np.ndarray, target: TargetModel, cfg: ProjectionConfig) -> "_RspsState":
        x = geo.sp_forward(z, cfg)
        return _RspsState(z, x, _log_pi_euclidean(x, target, cfg))


def _log_pi_euclidean(x: np.ndarray, target: TargetModel, cfg: ProjectionConfig) -> float:
    return float(target.log_density(x)) + cfg.dim * np.log(cfg.radius**2 + geo.star_norm_sq(x, cfg))


def rsps_step(
    state: _RspsState | SpherePoint,
    config: RwmConfig,
    rng: RngStream | np.random.Generator,
) -> tuple[_RspsState, bool, float]:
    """Coordinate-split step: first coordinate from one proposal, the rest from another.

    The spliced point generally lies on neither proposal's sphere image, so the
    ratio is evaluated in Euclidean form rather than through latitudes.
    """
    if config.target.dim < 2:
        raise DomainError("the coordinate-split sampler needs d >= 2")
    gen = rng.generator if isinstance(rng, RngStream) else rng
    cfg = config.projection
    if isinstance(state, SpherePoint):
        state = _RspsState.at(np.array(state.coords), config.target, cfg)
    za = _propose_arr(state.z, config.h, gen)
    zb = _propose_arr(state.z, config.h, gen)
    if za[-1] >= 1.0 - EPS_POLE or zb[-1] >= 1.0 - EPS_POLE:
        return state, False, -np.inf
    xa = geo.sp_forward(za, cfg)
    xhat = geo.sp_forward(zb, cfg)
    xhat[0] = xa[0]
    log_num = _log_pi_euclidean(xhat, config.target, cfg)
    log_ratio = log_num - state.log_pi_j
    if log_ratio >= 0 or np.log(gen.random()) < log_ratio:
        znew = geo._sp_inverse_arr(xhat, cfg)
        return _RspsState(znew, xhat, log_num), True, log_ratio
    return state, False, log_ratio


def rwm_step(
    x: np.ndarray,
    target: TargetModel,
    sigma: float,
    rng: RngStream | np.random.Generator,
    log_pi: float | None = None,
) -> tuple[np.ndarray, bool, float]:
    """Plain Gaussian-proposal Metropolis in R^d (baseline)."""
    gen = rng.generator if isinstance(rng, RngStream) else rng
    if log_pi is None:
        log_pi = float(target.log_density(x))
    prop = x + sigma * gen.standard_normal(x.shape[0])
    log_prop = float(target.log_density(prop))
    log_ratio = log_prop - log_pi
    if log_ratio >= 0 or np.log(gen.random()) < log_ratio:
        return prop, True, log_ratio
    return x, False, log_ratio


def _initial_sphere(config: RwmConfig, gen: np.random.Generator) -> np.ndarray:
    d = config.target.dim
    init = config.init
    if isinstance(init, str):
        if init == "north_pole":
            return geo.north_pole(d).coords.copy()
        if init == "south_pole":
            return geo.south_pole(d).coords.copy()
        if init == "uniform_sphere":
            w = gen.standard_normal(d + 1)
            return w / np.linalg.norm(w)
        raise DomainError(f"unknown init {init!r}")
    x0 = np.asarray(init, dtype=float)
    return geo._sp_inverse_arr(x0, config.projection)


def run_chain(config: RwmConfig, sampler_kind: str = "sps") -> Trace:
    """Run a chain and record states, latitudes, acceptance flags and log ratios.

    Deterministic given (seed, stream_id).  States are stored in Euclidean
    coordinates; the sphere state is the internal representation and the
    projection is applied lazily per recorded row.
    """
    kind = sampler_kind.lower()
    stream = RngStream(config.seed, config.stream_id)
    gen = stream.generator
    target, cfg = config.target, config.projection
    n = config.n_steps
    d = target.dim

    states = np.empty((n + 1, d))
    lats = np.empty(n + 1)
    accepted = np.zeros(n, dtype=bool)
    log_ratios = np.zeros(n)

    meta = {
        "sampler": kind,
        "seed": config.seed,
        "stream_id": config.stream_id,
        "h": config.h,
        "d": d,
        "R": cfg.radius,
        "mode": cfg.mode,
        "family": target.family,
        "init": config.init if isinstance(config.init, str) else "point",
        "n_steps": n,
    }

    if kind == "rwm":
        if isinstance(config.init, str):
            raise DomainError("the Euclidean baseline needs an explicit point init")
        x = np.asarray(config.init, dtype=float).copy()
        log_pi = float(target.log_density(x))
        states[0] = x
        lats[0] = _euclidean_latitude(x, cfg)
        for t in range(n):
            x, acc, lr = rwm_step(x, target, config.h, gen, log_pi)
            if acc:
                log_pi = float(target.log_density(x))
            states[t + 1] = x
            lats[t + 1] = _euclidean_latitude(x, cfg)
            accepted[t] = acc
            log_ratios[t] = lr
        return Trace(states, lats, accepted, log_ratios, meta)

    z0 = _initial_sphere(config, gen)
    if kind in ("sps", "gsps"):
        st = _SphereState(z0, target, cfg)
        states[0] = _project_or_nan(st.z, cfg)
        lats[0] = st.z[-1]
        for t in range(n):
            st, acc, lr = sps_step(st, config, gen)
            states[t + 1] = _project_or_nan(st.z, cfg)
            lats[t + 1] = st.z[-1]
            accepted[t] = acc
            log_ratios[t] = lr
        return Trace(states, lats, accepted, log_ratios, meta)

    if kind == "rsps":
        if z0[-1] >= 1.0 - EPS_POLE:
            raise DomainError("the coordinate-split sampler cannot start at the pole")
        st = _RspsState.at(z0, target, cfg)
        states[0] = st.x
        lats[0] = st.z[-1]
        for t in range(n):
            st, acc, lr = rsps_step(st, config, gen)
            states[t + 1] = st.x
            lats[t + 1] = st.z[-1]
            accepted[t] = acc
            log_ratios[t] = lr
        return Trace(states, lats, accepted, log_ratios, meta)

    raise DomainError(f"unknown sampler kind {sampler_kind!r}")


def _project_or_nan(zc: np.ndarray, cfg: ProjectionConfig) -> np.ndarray:
    if zc[-1] >= 1.0 - EPS_POLE:
        return np.full(cfg.dim, np.nan)
    x = cfg.radius * zc[:-1] / (1.0 - zc[-1])
    if cfg.mode == "generalized":
        x = (x * cfg._sqrt_lam) @ cfg.rotation.T
    return x


def _euclidean_latitude(x: np.ndarray, cfg: ProjectionConfig) -> float:
    s = geo.star_norm_sq(x, cfg)
    return float((s - cfg.radius**2) / (s + cfg.radius**2))
