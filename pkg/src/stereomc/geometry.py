"""Stereographic projections between the d-sphere and Euclidean space.

The standard projection with radius ``R`` maps a unit vector
``z = (z_1, ..., z_{d+1})`` (excluding the north pole ``(0, ..., 0, 1)``) to

    x_i = R z_i / (1 - z_{d+1}),

its inverse sends ``x`` to ``z_i = 2 R x_i / (|x|^2 + R^2)`` with last
coordinate ("latitude") ``z_{d+1} = (|x|^2 - R^2) / (|x|^2 + R^2)``.  The
generalized projection additionally stretches coordinate ``i`` by
``sqrt(lam_i)`` and rotates by an orthogonal ``Q``; all formulas below then
hold with the plain norm replaced by the Mahalanobis norm
``|x|^2_* = x^T Q diag(1/lam) Q^T x``.

Densities transported to the sphere pick up the volume factor
``(R^2 + |x|^2_*)^d`` (an unspecified constant of proportionality is dropped
throughout; every consumer works with ratios).  Log-ratios are evaluated via
the latitude identity ``R^2 + |x|^2_* = 2 R^2 / (1 - z_{d+1})`` so the d-th
power never overflows.

All functions accept arrays with the coordinate axis last and broadcast over
leading axes; scalar-state convenience wrappers exist through
:class:`SpherePoint`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .errors import DimensionMismatch, DomainError, PoleError

if TYPE_CHECKING:  # pragma: no cover
    from .targets import TargetModel

EPS_POLE = 1e-12
_UNIT_TOL = 1e-12


@dataclass(frozen=True)
class SpherePoint:
    """A point on the unit sphere in (d+1)-space.

    Construction checks the unit-norm invariant to 1e-12.  The north pole is
    representable (it is the image of infinity) but is rejected as a sampler
    state by every projection operation.
    """

    coords: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coords, dtype=float)
        if c.ndim != 1 or c.shape[0] < 2:
            raise DimensionMismatch(f"SpherePoint needs a vector of length >= 2, got shape {c.shape}")
        if abs(np.linalg.norm(c) - 1.0) > _UNIT_TOL:
            raise DomainError(f"SpherePoint norm deviates from 1 by more than {_UNIT_TOL}")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coords", c)

    @staticmethod
    def from_coords(coords: np.ndarray) -> "SpherePoint":
        """Renormalize and wrap; the one sanctioned way to repair rounding drift."""
        c = np.asarray(coords, dtype=float)
        n = np.linalg.norm(c)
        if n == 0:
            raise DomainError("cannot normalize the zero vector onto the sphere")
        return SpherePoint(c / n)

    @property
    def dim(self) -> int:
        return self.coords.shape[0] - 1

    @property
    def latitude(self) -> float:
        return float(self.coords[-1])

    @property
    def at_pole(self) -> bool:
        return self.latitude >= 1.0 - EPS_POLE


def north_pole(d: int) -> SpherePoint:
    c = np.zeros(d + 1)
    c[-1] = 1.0
    return SpherePoint(c)


def south_pole(d: int) -> SpherePoint:
    c = np.zeros(d + 1)
    c[-1] = -1.0
    return SpherePoint(c)


@dataclass(frozen=True)
class ProjectionConfig:
    """Radius and (optionally) the stretch/rotation of the projection.

    ``mode="standard"`` is exactly ``mode="generalized"`` with ``lam = 1`` and
    ``Q = I``; the generalized code path reproduces the standard one in that
    case, which the test suite checks.
    """

    dim: int
    radius: float
    mode: str = "standard"
    lam: np.ndarray | None = None
    rotation: np.ndarray | None = None
    _sqrt_lam: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise DomainError(f"dimension must be positive, got {self.dim}")
        if not self.radius > 0:
            raise DomainError(f"radius must be positive, got {self.radius}")
        if self.mode not in ("standard", "generalized"):
            raise DomainError(f"unknown projection mode {self.mode!r}")
        if self.mode == "generalized":
            lam = np.asarray(self.lam, dtype=float)
            q = np.asarray(self.rotation, dtype=float)
            if lam.shape != (self.dim,):
                raise DimensionMismatch(f"lam must have shape ({self.dim},), got {lam.shape}")
            if np.any(lam <= 0):
                raise DomainError("all lam entries must be positive")
            if q.shape != (self.dim, self.dim):
                raise DimensionMismatch(f"rotation must be {self.dim}x{self.dim}, got {q.shape}")
            if np.max(np.abs(q.T @ q - np.eye(self.dim))) > 1e-10:
                raise DomainError("rotation matrix is not orthogonal to 1e-10")
            object.__setattr__(self, "lam", lam)
            object.__setattr__(self, "rotation", q)
            object.__setattr__(self, "_sqrt_lam", np.sqrt(lam))
        else:
            if self.lam is not None or self.rotation is not None:
                raise DomainError("standard mode takes neither lam nor rotation")

    @staticmethod
    def standard(d: int, radius: float | None = None) -> "ProjectionConfig":
        """Standard projection; radius defaults to sqrt(d)."""
        return ProjectionConfig(d, float(radius) if radius is not None else float(np.sqrt(d)))

    @staticmethod
    def generalized(
        d: int,
        lam: np.ndarray,
        rotation: np.ndarray | None = None,
        radius: float | None = None,
    ) -> "ProjectionConfig":
        """Generalized projection; radius defaults to sqrt(sum(lam))."""
        lam = np.asarray(lam, dtype=float)
        if rotation is None:
            rotation = np.eye(d)
        r = float(radius) if radius is not None else float(np.sqrt(lam.sum()))
        return ProjectionConfig(d, r, "generalized", lam, rotation)


def _coords(z) -> np.ndarray:
    return z.coords if isinstance(z, SpherePoint) else np.asarray(z, dtype=float)


def _check_not_pole(lat: np.ndarray) -> None:
    if np.any(lat >= 1.0 - EPS_POLE):
        raise PoleError("state within the pole guard (1 - z_{d+1} <= 1e-12) maps to infinity")


def sp_forward(z, cfg: ProjectionConfig) -> np.ndarray:
    """Project sphere point(s) to Euclidean space.

    Raises
    ------
    PoleError
        If any latitude is within ``EPS_POLE`` of 1.
    """
    zc = _coords(z)
    if zc.shape[-1] != cfg.dim + 1:
        raise DimensionMismatch(f"expected last axis {cfg.dim + 1}, got {zc.shape[-1]}")
    lat = zc[..., -1]
    _check_not_pole(np.atleast_1d(lat))
    x = cfg.radius * zc[..., :-1] / (1.0 - lat[..., None])
    if cfg.mode == "generalized":
        x = (x * cfg._sqrt_lam) @ cfg.rotation.T
    return x


def sp_inverse(x, cfg: ProjectionConfig) -> SpherePoint:
    """Map Euclidean point(s) back onto the sphere (total on finite inputs)."""
    arr = _sp_inverse_arr(np.asarray(x, dtype=float), cfg)
    if arr.ndim == 1:
        return SpherePoint(arr)
    return arr  # batched callers keep the raw array


def _sp_inverse_arr(x: np.ndarray, cfg: ProjectionConfig) -> np.ndarray:
    if x.shape[-1] != cfg.dim:
        raise DimensionMismatch(f"expected last axis {cfg.dim}, got {x.shape[-1]}")
    if not np.all(np.isfinite(x)):
        raise DomainError("sp_inverse requires finite coordinates")
    y = x
    if cfg.mode == "generalized":
        y = (x @ cfg.rotation) / cfg._sqrt_lam
    s = np.sum(y * y, axis=-1)
    denom = s + cfg.radius**2
    z = np.empty(x.shape[:-1] + (cfg.dim + 1,))
    z[..., :-1] = 2.0 * cfg.radius * y / denom[..., None]
    z[..., -1] = (s - cfg.radius**2) / denom
    # kill rounding drift so downstream invariants see unit vectors
    z /= np.linalg.norm(z, axis=-1, keepdims=True)
    return z


def star_norm_sq(x, cfg: ProjectionConfig) -> np.ndarray:
    """Squared norm entering the volume factor: Euclidean, or Mahalanobis in generalized mode."""
    arr = np.asarray(x, dtype=float)
    if cfg.mode == "generalized":
        y = (arr @ cfg.rotation) / cfg._sqrt_lam
        return np.sum(y * y, axis=-1)
    return np.sum(arr * arr, axis=-1)


def log_jacobian(x, cfg: ProjectionConfig) -> np.ndarray:
    """Log volume factor d*log(R^2 + |x|^2_*), constant of proportionality dropped."""
    return cfg.dim * np.log(cfg.radius**2 + star_norm_sq(x, cfg))


def log_target_sphere(z, target: "TargetModel", cfg: ProjectionConfig) -> float | np.ndarray:
    """Log density (up to a constant) of the target transported to the sphere.

    Computed as ``log pi(SP(z)) + d*[log(2 R^2) - log(1 - z_{d+1})]`` using the
    latitude identity, which keeps the d-fold volume power exact far out in the
    tails.  Returns ``-inf`` where the target density vanishes.
    """
    zc = _coords(z)
    x = sp_forward(zc, cfg)
    lat = zc[..., -1]
    out = target.log_density(x) + cfg.dim * (np.log(2.0 * cfg.radius**2) - np.log1p(-lat))
    if np.ndim(out) == 0:
        return float(out)
    return out


def _pullback_grad(x: np.ndarray, g: np.ndarray, cfg: ProjectionConfig):
    """Reduce the generalized projection to the standard one.

    GSP is the standard projection followed by the linear map
    ``L = Q diag(sqrt(lam))``; differentiating through ``L`` turns the target
    gradient ``g`` at ``x`` into ``sqrt(lam) * (Q^T g)`` at the standard image
    ``x_std = diag(1/sqrt(lam)) Q^T x``.
    """
    if cfg.mode == "generalized":
        x_std = (x @ cfg.rotation) / cfg._sqrt_lam
        g_std = (g @ cfg.rotation) * cfg._sqrt_lam
        return x_std, g_std
    return x, g


def tangent_grad_log_target(z, target: "TargetModel", cfg: ProjectionConfig) -> np.ndarray:
    """Tangential gradient of the transported log density at ``z``.

    Any representative of the ambient gradient differing by a multiple of ``z``
    projects to the same tangent vector; the representative used here has

        d/dz_i   = g_i (R^2 + |x|^2) / (2R),                     i <= d,
        d/dz_d+1 = [mean_j(g_j x_j) + 1] d (R^2 + |x|^2) / (2R^2),

    with ``g`` the Euclidean gradient of log pi (pulled back through the
    stretch/rotation in generalized mode).  The returned vector satisfies
    ``z . grad = 0`` up to rounding.
    """
    zc = _coords(z)
    x = sp_forward(zc, cfg)
    g = target.grad_log_density(x)
    x_std, g_std = _pullback_grad(x, g, cfg)
    amb = _ambient_grad(zc, x_std, g_std, cfg)
    proj = amb - np.sum(zc * amb, axis=-1, keepdims=True) * zc
    return proj


def _ambient_grad(zc: np.ndarray, x_std: np.ndarray, g_std: np.ndarray, cfg: ProjectionConfig) -> np.ndarray:
    r = cfg.radius
    s = r**2 + np.sum(x_std * x_std, axis=-1)
    amb = np.empty_like(zc)
    amb[..., :-1] = g_std * (s / (2.0 * r))[..., None]
    gx = np.sum(g_std * x_std, axis=-1)
    amb[..., -1] = (gx + cfg.dim) * s / (2.0 * r**2)
    return amb


def v_dot_tangent_grad(zc: np.ndarray, vc: np.ndarray, target: "TargetModel", cfg: ProjectionConfig) -> np.ndarray:
    """Inner product v . grad for tangent v, without materializing the projection.

    For ``v`` orthogonal to ``z`` the tangential and ambient gradients have the
    same inner product with ``v``; used by the event clock on batched states.
    """
    x = sp_forward(zc, cfg)
    g = target.grad_log_density(x)
    x_std, g_std = _pullback_grad(x, g, cfg)
    r = cfg.radius
    s = r**2 + np.sum(x_std * x_std, axis=-1)
    gx = np.sum(g_std * x_std, axis=-1)
    term_head = np.sum(vc[..., :-1] * g_std, axis=-1) * s / (2.0 * r)
    term_last = vc[..., -1] * (gx + cfg.dim) * s / (2.0 * r**2)
    return term_head + term_last
