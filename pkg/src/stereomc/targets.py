"""Target distributions, their closed-form tuning constants, and ergodicity classes.

Densities are carried unnormalized in log form; samplers consume ratios only.
Every family evaluates on arrays with the coordinate axis last and broadcasts
over leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DimensionMismatch, DomainError, UnsupportedFamily


@dataclass(frozen=True)
class MarginalModel:
    """One-dimensional factor of a product-form target.

    ``roughness`` is E[((log f)')^2] under f, the constant that governs the
    optimal step size; it is 1 exactly for the standard Gaussian and larger
    for every other unit-variance marginal.
    """

    log_f: Callable[[np.ndarray], np.ndarray]
    dlog_f: Callable[[np.ndarray], np.ndarray]
    d2log_f: Callable[[np.ndarray], np.ndarray]
    roughness: float
    second_moment: float
    name: str = "custom"
    sampler: Callable[[np.random.Generator, int], np.ndarray] | None = None


def gaussian_marginal() -> MarginalModel:
    return MarginalModel(
        log_f=lambda x: -0.5 * np.square(x),
        dlog_f=lambda x: -np.asarray(x, dtype=float),
        d2log_f=lambda x: -np.ones_like(np.asarray(x, dtype=float)),
        roughness=1.0,
        second_moment=1.0,
        name="gaussian",
        sampler=lambda gen, n: gen.standard_normal(n),
    )


def scaled_t_roughness(nu: float) -> float:
    """Exact E[((log f)')^2] of the unit-variance student-t marginal.

    Closed form nu (nu+1) / ((nu-2)(nu+3)); derivable by a beta-function
    reduction and confirmed by quadrature.  Note this is smaller than the
    tabulated constant :func:`c_nu` (the two agree only as nu -> inf).
    """
    if not nu > 2:
        raise DomainError(f"scaled student-t marginal needs nu > 2, got {nu}")
    return float(nu * (nu + 1.0) / ((nu - 2.0) * (nu + 3.0)))


def student_t_marginal(nu: float) -> MarginalModel:
    """Student-t marginal rescaled by sqrt((nu-2)/nu) so that E[X^2] = 1.

    With that scaling, log f(x) = -((nu+1)/2) log(1 + x^2/(nu-2)) + const and
    the roughness has the closed form of :func:`scaled_t_roughness`.
    """
    if not nu > 2:
        raise DomainError(f"scaled student-t marginal needs nu > 2, got {nu}")
    nm2 = nu - 2.0
    scale = np.sqrt(nm2 / nu)

    def log_f(x):
        return -0.5 * (nu + 1.0) * np.log1p(np.square(x) / nm2)

    def dlog_f(x):
        x = np.asarray(x, dtype=float)
        return -(nu + 1.0) * x / (nm2 + np.square(x))

    def d2log_f(x):
        x = np.asarray(x, dtype=float)
        return -(nu + 1.0) * (nm2 - np.square(x)) / np.square(nm2 + np.square(x))

    return MarginalModel(
        log_f=log_f,
        dlog_f=dlog_f,
        d2log_f=d2log_f,
        roughness=scaled_t_roughness(nu),
        second_moment=1.0,
        name=f"student_t(nu={nu:g})",
        sampler=lambda gen, n: scale * gen.standard_t(nu, size=n),
    )


def scale_mixture_marginal(roughness: float) -> MarginalModel:
    """Unit-variance two-component Gaussian scale mixture with prescribed roughness.

    f = (N(0, a^2) + N(0, 2 - a^2)) / 2 with a solved so that
    E[((log f)')^2] hits the requested value; every moment is finite and
    (log f)' is Lipschitz, so the mixture is a convenient heavy-ish marginal
    for scaling experiments at an exactly known roughness.
    """
    if not 1.0 < roughness < 50.0:
        raise DomainError(f"mixture roughness must lie in (1, 50), got {roughness}")
    from scipy import integrate, optimize

    def make(a2: float, b2: float):
        la2, lb2 = np.log(a2), np.log(b2)

        def weights(x):
            x2 = np.square(x)
            la = -0.5 * x2 / a2 - 0.5 * la2
            lb = -0.5 * x2 / b2 - 0.5 * lb2
            m = np.maximum(la, lb)
            wa = 0.5 * np.exp(la - m)
            wb = 0.5 * np.exp(lb - m)
            return m, wa, wb

        def log_f(x):
            m, wa, wb = weights(x)
            return m + np.log(wa + wb)

        def dlog_f(x):
            x = np.asarray(x, dtype=float)
            _, wa, wb = weights(x)
            return -x * (wa / a2 + wb / b2) / (wa + wb)

        def d2log_f(x):
            x = np.asarray(x, dtype=float)
            x2 = np.square(x)
            _, wa, wb = weights(x)
            tot = wa + wb
            f2 = (wa * (x2 / a2**2 - 1.0 / a2) + wb * (x2 / b2**2 - 1.0 / b2)) / tot
            d1 = -x * (wa / a2 + wb / b2) / tot
            return f2 - d1 * d1

        return log_f, dlog_f, d2log_f

    def rough_of(a: float) -> float:
        a2 = a * a
        log_f, dlog_f, _ = make(a2, 2.0 - a2)
        norm = integrate.quad(lambda x: np.exp(log_f(x)), -np.inf, np.inf)[0]
        num = integrate.quad(lambda x: np.square(dlog_f(x)) * np.exp(log_f(x)), -np.inf, np.inf, limit=200)[0]
        return num / norm

    a = optimize.brentq(lambda s: rough_of(s) - roughness, 0.05, 0.999, xtol=1e-12)
    a2 = a * a
    b2 = 2.0 - a2
    log_f, dlog_f, d2log_f = make(a2, b2)

    def sampler(gen: np.random.Generator, n: int) -> np.ndarray:
        comp = gen.random(n) < 0.5
        scales = np.where(comp, np.sqrt(a2), np.sqrt(b2))
        return scales * gen.standard_normal(n)

    return MarginalModel(
        log_f=log_f,
        dlog_f=dlog_f,
        d2log_f=d2log_f,
        roughness=float(roughness),
        second_moment=1.0,
        name=f"scale_mixture(E={roughness:g})",
        sampler=sampler,
    )


def marginal_second_moment(m: MarginalModel) -> float:
    """E[X^2] by adaptive quadrature over the full line (self-normalizing)."""
    norm = integrate.quad(lambda x: np.exp(m.log_f(x)), -np.inf, np.inf, epsabs=1e-12, epsrel=1e-9)[0]
    num = integrate.quad(lambda x: x * x * np.exp(m.log_f(x)), -np.inf, np.inf, epsabs=1e-12, epsrel=1e-9)[0]
    return num / norm


def marginal_roughness(m: MarginalModel) -> float:
    """E[((log f)')^2] by adaptive quadrature over the full line (self-normalizing)."""
    norm = integrate.quad(lambda x: np.exp(m.log_f(x)), -np.inf, np.inf, epsabs=1e-12, epsrel=1e-9)[0]
    num = integrate.quad(
        lambda x: np.square(m.dlog_f(x)) * np.exp(m.log_f(x)), -np.inf, np.inf, epsabs=1e-12, epsrel=1e-9
    )[0]
    return num / norm


@dataclass(frozen=True)
class TargetModel:
    """A d-dimensional target with log-density and gradient evaluators."""

    dim: int
    family: str
    log_density: Callable[[np.ndarray], np.ndarray]
    grad_log_density: Callable[[np.ndarray], np.ndarray]
    params: dict = field(default_factory=dict)
    marginal: MarginalModel | None = None
    sample: Callable[[np.random.Generator, int], np.ndarray] | None = None

    def check_dim(self, x: np.ndarray) -> None:
        if np.asarray(x).shape[-1] != self.dim:
            raise DimensionMismatch(f"expected last axis {self.dim}, got {np.asarray(x).shape[-1]}")


def _cov_pieces(d: int, lam, rotation):
    lam = np.full(d, 1.0) if lam is None else np.asarray(lam, dtype=float)
    if lam.shape != (d,):
        raise DimensionMismatch(f"lam must have shape ({d},), got {lam.shape}")
    if np.any(lam <= 0):
        raise DomainError("covariance eigenvalues must be positive")
    q = None
    if rotation is not None:
        q = np.asarray(rotation, dtype=float)
        if q.shape != (d, d):
            raise DimensionMismatch(f"rotation must be {d}x{d}, got {q.shape}")
        if np.max(np.abs(q.T @ q - np.eye(d))) > 1e-10:
            raise DomainError("rotation matrix is not orthogonal to 1e-10")
    return lam, q


def _whiten(x: np.ndarray, lam: np.ndarray, q: np.ndarray | None) -> np.ndarray:
    # y = Lambda^{-1/2} Q^T x, so that x^T Sigma^{-1} x = |y|^2
    y = x if q is None else x @ q
    return y / np.sqrt(lam)


def _color(y: np.ndarray, lam: np.ndarray, q: np.ndarray | None) -> np.ndarray:
    out = y * np.sqrt(lam)
    return out if q is None else out @ q.T


def gaussian(d: int, mean=None, lam=None, rotation=None) -> TargetModel:
    """Gaussian with covariance Q diag(lam) Q^T; defaults to the standard normal."""
    lam, q = _cov_pieces(d, lam, rotation)
    mu = np.zeros(d) if mean is None else np.broadcast_to(np.asarray(mean, dtype=float), (d,)).copy()
    identity = q is None and np.all(lam == 1.0) and np.all(mu == 0.0)

    if identity:
        def log_density(x):
            x = np.asarray(x, dtype=float)
            return -0.5 * np.sum(x * x, axis=-1)

        def grad_log_density(x):
            return -np.asarray(x, dtype=float)
    else:
        def log_density(x):
            y = _whiten(np.asarray(x, dtype=float) - mu, lam, q)
            return -0.5 * np.sum(y * y, axis=-1)

        def grad_log_density(x):
            # Sigma^{-1} (x - mu) = Q Lambda^{-1/2} y with y the whitened residual
            y = _whiten(np.asarray(x, dtype=float) - mu, lam, q)
            out = y / np.sqrt(lam)
            return -(out if q is None else out @ q.T)

    def sample(gen, n):
        y = gen.standard_normal((n, d))
        return mu + _color(y, lam, q)

    return TargetModel(
        dim=d,
        family="gaussian",
        log_density=log_density,
        grad_log_density=grad_log_density,
        params={"mean": mu, "lam": lam, "rotation": q},
        sample=sample,
    )


def student_t(d: int, nu: float, lam=None, rotation=None) -> TargetModel:
    """Multivariate student-t, log pi(x) = -((nu+d)/2) log(1 + x^T S^{-1} x / nu) + const.

    ``S = Q diag(lam) Q^T`` is the scale matrix (often loosely called the
    covariance; the true covariance is S * nu/(nu-2) when it exists).
    """
    if not nu > 0:
        raise DomainError(f"student_t needs nu > 0, got {nu}")
    lam, q = _cov_pieces(d, lam, rotation)
    identity = q is None and np.all(lam == 1.0)

    if identity:
        def log_density(x):
            x = np.asarray(x, dtype=float)
            return -0.5 * (nu + d) * np.log1p(np.sum(x * x, axis=-1) / nu)

        def grad_log_density(x):
            x = np.asarray(x, dtype=float)
            return -(nu + d) * x / (nu + np.sum(x * x, axis=-1))[..., None]
    else:
        def log_density(x):
            y = _whiten(np.asarray(x, dtype=float), lam, q)
            qq = np.sum(y * y, axis=-1)
            return -0.5 * (nu + d) * np.log1p(qq / nu)

        def grad_log_density(x):
            x = np.asarray(x, dtype=float)
            y = _whiten(x, lam, q)
            qq = np.sum(y * y, axis=-1)
            siy = y / np.sqrt(lam)
            six = siy if q is None else siy @ q.T
            return -(nu + d) * six / (nu + qq)[..., None]

    def sample(gen, n):
        y = gen.standard_normal((n, d))
        chi = gen.chisquare(nu, size=n)
        y *= np.sqrt(nu / chi)[:, None]
        return _color(y, lam, q)

    return TargetModel(
        dim=d,
        family="student_t",
        log_density=log_density,
        grad_log_density=grad_log_density,
        params={"nu": float(nu), "lam": lam, "rotation": q},
        sample=sample,
    )


def product_iid(d: int, marginal: MarginalModel) -> TargetModel:
    """Product target pi(x) = prod_i f(x_i)."""

    def log_density(x):
        return np.sum(marginal.log_f(np.asarray(x, dtype=float)), axis=-1)

    def grad_log_density(x):
        return marginal.dlog_f(np.asarray(x, dtype=float))

    sample = None
    if marginal.sampler is not None:
        def sample(gen, n):
            return marginal.sampler(gen, n * d).reshape(n, d)

    return TargetModel(
        dim=d,
        family="product_iid",
        log_density=log_density,
        grad_log_density=grad_log_density,
        params={"marginal": marginal.name},
        marginal=marginal,
        sample=sample,
    )


def g_k(k: float, z) -> np.ndarray | float:
    """Latitude profile of the log-likelihood ratio for isotropic student-t targets.

    For the student-t with nu = k*d degrees of freedom and radius sqrt(d), the
    transported log density satisfies log pi_S(z) = const - d * g_k(z_{d+1}),
    with ``g_k(z) = ((k+1)/2) log(k + (1+z)/(1-z)) + log(1-z)``.  ``k = inf``
    gives the Gaussian profile ``1/(1-z) - 1/2 + log(1-z)`` (up to a constant).
    g_1 is identically log 2: acceptance is exactly 1 for nu = d.
    """
    zar = np.asarray(z, dtype=float)
    if np.any(zar <= -1.0) or np.any(zar >= 1.0):
        raise DomainError("g_k is defined on the open interval (-1, 1)")
    if np.isinf(k):
        out = 1.0 / (1.0 - zar) - 0.5 + np.log(1.0 - zar)
    elif k > 0:
        out = 0.5 * (k + 1.0) * np.log(k + (1.0 + zar) / (1.0 - zar)) + np.log(1.0 - zar)
    else:
        raise DomainError(f"g_k needs k > 0, got {k}")
    if np.ndim(z) == 0:
        return float(out)
    return out


def c_nu(nu: float) -> float:
    """Tabulated tuning constant for the unit-variance student-t family.

    C_nu = (nu/(nu-2)) ((nu+1)/nu) ((nu+4)/(nu+3)) sqrt((nu+4)/nu); > 1 for all
    nu > 2 and -> 1 as nu -> inf.  Beware: this reference constant exceeds the
    marginal's exact roughness (:func:`scaled_t_roughness`) by the factor
    ((nu+4)/nu)^{3/2}; use it to reproduce the shipped tuning tables, and
    ``MarginalModel.roughness`` when the actual integral matters.
    """
    if not nu > 2:
        raise DomainError(f"c_nu requires nu > 2, got {nu}")
    return float((nu / (nu - 2.0)) * ((nu + 1.0) / nu) * ((nu + 4.0) / (nu + 3.0)) * np.sqrt((nu + 4.0) / nu))


def c_nu_ratio(nu: float) -> float:
    """C_nu / (C_nu - 1): the step-efficiency gain over the Euclidean random walk."""
    c = c_nu(nu)
    return c / (c - 1.0)


UNIFORMLY_ERGODIC = "uniformly_ergodic"
NOT_GEOMETRICALLY_ERGODIC = "not_geometrically_ergodic"
UNKNOWN = "unknown"


def ergodicity_class(sampler: str, family: str, nu: float, d: int) -> str:
    """Closed-form ergodicity classification for student-t targets.

    The sphere random walk is uniformly ergodic iff nu >= d (the condition is
    also necessary for geometric ergodicity).  The spherical bouncy particle
    sampler is uniformly ergodic for nu > d - 1/2; below that threshold the
    classification is open, and the conjectured relaxation to nu > d - 1 is
    deliberately NOT encoded here.
    """
    if family != "student_t":
        raise UnsupportedFamily(f"no closed-form classification for family {family!r}")
    s = sampler.lower()
    if s == "sps":
        return UNIFORMLY_ERGODIC if nu >= d else NOT_GEOMETRICALLY_ERGODIC
    if s == "sbps":
        return UNIFORMLY_ERGODIC if nu > d - 0.5 else UNKNOWN
    raise DomainError(f"unknown sampler kind {sampler!r} (expected 'sps' or 'sbps')")
