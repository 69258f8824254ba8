"""Chain and path diagnostics: jumping distance, autocorrelation, batch-means ESS.

The continuous-time effective sample size follows the batch-means recipe: cut
the path into B batches, estimate the asymptotic variance from the batch
integrals X_i = sqrt(B/T) * integral of g over batch i, plug in the path
estimate of var_pi(g), and set ESS = T var_pi(g) / sigma_hat^2.  "ESS per
switch" divides by the number of simulated (non-horizon) events.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import DegenerateSeries, DomainError, EmptyTrace, InsufficientPath
from .sbps import EventPath, discretize_path
from .sps import Trace

DEFAULT_BATCHES = 50

Observable = Union[str, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class DiagnosticsReport:
    esjd: float
    esjd_per_dim: float
    acceptance_rate: float
    acf: np.ndarray
    ess: float
    ess_per_switch: float
    batch_count: int


def esjd(trace: Trace) -> float:
    """Mean squared jump per step; rejected steps contribute zero."""
    if len(trace.states) < 2:
        raise EmptyTrace("need at least one transition")
    diffs = np.diff(trace.states, axis=0)
    return float(np.mean(np.sum(diffs * diffs, axis=1)))


def esjd_per_coordinate(trace: Trace) -> np.ndarray:
    if len(trace.states) < 2:
        raise EmptyTrace("need at least one transition")
    diffs = np.diff(trace.states, axis=0)
    return np.mean(diffs * diffs, axis=0)


def acceptance_rate(trace: Trace) -> float:
    if trace.n_steps == 0:
        raise EmptyTrace("trace has no steps")
    return float(np.mean(trace.accepted))


def acf(series: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased autocovariance estimator normalized by lag zero; acf[0] = 1."""
    x = np.asarray(series, dtype=float)
    n = len(x)
    if n <= max_lag:
        raise DomainError(f"series of length {n} cannot support lag {max_lag}")
    x = x - x.mean()
    var = float(np.dot(x, x)) / n
    if var <= 1e-300 or not np.isfinite(var):
        raise DegenerateSeries("autocorrelation of a constant series is undefined")
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    for k in range(1, max_lag + 1):
        out[k] = float(np.dot(x[:-k], x[k:])) / (n * var)
    return out


def observable_values(states: np.ndarray, g: Observable) -> np.ndarray:
    """Evaluate a named or callable observable on (n, d) states.

    ``neg_log_density`` is the standardized radial statistic
    sqrt(d) (|Y|^2/d - 1), which is N(0, 2) under the standard Gaussian.
    """
    if callable(g):
        return np.asarray(g(states), dtype=float)
    if g == "first_coordinate":
        return states[:, 0]
    if g == "neg_log_density":
        d = states.shape[1]
        return np.sqrt(d) * (np.sum(states * states, axis=1) / d - 1.0)
    if g == "first_coordinate_squared":
        return states[:, 0] ** 2
    raise DomainError(f"unknown observable {g!r}")


def ess_batch_means(values: np.ndarray, total_time: float, batch_count: int = DEFAULT_BATCHES) -> float:
    """Batch-means ESS of a time-discretized series covering [0, total_time].

    Within-batch integrals use the midpoint (rectangle) rule: samples sit at
    cell midpoints, every batch covers exactly the same time span, and the
    quadrature weights sum to the covered time, which makes the estimator
    exactly invariant under affine maps of the observable.
    """
    x = np.asarray(values, dtype=float)
    n = len(x)
    if batch_count < 2:
        raise DomainError("need at least 2 batches")
    m = n // batch_count
    if m < 2:
        raise InsufficientPath(f"{n} samples cannot fill {batch_count} batches")
    dt = total_time / n
    used = m * batch_count
    x = x[:used]
    t_used = used * dt

    batch_int = dt * x.reshape(batch_count, m).sum(axis=1)
    xi = np.sqrt(batch_count / t_used) * batch_int
    sigma2 = float(np.var(xi, ddof=1))
    if sigma2 <= 1e-300:
        raise DegenerateSeries("asymptotic-variance estimate vanished (constant observable?)")

    mean_hat = float(x.mean())
    var_hat = float(np.mean(x * x) - mean_hat**2)
    if var_hat <= 1e-300:
        raise DegenerateSeries("plug-in variance vanished (constant observable?)")
    return float(t_used * var_hat / sigma2)


def batch_means_se(values: np.ndarray, total_time: float, batch_count: int = DEFAULT_BATCHES) -> tuple[float, float]:
    """(time-average, standard error) of a discretized path observable.

    The standard error comes from the batch-means asymptotic variance, so it
    is honest for autocorrelated series.
    """
    x = np.asarray(values, dtype=float)
    n = len(x)
    m = n // batch_count
    if m < 2:
        raise InsufficientPath(f"{n} samples cannot fill {batch_count} batches")
    used = m * batch_count
    dt = total_time / n
    t_used = used * dt
    batch_int = dt * x[:used].reshape(batch_count, m).sum(axis=1)
    xi = np.sqrt(batch_count / t_used) * batch_int
    sigma2 = float(np.var(xi, ddof=1))
    return float(x[:used].mean()), float(np.sqrt(sigma2 / t_used))


def ess_per_switch(
    path: EventPath,
    g: Observable,
    batch_count: int = DEFAULT_BATCHES,
    samples_per_unit: int = 5,
) -> tuple[float, float]:
    """(ESS, ESS / non-horizon event count) for an observable along a path."""
    trace = discretize_path(path, samples_per_unit)
    values = observable_values(trace.states, g)
    if np.any(~np.isfinite(values)):
        values = values[np.isfinite(values)]
    ess = ess_batch_means(values, path.total_time, batch_count)
    switches = path.n_switches
    if switches == 0:
        raise InsufficientPath("path has no events to normalize by")
    return ess, ess / switches


def report(
    trace: Trace,
    path: EventPath | None = None,
    observable: Observable = "first_coordinate",
    max_lag: int = 50,
    batch_count: int = DEFAULT_BATCHES,
) -> DiagnosticsReport:
    """Bundle the standard diagnostics for one run."""
    j = esjd(trace)
    acc = acceptance_rate(trace) if trace.source_times is None else 1.0
    series = observable_values(trace.states, observable)
    lag = min(max_lag, len(series) - 1)
    correl = acf(series, lag)
    if path is not None:
        ess, eps = ess_per_switch(path, observable, batch_count)
    else:
        # discrete chains: map the batch recipe onto unit-time steps
        ess = ess_batch_means(series, float(len(series)), batch_count)
        eps = np.nan
    return DiagnosticsReport(
        esjd=j,
        esjd_per_dim=j / trace.states.shape[1],
        acceptance_rate=acc,
        acf=correl,
        ess=ess,
        ess_per_switch=eps,
        batch_count=batch_count,
    )
