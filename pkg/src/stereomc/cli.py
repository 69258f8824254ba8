"""Experiment runner: single traces, ESJD sweeps, ESS-per-switch curves, tuning tables.

Subcommands
-----------
run         one or more configured chains/paths -> trace/events/diagnostics CSVs
sweep-esjd  efficiency curves (ESJD per dimension vs acceptance rate)
ess-curve   ESS per switch vs refresh rate for the sphere and Euclidean samplers
tuning      closed-form tuning table for scaled student-t marginals

Configs are JSON documents (see the shipped presets for the schema by
example); every run is exactly reproducible from the emitted resolved-config
snapshot plus the seed.  The output directory can be overridden with the
``STEREOMC_OUT`` environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import csvio, presets
from . import diagnostics as diag
from . import sbps as sbps_mod
from . import sps as sps_mod
from . import targets as targets_mod
from . import theory
from .errors import DomainError, SchemaError, StereoError
from .geometry import ProjectionConfig
from .rng import RngStream

DEFAULT_OBSERVABLES = ["first_coordinate"]


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------

def _fail(path: str, msg: str):
    raise SchemaError(f"{path}: {msg}")


def _get(d: dict, key: str, path: str, typ=None, required=False, default=None):
    if key not in d:
        if required:
            _fail(f"{path}.{key}", "missing required key")
        return default
    v = d[key]
    if typ is not None and not isinstance(v, typ):
        _fail(f"{path}.{key}", f"expected {getattr(typ, '__name__', typ)}, got {type(v).__name__}")
    return v


def _positive_int(d: dict, key: str, path: str, required=False, default=None):
    v = _get(d, key, path, int, required, default)
    if v is not None and (isinstance(v, bool) or v <= 0):
        _fail(f"{path}.{key}", f"expected positive integer, got {v!r}")
    return v


def _load_config(args) -> dict:
    if args.preset and args.config:
        raise SchemaError("give either --config or --preset, not both")
    if args.preset:
        try:
            cfg = presets.get_preset(args.preset)
        except KeyError as e:
            raise SchemaError(str(e)) from None
    elif args.config:
        try:
            with open(args.config, encoding="utf-8") as f:
                cfg = json.load(f)
        except FileNotFoundError:
            raise SchemaError(f"config file not found: {args.config}") from None
        except json.JSONDecodeError as e:
            raise SchemaError(f"{args.config}:{e.lineno}:{e.colno}: invalid JSON ({e.msg})") from None
    else:
        raise SchemaError("one of --config or --preset is required")
    if not isinstance(cfg, dict):
        raise SchemaError("config root must be an object")
    if args.seed is not None:
        cfg["seed"] = args.seed
    cfg.setdefault("seed", 0)
    return cfg


def _out_dir(args) -> str:
    out = os.environ.get("STEREOMC_OUT") or args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


def _resolve_lam(spec, d: int, path: str, seed: int):
    if spec is None:
        return None
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return np.full(d, float(spec))
    if isinstance(spec, list):
        arr = np.asarray(spec, dtype=float)
        if arr.shape != (d,):
            _fail(path, f"lam list must have length {d}")
        return arr
    if isinstance(spec, dict):
        kind = _get(spec, "kind", path, str, required=True)
        if kind != "log_uniform":
            _fail(f"{path}.kind", f"unknown lam generator {kind!r}")
        lo = float(_get(spec, "low", path, (int, float), required=True))
        hi = float(_get(spec, "high", path, (int, float), required=True))
        gen_seed = _get(spec, "seed", path, int, default=seed)
        gen = RngStream(gen_seed, 777).generator
        lam = np.exp(gen.uniform(np.log(lo), np.log(hi), d))
        if _get(spec, "normalize_sum_d", path, bool, default=False):
            lam *= d / lam.sum()
        return lam
    _fail(path, "lam must be a number, list or generator object")


def _resolve_rotation(spec, d: int, path: str, seed: int):
    if spec is None or spec == "identity":
        return None
    if spec == "random" or (isinstance(spec, dict) and spec.get("kind") == "random"):
        from scipy.stats import ortho_group

        rot_seed = spec.get("seed", seed) if isinstance(spec, dict) else seed
        return ortho_group.rvs(d, random_state=np.random.default_rng(rot_seed))
    if isinstance(spec, list):
        q = np.asarray(spec, dtype=float)
        if q.shape != (d, d):
            _fail(path, f"rotation must be {d}x{d}")
        return q
    _fail(path, "rotation must be 'identity', 'random', a matrix, or an object")


def build_target(spec: dict, seed: int, path: str = "target") -> targets_mod.TargetModel:
    family = _get(spec, "family", path, str, required=True)
    d = _positive_int(spec, "d", path, required=True)
    lam = _resolve_lam(spec.get("lam"), d, f"{path}.lam", seed)
    rot = _resolve_rotation(spec.get("rotation"), d, f"{path}.rotation", seed)
    if family == "gaussian":
        mean = spec.get("mean")
        if isinstance(mean, (int, float)) and not isinstance(mean, bool):
            mean = np.full(d, float(mean))
        elif isinstance(mean, list):
            mean = np.asarray(mean, dtype=float)
        elif mean is not None:
            _fail(f"{path}.mean", "expected number or list")
        return targets_mod.gaussian(d, mean=mean, lam=lam, rotation=rot)
    if family == "student_t":
        nu = _get(spec, "nu", path, (int, float), required=True)
        return targets_mod.student_t(d, nu=float(nu), lam=lam, rotation=rot)
    if family == "product_iid":
        m = _get(spec, "marginal", path, dict, required=True)
        kind = _get(m, "kind", f"{path}.marginal", str, required=True)
        if kind == "gaussian":
            marg = targets_mod.gaussian_marginal()
        elif kind == "student_t":
            nu = _get(m, "nu", f"{path}.marginal", (int, float), required=True)
            marg = targets_mod.student_t_marginal(float(nu))
        else:
            _fail(f"{path}.marginal.kind", f"unknown marginal {kind!r}")
        return targets_mod.product_iid(d, marg)
    _fail(f"{path}.family", f"unknown family {family!r}")


def build_projection(spec: dict | None, target: targets_mod.TargetModel, seed: int,
                     path: str = "projection") -> ProjectionConfig:
    d = target.dim
    spec = spec or {}
    mode = _get(spec, "mode", path, str, default="standard")
    r_spec = spec.get("R", "sqrt_d")
    lam = spec.get("lam")
    rot = spec.get("rotation")
    if lam == "target" or rot == "target":
        tl = target.params.get("lam")
        tq = target.params.get("rotation")
        if lam == "target":
            lam = None if tl is None else list(tl)
        if rot == "target":
            rot = None if tq is None else [list(row) for row in tq]
    lam_arr = _resolve_lam(lam, d, f"{path}.lam", seed) if mode == "generalized" else None
    rot_arr = _resolve_rotation(rot, d, f"{path}.rotation", seed) if mode == "generalized" else None
    if mode == "generalized" and lam_arr is None:
        lam_arr = np.ones(d)
    if isinstance(r_spec, str):
        if r_spec == "sqrt_d":
            radius = float(np.sqrt(d))
        elif r_spec == "sqrt_sum_lam":
            if lam_arr is None:
                _fail(f"{path}.R", "'sqrt_sum_lam' needs a generalized lam")
            radius = float(np.sqrt(lam_arr.sum()))
        else:
            _fail(f"{path}.R", f"unknown radius rule {r_spec!r}")
    else:
        radius = float(r_spec)
        if radius <= 0:
            _fail(f"{path}.R", "radius must be positive")
    if mode == "standard":
        return ProjectionConfig.standard(d, radius)
    if mode == "generalized":
        return ProjectionConfig.generalized(d, lam_arr, rot_arr, radius)
    _fail(f"{path}.mode", f"unknown mode {mode!r}")


def _resolve_step(sampler: dict, target: targets_mod.TargetModel, path: str) -> float:
    h = sampler.get("h")
    ell = sampler.get("ell")
    tun = sampler.get("tuning")
    given = sum(x is not None for x in (h, ell, tun))
    if given != 1:
        _fail(path, "give exactly one of h, ell, tuning")
    if h is not None:
        if not isinstance(h, (int, float)) or h <= 0:
            _fail(f"{path}.h", "expected positive number")
        return float(h)
    if ell is not None:
        return theory.h_from_ell(float(ell), target.dim)
    if tun != "auto_0.234":
        _fail(f"{path}.tuning", f"unknown tuning rule {tun!r}")
    if target.family == "product_iid":
        rough = target.marginal.roughness
    elif target.family == "gaussian":
        rough = 1.0
    else:
        _fail(f"{path}.tuning", "auto_0.234 needs a product_iid or gaussian target with known roughness")
    return theory.optimal_tuning(rough, target.dim).h  # raises DomainError for roughness 1


def _resolve_init(spec, d: int, path: str):
    if spec is None:
        return "uniform_sphere"
    if isinstance(spec, str):
        if spec not in ("north_pole", "south_pole", "uniform_sphere"):
            _fail(path, f"unknown init {spec!r}")
        return spec
    if isinstance(spec, dict):
        if "point" in spec:
            pt = np.asarray(spec["point"], dtype=float)
            if pt.shape != (d,):
                _fail(f"{path}.point", f"expected length-{d} vector")
            return pt
        if "point_fill" in spec:
            return np.full(d, float(spec["point_fill"]))
    _fail(path, "init must be a name or {'point': [...]} / {'point_fill': c}")


# ---------------------------------------------------------------------------
# run command
# ---------------------------------------------------------------------------

def _latitude_compare_columns(trace: sps_mod.Trace, h: float, d: int, seed: int) -> dict[str, np.ndarray]:
    """Observed latitude walk next to the closed-form approximation recursions."""
    n = len(trace.latitudes) - 1
    lat0 = float(trace.latitudes[0])
    gen = RngStream(seed, 4242).generator
    cols = {"observed": np.asarray(trace.latitudes[1:], dtype=float)}
    for kind in ("coordinate", "transient", "stationary"):
        z = np.clip(lat0, -1 + 1e-12, 1 - 1e-12)
        vals = np.empty(n)
        for t in range(n):
            z = theory.latitude_approx(kind, float(np.clip(z, -1 + 1e-9, 1 - 1e-9)), h, d, gen.standard_normal())
            vals[t] = z
        cols[kind] = vals
    return cols


def _execute_run(run_spec: dict, seed: int, index: int) -> dict:
    path = f"runs[{index}]"
    label = _get(run_spec, "label", path, str, default=f"run{index}")
    target = build_target(_get(run_spec, "target", path, dict, required=True), seed)
    proj = build_projection(run_spec.get("projection"), target, seed)
    sampler = _get(run_spec, "sampler", path, dict, required=True)
    kind = _get(sampler, "kind", f"{path}.sampler", str, required=True)
    dspec = run_spec.get("diagnostics") or {}
    observables = _get(dspec, "observables", f"{path}.diagnostics", list, default=list(DEFAULT_OBSERVABLES))
    max_lag = _positive_int(dspec, "max_lag", f"{path}.diagnostics", default=50)
    batch_count = _positive_int(dspec, "batch_count", f"{path}.diagnostics", default=diag.DEFAULT_BATCHES)
    spu = _positive_int(dspec, "samples_per_unit", f"{path}.diagnostics", default=5)
    out: dict = {"label": label, "diag_rows": []}

    if kind in ("sps", "gsps", "rsps", "rwm"):
        n_steps = _get(sampler, "n_steps", f"{path}.sampler", int, required=True)
        if n_steps < 0:
            _fail(f"{path}.sampler.n_steps", "must be nonnegative")
        h = _resolve_step(sampler, target, f"{path}.sampler")
        init = _resolve_init(sampler.get("init"), target.dim, f"{path}.sampler.init")
        cfg = sps_mod.RwmConfig(target, proj, h=h, n_steps=n_steps, init=init, seed=seed, stream_id=index)
        trace = sps_mod.run_chain(cfg, kind)
        out["trace"] = trace
        out["resolved_h"] = h
        # a pole start has no Euclidean image; diagnostics skip such leading rows
        finite = np.all(np.isfinite(trace.states), axis=1)
        first = int(np.argmax(finite)) if finite.any() else len(finite)
        stats_trace = sps_mod.Trace(
            trace.states[first:],
            trace.latitudes[first:],
            trace.accepted[first:] if first < len(trace.accepted) else trace.accepted[:0],
            trace.log_ratios[first:] if first < len(trace.log_ratios) else trace.log_ratios[:0],
            trace.meta,
        )
        if n_steps > 0 and len(stats_trace.states) > 1:
            for obs in observables:
                series = diag.observable_values(stats_trace.states, obs)
                lag = min(max_lag, len(series) - 1)
                row = {
                    "sampler": kind,
                    "observable": obs,
                    "esjd": diag.esjd(stats_trace),
                    "esjd_per_dim": diag.esjd(stats_trace) / target.dim,
                    "acceptance_rate": diag.acceptance_rate(stats_trace),
                    "ess": "",
                    "ess_per_switch": "",
                    "batch_count": batch_count,
                    "n_switches": "",
                    "seed": seed,
                }
                try:
                    row["ess"] = diag.ess_batch_means(series, float(len(series)), batch_count)
                except StereoError:
                    pass
                out["diag_rows"].append(row)
                out.setdefault("acf", {})[obs] = diag.acf(series, lag)
        if run_spec.get("latitude_compare"):
            out["latitude_compare"] = _latitude_compare_columns(trace, h, target.dim, seed)
        return out

    if kind in ("sbps", "bps"):
        refresh_rate = _get(sampler, "refresh_rate", f"{path}.sampler", (int, float), required=True)
        total_time = sampler.get("total_time")
        n_events = sampler.get("n_events")
        clock_spec = sampler.get("clock") or {}
        clock = sbps_mod.ClockSettings(
            points_per_period=clock_spec.get("points_per_period", 1024),
            tolerance=clock_spec.get("tolerance", 1e-8),
            safety=clock_spec.get("safety", 1.5),
            window=clock_spec.get("window", np.pi / 2),
            max_doublings=clock_spec.get("max_doublings", 2),
            method=clock_spec.get("method", "inversion"),
        )
        if kind == "sbps":
            conf = sbps_mod.SbpsConfig(
                target, proj, refresh_rate=float(refresh_rate), total_time=total_time,
                n_events=n_events, seed=seed, stream_id=index, clock=clock,
            )
            ep = sbps_mod.sbps_run(conf)
        else:
            ep = sbps_mod.bps_run(
                target, refresh_rate=float(refresh_rate), total_time=total_time,
                n_events=n_events, seed=seed, stream_id=index, clock=clock,
            )
        trace = sbps_mod.discretize_path(ep, spu)
        out["trace"] = trace
        out["events"] = ep
        for obs in observables:
            series = diag.observable_values(trace.states, obs)
            lag = min(max_lag, len(series) - 1)
            row = {
                "sampler": kind,
                "observable": obs,
                "esjd": "",
                "esjd_per_dim": "",
                "acceptance_rate": "",
                "batch_count": batch_count,
                "n_switches": ep.n_switches,
                "seed": seed,
                "ess": "",
                "ess_per_switch": "",
            }
            try:
                ess, eps = diag.ess_per_switch(ep, obs, batch_count, spu)
                row["ess"], row["ess_per_switch"] = ess, eps
            except StereoError:
                pass
            out["diag_rows"].append(row)
            out.setdefault("acf", {})[obs] = diag.acf(series, lag)
        return out

    _fail(f"{path}.sampler.kind", f"unknown sampler {kind!r}")


def cmd_run(cfg: dict, out_dir: str, threads: int) -> int:
    seed = int(cfg["seed"])
    runs = cfg.get("runs")
    if runs is None:
        if "target" not in cfg:
            _fail("runs", "missing (or give a single top-level run spec)")
        runs = [cfg]
    if not isinstance(runs, list) or not runs:
        _fail("runs", "expected a non-empty list")

    coords = (cfg.get("output") or {}).get("coords", "first")
    results = [_execute_run(spec, seed, i) for i, spec in enumerate(runs)]

    diag_rows = []
    summary_lines = []
    single = len(results) == 1
    for res in results:
        label = res["label"]
        suffix = "" if single else f"_{label}"
        csvio.write_trace(os.path.join(out_dir, f"trace{suffix}.csv"), res["trace"], coords=coords)
        if "events" in res:
            csvio.write_events(os.path.join(out_dir, f"events{suffix}.csv"), res["events"])
        if "acf" in res:
            first = next(iter(res["acf"].values()))
            csvio.write_acf(
                os.path.join(out_dir, f"acf{suffix}.csv"),
                dict(res["trace"].meta),
                np.arange(len(first)),
                res["acf"],
            )
        if "latitude_compare" in res:
            csvio.write_latitude_compare(
                os.path.join(out_dir, f"latitude_compare{suffix}.csv"), dict(res["trace"].meta), res["latitude_compare"]
            )
        diag_rows.extend(res["diag_rows"])
        meta = res["trace"].meta
        head = f"[{label}] {meta.get('sampler')} d={meta.get('d')} family={meta.get('family')}"
        for row in res["diag_rows"]:
            bits = [f"obs={row['observable']}"]
            if row["acceptance_rate"] != "":
                bits.append(f"accept={row['acceptance_rate']:.4f}")
            if row["esjd"] != "":
                bits.append(f"esjd={row['esjd']:.4g}")
            if row["ess"] != "":
                bits.append(f"ess={row['ess']:.4g}")
            if row["ess_per_switch"] != "":
                bits.append(f"ess/switch={row['ess_per_switch']:.4g}")
            summary_lines.append(head + " " + " ".join(bits))
        if not res["diag_rows"]:
            summary_lines.append(head + " (no steps)")

    csvio.write_diagnostics(os.path.join(out_dir, "diagnostics.csv"), diag_rows)
    with open(os.path.join(out_dir, "config_resolved.json"), "w", encoding="utf-8") as f:
        json.dump(cfg, f, indent=2, default=_json_default)
    summary = "\n".join(summary_lines) + "\n"
    with open(os.path.join(out_dir, "summary.txt"), "w", encoding="utf-8") as f:
        f.write(summary)
    sys.stdout.write(summary)
    return 0


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o)}")


# ---------------------------------------------------------------------------
# sweep-esjd command
# ---------------------------------------------------------------------------

def _sweep_point(payload: dict) -> dict:
    """Worker: one (R multiplier, ell) cell of the efficiency sweep."""
    target = build_target(payload["target"], payload["seed"])
    d = target.dim
    radius = payload["R"]
    proj = ProjectionConfig.standard(d, radius)
    h = theory.h_from_ell(payload["ell"], d)
    conf = sps_mod.RwmConfig(
        target, proj, h=h, n_steps=payload["n_steps"],
        init=_resolve_init(payload.get("init"), d, "sweep.init"),
        seed=payload["seed"], stream_id=payload["stream_id"],
    )
    trace = sps_mod.run_chain(conf, payload.get("kind", "sps"))
    burn = payload.get("burn_in", 0)
    states = trace.states[burn:]
    accepted = trace.accepted[burn:]
    finite = np.all(np.isfinite(states), axis=1)
    if not finite.all():
        first = int(np.argmax(finite))
        states, accepted = states[first:], accepted[first:]
    diffs = np.diff(states, axis=0)
    esjd = float(np.mean(np.sum(diffs * diffs, axis=1)))
    return {
        "R_multiplier": payload["R_multiplier"],
        "R": radius,
        "h": h,
        "ell": payload["ell"],
        "acceptance_rate": float(np.mean(accepted)),
        "esjd": esjd,
        "esjd_per_dim": esjd / d,
        "n_steps": payload["n_steps"],
        "seed": payload["seed"],
    }


def cmd_sweep_esjd(cfg: dict, out_dir: str, threads: int) -> int:
    seed = int(cfg["seed"])
    target_spec = _get(cfg, "target", "config", dict, required=True)
    sweep = _get(cfg, "sweep", "config", dict, required=True)
    sampler = cfg.get("sampler") or {}
    d = _positive_int(target_spec, "d", "target", required=True)
    mults = _get(sweep, "R_multipliers", "sweep", list, default=[1.0])
    n_steps = _positive_int(sweep, "n_steps", "sweep", default=4000)
    burn_in = _get(sweep, "burn_in", "sweep", int, default=0)

    ell_values = sweep.get("ell_grid")
    if ell_values is None:
        n_points = _positive_int(sweep, "n_points", "sweep", default=25)
        lo, hi = _get(sweep, "ell_range", "sweep", list, default=[0.25, 12.0])
        hi = min(float(hi), 0.999 * np.sqrt(2 * d))
        ell_values = list(np.geomspace(float(lo), hi, n_points))
    payloads = []
    for mult in mults:
        for j, ell in enumerate(ell_values):
            payloads.append(
                {
                    "target": target_spec,
                    "R": float(mult) * float(np.sqrt(d)),
                    "R_multiplier": float(mult),
                    "ell": float(ell),
                    "n_steps": n_steps,
                    "burn_in": burn_in,
                    "seed": seed,
                    "stream_id": 0,  # common random numbers across the grid
                    "init": sampler.get("init"),
                    "kind": sampler.get("kind", "sps"),
                }
            )
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(_sweep_point, payloads))
    else:
        rows = [_sweep_point(p) for p in payloads]

    csvio.write_sweep(os.path.join(out_dir, "efficiency.csv"), {"seed": seed, "d": d}, rows)
    with open(os.path.join(out_dir, "config_resolved.json"), "w", encoding="utf-8") as f:
        json.dump(cfg, f, indent=2, default=_json_default)
    for mult in mults:
        sub = [r for r in rows if r["R_multiplier"] == mult]
        if not sub:
            continue
        best = max(sub, key=lambda r: r["esjd"])
        print(
            f"R = {mult:g} sqrt(d): max ESJD/dim {best['esjd_per_dim']:.4g} at acceptance "
            f"{best['acceptance_rate']:.3f}; acceptance range "
            f"[{min(r['acceptance_rate'] for r in sub):.3f}, {max(r['acceptance_rate'] for r in sub):.3f}]"
        )
    return 0


# ---------------------------------------------------------------------------
# ess-curve command
# ---------------------------------------------------------------------------

def _ess_cell(payload: dict) -> list[dict]:
    target = build_target(payload["target"], payload["seed"])
    proj = ProjectionConfig.standard(target.dim)
    rate = payload["refresh_rate"]
    if payload["sampler"] == "sbps":
        conf = sbps_mod.SbpsConfig(
            target, proj, refresh_rate=rate, n_events=payload["n_events"],
            seed=payload["seed"], stream_id=payload["stream_id"],
        )
        ep = sbps_mod.sbps_run(conf)
    else:
        ep = sbps_mod.bps_run(
            target, refresh_rate=rate, n_events=payload["n_events"],
            seed=payload["seed"], stream_id=payload["stream_id"],
        )
    switches = ep.n_switches
    frac = ep.counts.get("refresh", 0) / max(switches, 1)
    out = []
    for obs in payload["observables"]:
        ess, eps = diag.ess_per_switch(ep, obs, payload["batch_count"], payload["samples_per_unit"])
        out.append(
            {
                "sampler": payload["sampler"],
                "refresh_rate": rate,
                "observable": obs,
                "ess": ess,
                "ess_per_switch": eps,
                "refresh_fraction": frac,
                "n_switches": switches,
                "total_time": ep.total_time,
                "seed_index": payload["seed_index"],
            }
        )
    return out


def cmd_ess_curve(cfg: dict, out_dir: str, threads: int) -> int:
    seed = int(cfg["seed"])
    target_spec = _get(cfg, "target", "config", dict, required=True)
    spec = _get(cfg, "ess_curve", "config", dict, required=True)
    rates = _get(spec, "refresh_rates", "ess_curve", list, required=True)
    samplers = _get(spec, "samplers", "ess_curve", list, default=["sbps", "bps"])
    n_events = _positive_int(spec, "n_events", "ess_curve", default=1000)
    n_seeds = _positive_int(spec, "n_seeds", "ess_curve", default=1)
    observables = _get(spec, "observables", "ess_curve", list, default=list(DEFAULT_OBSERVABLES))
    spu = _positive_int(spec, "samples_per_unit", "ess_curve", default=5)
    batch_count = _positive_int(spec, "batch_count", "ess_curve", default=diag.DEFAULT_BATCHES)

    payloads = []
    sid = 0
    for sampler in samplers:
        for rate in rates:
            for s in range(n_seeds):
                payloads.append(
                    {
                        "target": target_spec,
                        "sampler": sampler,
                        "refresh_rate": float(rate),
                        "n_events": n_events,
                        "observables": observables,
                        "samples_per_unit": spu,
                        "batch_count": batch_count,
                        "seed": seed,
                        "seed_index": s,
                        "stream_id": sid,
                    }
                )
                sid += 1
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            cell_rows = list(ex.map(_ess_cell, payloads))
    else:
        cell_rows = [_ess_cell(p) for p in payloads]

    flat = [r for rows in cell_rows for r in rows]
    agg = []
    for sampler in samplers:
        for rate in rates:
            for obs in observables:
                sub = [
                    r for r in flat
                    if r["sampler"] == sampler and r["refresh_rate"] == float(rate) and r["observable"] == obs
                ]
                if not sub:
                    continue
                agg.append(
                    {
                        "sampler": sampler,
                        "refresh_rate": float(rate),
                        "observable": obs,
                        "ess": float(np.median([r["ess"] for r in sub])),
                        "ess_per_switch": float(np.median([r["ess_per_switch"] for r in sub])),
                        "refresh_fraction": float(np.median([r["refresh_fraction"] for r in sub])),
                        "n_switches": int(np.median([r["n_switches"] for r in sub])),
                        "total_time": float(np.median([r["total_time"] for r in sub])),
                        "n_seeds": n_seeds,
                    }
                )
    csvio.write_ess_curve(
        os.path.join(out_dir, "ess_curve.csv"),
        {"seed": seed, "n_events": n_events, "samples_per_unit": spu, "batch_count": batch_count},
        agg,
    )
    with open(os.path.join(out_dir, "config_resolved.json"), "w", encoding="utf-8") as f:
        json.dump(cfg, f, indent=2, default=_json_default)
    for row in agg:
        print(
            f"{row['sampler']:>4} rate={row['refresh_rate']:<4g} {row['observable']:<24} "
            f"ess/switch={row['ess_per_switch']:.4g} refresh%={100 * row['refresh_fraction']:.1f}"
        )
    return 0


# ---------------------------------------------------------------------------
# tuning command
# ---------------------------------------------------------------------------

def cmd_tuning(cfg: dict, out_dir: str) -> int:
    spec = _get(cfg, "tuning", "config", dict, required=True)
    nus = _get(spec, "nu", "tuning", list, required=True)
    d = _positive_int(spec, "d", "tuning", default=100)
    marginal = _get(spec, "marginal", "tuning", str, default="student_t")
    if marginal == "gaussian":
        raise DomainError(
            "the Gaussian marginal has roughness exactly 1: its acceptance tends to 1 at radius "
            "sqrt(d) and the 0.234 tuning rule does not apply"
        )
    rows = []
    print(f"{'nu':>6} {'C_nu':>9} {'C/(C-1)':>9} {'ell':>8} {'h':>12} {'accept':>8} {'esjd':>8} {'speed':>8}")
    for nu in nus:
        c = targets_mod.c_nu(float(nu))
        rep = theory.optimal_tuning(c, d)
        rows.append(
            {
                "nu": float(nu),
                "c_nu": c,
                "c_nu_ratio": targets_mod.c_nu_ratio(float(nu)),
                "ell": rep.ell,
                "ell_numeric": rep.ell_numeric,
                "h": rep.h,
                "predicted_acceptance": rep.predicted_acceptance,
                "predicted_esjd": rep.predicted_esjd,
                "predicted_esjd_numeric": rep.predicted_esjd_numeric,
                "diffusion_speed": rep.diffusion_speed,
            }
        )
        print(
            f"{nu:>6g} {c:>9.4f} {targets_mod.c_nu_ratio(float(nu)):>9.4f} {rep.ell:>8.4f} "
            f"{rep.h:>12.4e} {rep.predicted_acceptance:>8.4f} {rep.predicted_esjd:>8.4f} "
            f"{rep.diffusion_speed:>8.4f}"
        )
    csvio.write_tuning(os.path.join(out_dir, "tuning.csv"), {"d": d}, rows)

    gk_spec = spec.get("gk_curve")
    if gk_spec:
        n_z = _positive_int(gk_spec, "n_z", "tuning.gk_curve", default=401)
        zlim = float(gk_spec.get("z_limit", 0.999))
        z = np.linspace(-zlim, zlim, n_z)
        curves = {}
        for nu in nus:
            k = float(nu) / d
            curves[f"g_{k:g}"] = targets_mod.g_k(k, z)
        curves["g_inf"] = targets_mod.g_k(np.inf, z)
        csvio.write_gk(os.path.join(out_dir, "gk.csv"), {"d": d}, z, curves)
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stereomc", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("run", "sweep-esjd", "ess-curve", "tuning"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--preset", help=f"named preset: {', '.join(presets.preset_names())}")
        sp.add_argument("--out", help="output directory (env STEREOMC_OUT overrides)")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        out_dir = _out_dir(args)
        if args.command == "run":
            return cmd_run(cfg, out_dir, args.threads)
        if args.command == "sweep-esjd":
            return cmd_sweep_esjd(cfg, out_dir, args.threads)
        if args.command == "ess-curve":
            return cmd_ess_curve(cfg, out_dir, args.threads)
        if args.command == "tuning":
            return cmd_tuning(cfg, out_dir)
        raise SchemaError(f"unknown command {args.command}")
    except SchemaError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except StereoError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
