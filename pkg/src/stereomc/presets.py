"""Named experiment configurations shipped with the package.

Each preset is a complete config document, so the desk-scale studies are
one-command replications: ``stereomc run --preset sps-vs-rwm-gauss``.
"""

from __future__ import annotations

import copy

_PRESETS: dict[str, dict] = {
    # SPS from the north pole against tuned random-walk Metropolis started far
    # out at (c, ..., c); standard Gaussian, d = 100.
    "sps-vs-rwm-gauss": {
        "seed": 20240601,
        "runs": [
            {
                "label": "sps",
                "target": {"family": "gaussian", "d": 100},
                "sampler": {"kind": "sps", "h": 0.2, "n_steps": 5000, "init": "north_pole"},
                "diagnostics": {"observables": ["first_coordinate", "neg_log_density"], "max_lag": 50},
            },
            {
                "label": "rwm",
                "target": {"family": "gaussian", "d": 100},
                "sampler": {"kind": "rwm", "h": 0.238, "n_steps": 5000, "init": {"point_fill": 20.0}},
                "diagnostics": {"observables": ["first_coordinate", "neg_log_density"], "max_lag": 50},
            },
        ],
    },
    # Heavy-tailed trace study: SBPS on student-t with nu = d = 100, low
    # refresh rate, 1000 events, 5 samples per unit time.
    "sbps-student-trace": {
        "seed": 20240602,
        "runs": [
            {
                "label": "sbps_t",
                "target": {"family": "student_t", "d": 100, "nu": 100},
                "sampler": {"kind": "sbps", "refresh_rate": 0.2, "n_events": 1000},
                "diagnostics": {
                    "observables": ["first_coordinate", "neg_log_density", "first_coordinate_squared"],
                    "max_lag": 100,
                    "samples_per_unit": 5,
                },
            }
        ],
    },
    "sbps-gauss-trace": {
        "seed": 20240603,
        "runs": [
            {
                "label": "sbps_gauss",
                "target": {"family": "gaussian", "d": 100},
                "sampler": {"kind": "sbps", "refresh_rate": 0.2, "n_events": 1000},
                "diagnostics": {
                    "observables": ["first_coordinate", "neg_log_density", "first_coordinate_squared"],
                    "max_lag": 100,
                    "samples_per_unit": 5,
                },
            }
        ],
    },
    # Efficiency curves for the radius study: student-t nu = d = 100 under
    # radius multipliers on either side of sqrt(d).
    "esjd-sweep-student-R": {
        "seed": 20240604,
        "target": {"family": "student_t", "d": 100, "nu": 100},
        "sampler": {"kind": "sps", "init": "uniform_sphere"},
        "sweep": {
            "R_multipliers": [0.5, 0.9, 1.1, 2.0],
            "n_points": 25,
            "ell_range": [0.25, 12.0],
            "n_steps": 4000,
            "burn_in": 500,
        },
    },
    # ESS-per-switch curves against the Euclidean baseline, Gaussian d = 100.
    "ess-curve-gauss": {
        "seed": 20240605,
        "target": {"family": "gaussian", "d": 100},
        "ess_curve": {
            "refresh_rates": [0.2, 0.5, 1.0, 2.0],
            "samplers": ["sbps", "bps"],
            "n_events": 1000,
            "n_seeds": 5,
            "observables": ["first_coordinate", "neg_log_density", "first_coordinate_squared"],
            "samples_per_unit": 5,
            "batch_count": 50,
        },
    },
    # Proposal-latitude walk from both poles with its closed-form
    # approximations, h = 0.1, d = 100.
    "latitude-approx": {
        "seed": 20240606,
        "runs": [
            {
                "label": "from_north",
                "target": {"family": "gaussian", "d": 100},
                "sampler": {"kind": "sps", "h": 0.1, "n_steps": 200, "init": "north_pole"},
                "diagnostics": {"observables": ["first_coordinate"], "max_lag": 20},
                "latitude_compare": True,
            },
            {
                "label": "from_south",
                "target": {"family": "gaussian", "d": 100},
                "sampler": {"kind": "sps", "h": 0.1, "n_steps": 200, "init": "south_pole"},
                "diagnostics": {"observables": ["first_coordinate"], "max_lag": 20},
                "latitude_compare": True,
            },
        ],
    },
    # Closed-form tuning table for the scaled student-t marginals.
    "tuning-table": {
        "seed": 0,
        "tuning": {"nu": [3, 5, 10, 20, 50, 100], "d": 100, "gk_curve": {"n_z": 401, "z_limit": 0.999}},
    },
}


def preset_names() -> list[str]:
    return sorted(_PRESETS)


def get_preset(name: str) -> dict:
    if name not in _PRESETS:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return copy.deepcopy(_PRESETS[name])
