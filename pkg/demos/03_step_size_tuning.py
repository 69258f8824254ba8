"""Closed-form step tuning against a brute-force sweep.

For a product target whose marginal has roughness E, the limiting expected
squared jumping distance is 2 ell^2 Phi(-(ell/2) sqrt(E-1)); its maximum sits
near ell = 2.38/sqrt(E-1) at acceptance ~0.234.  The demo measures the sweep
at d = 150 and lays the theory next to it.

Run:  python demos/03_step_size_tuning.py
"""

import numpy as np

from stereomc import (
    ProjectionConfig,
    RwmConfig,
    RngStream,
    esjd,
    esjd_limit,
    h_from_ell,
    optimal_tuning,
    product_iid,
    run_chain,
    scale_mixture_marginal,
)

E = 1.75
d = 150
marg = scale_mixture_marginal(E)
target = product_iid(d, marg)
cfg = ProjectionConfig.standard(d)

report = optimal_tuning(E, d)
print(f"roughness E = {E}:  ell_hat = {report.ell:.3f}  h_hat = {report.h:.5f}")
print(f"predicted acceptance {report.predicted_acceptance:.3f}, predicted max ESJD {report.predicted_esjd:.3f}\n")

print(f"{'ell':>6} {'accept':>8} {'ESJD':>8} {'limit':>8}")
for ell in [0.8, 1.5, 2.4, report.ell, 3.6, 5.0]:
    x0 = marg.sampler(RngStream(7, 0).generator, d)
    tr = run_chain(RwmConfig(target, cfg, h=h_from_ell(ell, d), n_steps=15_000, init=x0, seed=7), "sps")
    print(f"{ell:6.2f} {tr.accepted.mean():8.3f} {esjd(tr):8.3f} {esjd_limit(ell, E):8.3f}")
