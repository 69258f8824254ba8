"""Continuous-time runs: great-circle bouncy paths, the event mix, and the
effective sample size per simulated event.

Run:  python demos/04_bouncy_particle_paths.py
"""

import numpy as np

from stereomc import ProjectionConfig, SbpsConfig, bps_run, discretize_path, ess_per_switch, gaussian, sbps_run, student_t

d = 100
cfg = ProjectionConfig.standard(d)

# Heavy-tailed matched target: the transported density is flat, so the clock
# never rings and the path is pure rotation plus refreshments.
flat = sbps_run(SbpsConfig(student_t(d, nu=d), cfg, refresh_rate=0.2, n_events=300, seed=3))
print("matched student-t:", flat.counts)

# Gaussian target: bounces and refreshments mix; compare the sphere process
# with the straight-line baseline started at stationarity.
sphere = sbps_run(SbpsConfig(gaussian(d), cfg, refresh_rate=0.2, n_events=1000, seed=4))
euclid = bps_run(gaussian(d), refresh_rate=0.2, n_events=1000, seed=4)
print("sphere  :", sphere.counts, f" T = {sphere.total_time:.0f}")
print("euclid  :", euclid.counts, f" T = {euclid.total_time:.0f}")

for name, path in (("sphere", sphere), ("euclid", euclid)):
    ess, eps = ess_per_switch(path, "first_coordinate")
    print(f"{name}: ESS = {ess:7.1f}   ESS per switch = {eps:.3f}")

tr = discretize_path(sphere, samples_per_unit=5)
print(f"\ndiscretized sphere path: {len(tr.states)} samples, coordinate-1 variance {tr.states[:, 0].var():.3f}")
