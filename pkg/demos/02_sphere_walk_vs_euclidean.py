"""Sphere random walk against the Euclidean baseline on a 100-dimensional
Gaussian: burn-in from a terrible start, acceptance rates and mixing.

Run:  python demos/02_sphere_walk_vs_euclidean.py
"""

import numpy as np

from stereomc import ProjectionConfig, RwmConfig, acf, gaussian, run_chain, transient_step_size

d = 100
target = gaussian(d)
cfg = ProjectionConfig.standard(d)

# Sphere walk from the worst possible start: the pole (the image of infinity).
sphere = run_chain(
    RwmConfig(target, cfg, h=transient_step_size(d), n_steps=4000, init="north_pole", seed=1), "sps"
)
band = 3 / np.sqrt(d)
hit = int(np.nonzero(np.abs(sphere.latitudes) <= band)[0][0])
print(f"sphere walk reaches the equatorial band |lat| <= {band:.2f} at iteration {hit}")
print(f"sphere walk acceptance rate: {sphere.accepted.mean():.3f}")

# Euclidean walk from (20, ..., 20) with the optimally scaled step.
rwm = run_chain(
    RwmConfig(target, cfg, h=2.38 / np.sqrt(d), n_steps=4000, init=np.full(d, 20.0), seed=1), "rwm"
)
r = np.linalg.norm(rwm.states, axis=1)
print(f"\nEuclidean walk |x| after 4000 steps: {r[-1]:.1f}  (stationary value ~ {np.sqrt(d):.1f})")
print(f"Euclidean walk acceptance rate: {rwm.accepted.mean():.3f}")

lag = 25
a_s = acf(sphere.states[hit:, 0], lag)
a_r = acf(rwm.states[:, 0], lag)
print(f"\nautocorrelation of coordinate 1 at lag {lag}: sphere {a_s[-1]:+.3f}, euclidean {a_r[-1]:+.3f}")
