"""How orthogonal is BA for the centroid and covariance orthogonalizers?

Reproduces the shape of the small singular-value / condition-number table:
n = 10 with two sources of tail exponent 2.1 and eight of exponent 6.

Run: python demos/orthogonalization_table.py [seeds]
"""
import sys
import time

import numpy as np

from htica.orthogonalize import diagnostics, orthogonalize_centroid, orthogonalize_covariance
from htica.sampling import IcaInstance, generate_ica_data

seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 3
eta = (6.0,) * 8 + (2.1,) * 2

print(f"{'N':>6} {'method':>10} {'sigma_min':>10} {'cond':>10}")
for N in (1000, 11000):
    rows = {"centroid": [], "covariance": []}
    t0 = time.perf_counter()
    for seed in range(seeds):
        inst = IcaInstance.random(eta, seed=seed)
        X = generate_ica_data(inst, N)
        # above a few thousand rows the centroid body is built on a strided subset
        cen = orthogonalize_centroid(X, body_size=1000)
        cov = orthogonalize_covariance(X)
        for name, orth in (("centroid", cen), ("covariance", cov)):
            d = diagnostics(orth, inst.A)
            rows[name].append((d.sigma_min_normalized, d.condition_number))
    for name, vals in rows.items():
        s, c = np.median(np.array(vals), axis=0)
        print(f"{N:>6} {name:>10} {s:>10.4f} {c:>10.2f}")
    print(f"        ({time.perf_counter() - t0:.1f} s for {seeds} seeds)")
