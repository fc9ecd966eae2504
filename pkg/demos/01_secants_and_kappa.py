"""Secants, kappa and the kappa-profile on small point clouds.

Run:  python3 demos/01_secants_and_kappa.py
"""
import numpy as np

from kprofile import (DataMatrix, SapConfig, SecantSet, build_secants, geodesic_distance,
                      kappa_profile, min_projected_norm, pca_basis, sap_optimize)

# Three unit directions 60 degrees apart, taken as the whole secant set.
dirs = np.array([[1.0, 0.0], [0.5, np.sqrt(3) / 2], [-0.5, np.sqrt(3) / 2]])
S = SecantSet(dirs)

# kappa of a basis is the worst projected secant norm; the y-axis sees the
# first direction edge-on
print("kappa of the y-axis:", min_projected_norm(S, np.array([[0.0], [1.0]]))[0])

# SAP looks for the line that keeps all three directions visible; the best
# achievable is 1/2
best = sap_optimize(S, 1, SapConfig(candidates=64, restarts=8))
print("SAP kappa_1: %.4f" % best.kappa)

# A tilted circle in R^3: every line folds it (kappa_1 near 0), its own plane
# sees it isometrically (kappa_2 = 1).
t = np.linspace(0, 2 * np.pi, 120, endpoint=False)
Q = np.linalg.qr(np.random.default_rng(0).standard_normal((3, 3)))[0]
circle = DataMatrix(np.column_stack([np.cos(t), np.sin(t), np.zeros_like(t)]) @ Q.T, label="circle")
prof = kappa_profile(build_secants(circle), range(1, 4), label="circle")
print("circle:", " ".join("kappa_%d=%.3f" % (r["m"], r["kappa"]) for r in prof.rows()))

# A helix climbs monotonically, so a line along its axis already separates
# its points, though with heavy distortion.
h = np.linspace(0, 4 * np.pi, 200)
helix = DataMatrix(np.column_stack([np.cos(h), np.sin(h), 0.3 * h]), label="helix")
prof = kappa_profile(build_secants(helix), range(1, 4), label="helix")
print("helix: ", " ".join("kappa_%d=%.3f" % (r["m"], r["kappa"]) for r in prof.rows()))
print("good dimension (kappa >= 0.2):", prof.good_dimension())

# Compare the SAP plane with the top-2 PCA plane of the helix
pca, spectrum = pca_basis(helix, 2)
print("singular values:", np.round(spectrum.values, 3))
print("PCA vs SAP plane, geodesic distance: %.3f" % geodesic_distance(pca, prof.bases[2]))
