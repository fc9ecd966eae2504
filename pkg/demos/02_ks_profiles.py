"""kappa-profiles of Kuramoto-Sivashinsky data for three values of alpha.

Each data set is 2000 states in R^32 covering about one time unit from the
default initial state; secants are capped at 5e5.  Takes several minutes.

Run:  python3 demos/02_ks_profiles.py [out_dir]
"""
import sys
from pathlib import Path

from kprofile import DataMatrix, profile_data
from kprofile.ks import KsConfig, default_dt, ks_simulate
from kprofile.svg import line_plot

out = Path(sys.argv[1] if len(sys.argv) > 1 else ".")
out.mkdir(parents=True, exist_ok=True)

curves = []
for alpha in (19.0, 54.0, 117.5):
    cfg = KsConfig(alpha=alpha, transient_steps=0, n_samples=2000,
                   sample_stride=max(1, round(1 / (2000 * default_dt(alpha)))))
    data = DataMatrix(ks_simulate(cfg).states, label=f"alpha={alpha:g}")
    prof = profile_data(data, range(1, 11), max_secants=500_000, seed=0)
    print(data.label, "good dimension:", prof.good_dimension())
    print("  kappa:", " ".join("%.3f" % k for k in prof.kappas))
    curves.append((data.label, prof.dims, prof.kappas))

# the dashed line marks the kappa >= 0.2 rule of thumb
(out / "ks_profiles.svg").write_text(line_plot(curves, title="KS kappa-profiles", xlabel="m",
                                               ylabel="kappa", hline=0.2, ylim=(0, 1)))
print("wrote", out / "ks_profiles.svg")
