"""Sliding-window monitoring of a delay-embedded cube.

Forty sites move on a plane in R^4 for the first half of the record and
scatter over the unit sphere afterwards.  With two delay blocks every window
is a point cloud in R^8; kappa_2 is high while the sites share a plane and
drops once they do not.

Run:  python3 demos/03_monitoring.py
"""
from kprofile import DelayConfig, monitor
from kprofile.synthetic import plane_to_cloud_cube

cube = plane_to_cloud_cube(T=16, P=40, v=4, seed=0)
series = monitor(cube, DelayConfig(ell=2, stride=2), range(1, 4), secant_cap=None)

print("start  kappa_1  kappa_2  kappa_3")
for t, prof in series.entries:
    print("%5d  %7.3f  %7.3f  %7.3f" % (t, prof.kappa(1), prof.kappa(2), prof.kappa(3)))
