import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kprofile import (DelayConfig, InvalidConfig, InvalidInput, SapConfig, TimeSeriesCube,
                      WindowOutOfRange, build_secants, delay_embed, kappa_profile, monitor, takens_min_length)
from kprofile.delay import window_seed, window_starts
from kprofile.synthetic import plane_to_cloud_cube


def test_weather_shape():
    cube = TimeSeriesCube(np.random.default_rng(0).standard_normal((25, 30, 9)))
    d = delay_embed(cube, 0, DelayConfig(ell=19))
    assert (d.N, d.n) == (30, 171)


def test_direct_concatenation():
    s = np.array([[1, 10], [2, 20], [3, 30], [4, 40], [5, 50]], dtype=float)
    d = delay_embed(TimeSeriesCube(s), 0, DelayConfig(ell=3))
    assert np.array_equal(d.points, [[1, 2, 3], [10, 20, 30]])


def test_ell_one_is_time_slice():
    cube = TimeSeriesCube(np.random.default_rng(1).standard_normal((6, 4, 3)))
    assert np.array_equal(delay_embed(cube, 2, DelayConfig(ell=1)).points, cube.samples[2])


def test_out_of_range():
    cube = TimeSeriesCube(np.zeros((5, 2, 1)))
    with pytest.raises(WindowOutOfRange):
        delay_embed(cube, 3, DelayConfig(ell=3))
    with pytest.raises(WindowOutOfRange):
        delay_embed(cube, -1, DelayConfig(ell=1))
    with pytest.raises(WindowOutOfRange):
        window_starts(2, DelayConfig(ell=3))
    with pytest.raises(InvalidConfig):
        DelayConfig(ell=0)


def test_single_site_window_is_not_a_point_cloud():
    with pytest.raises(InvalidInput):
        delay_embed(TimeSeriesCube(np.zeros((4, 1, 2))), 0, DelayConfig(ell=2))


def test_takens():
    assert [takens_min_length(m) for m in (0, 1, 3)] == [1, 3, 7]


def test_window_seeds_distinct_and_stable():
    seeds = [window_seed(5, t) for t in range(50)]
    assert len(set(seeds)) == 50
    assert seeds == [window_seed(5, t) for t in range(50)]


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 12), st.integers(2, 4), st.integers(1, 3), st.data())
def test_overlap_identity(T, P, v, data):
    ell = data.draw(st.integers(1, T - 1))
    t = data.draw(st.integers(1, T - ell))
    rng = np.random.default_rng(data.draw(st.integers(0, 1000)))
    cube = TimeSeriesCube(rng.standard_normal((T, P, v)))
    short = delay_embed(cube, t, DelayConfig(ell)).points
    long = delay_embed(cube, t - 1, DelayConfig(ell + 1)).points
    assert short.shape[1] == v * ell
    assert np.array_equal(short, long[:, v:])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 10), st.integers(1, 10), st.integers(1, 6))
def test_window_starts_in_range(T, ell, stride):
    if T < ell:
        return
    starts = list(window_starts(T, DelayConfig(ell, stride)))
    assert starts[0] == 0 and all(t + ell <= T for t in starts)
    assert starts[-1] + stride + ell > T


def test_constant_cube_gives_identical_profiles():
    rng = np.random.default_rng(2)
    cube = TimeSeriesCube(np.repeat(rng.standard_normal((1, 12, 2)), 6, axis=0))
    series = monitor(cube, DelayConfig(ell=2, stride=1), range(1, 3), secant_cap=None)
    ks = np.array([p.kappas for _, p in series.entries])
    assert np.all(ks == ks[0])
    assert list(series.starts) == [0, 1, 2, 3, 4]


def test_monitor_stride_equal_to_window_count():
    cube = TimeSeriesCube(np.random.default_rng(3).standard_normal((10, 8, 1)))
    cfg = DelayConfig(ell=3, stride=len(window_starts(10, DelayConfig(3))))
    series = monitor(cube, cfg, range(1, 2), secant_cap=None)
    assert list(series.starts) == [0]


def test_transition_drops_kappa2():
    cube = plane_to_cloud_cube(T=16, P=40, v=4, seed=0)
    series = monitor(cube, DelayConfig(ell=2, stride=2), range(1, 3), secant_cap=None)
    k2 = series.kappa_series(2)
    before, after = k2[series.starts + 2 <= 8], k2[series.starts >= 8]
    assert before.min() - after.max() >= 0.1


def test_parallel_matches_sequential():
    cube = plane_to_cloud_cube(T=10, P=15, v=3, seed=1)
    cfg = DelayConfig(ell=2, stride=2)
    a = monitor(cube, cfg, range(1, 3), warm_start=False, secant_cap=50, seed=4)
    b = monitor(cube, cfg, range(1, 3), warm_start=False, secant_cap=50, seed=4, threads=3)
    assert [p.kappas.tolist() for _, p in a.entries] == [p.kappas.tolist() for _, p in b.entries]
    assert a.rows() == b.rows()


def test_full_secant_check_of_transition_windows():
    # the windows on each side, recomputed directly with all secants
    cube = plane_to_cloud_cube(T=16, P=40, v=4, seed=0)
    cfg = SapConfig()
    plane = kappa_profile(build_secants(delay_embed(cube, 0, DelayConfig(2))), [2], cfg)
    cloud = kappa_profile(build_secants(delay_embed(cube, 12, DelayConfig(2))), [2], cfg)
    assert plane.kappa(2) > 0.99
    assert cloud.kappa(2) < 0.5
