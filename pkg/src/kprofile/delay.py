"""Time-delay embeddings of gridded time series and sliding-window monitoring."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidConfig, InvalidInput, WindowOutOfRange
from .sap import KappaProfile, SapConfig, kappa_profile
from .secants import DEFAULT_MAX_SECANTS, DataMatrix, build_secants


@dataclass(frozen=True)
class TimeSeriesCube:
    """``samples[t, p, :]`` is the variable vector of site ``p`` at step ``t``."""

    samples: np.ndarray
    dt_label: str = ""

    def __post_init__(self):
        a = np.array(self.samples, dtype=float)
        if a.ndim == 2:
            a = a[:, :, None]
        if a.ndim != 3 or min(a.shape) < 1:
            raise InvalidInput("samples must be a non-empty T x P x v array")
        if not np.all(np.isfinite(a)):
            raise InvalidInput("samples contain NaN or Inf")
        a.setflags(write=False)
        object.__setattr__(self, "samples", a)

    @property
    def T(self) -> int:
        return self.samples.shape[0]

    @property
    def P(self) -> int:
        return self.samples.shape[1]

    @property
    def v(self) -> int:
        return self.samples.shape[2]


@dataclass(frozen=True)
class DelayConfig:
    """``ell`` delay blocks per point (the undelayed block included); window hop ``stride``."""

    ell: int
    stride: int = 1

    def __post_init__(self):
        if self.ell < 1 or self.stride < 1:
            raise InvalidConfig("ell and stride must be >= 1")


@dataclass(frozen=True)
class ProfileSeries:
    entries: tuple  # (t_start, KappaProfile) pairs

    def __post_init__(self):
        ts = [t for t, _ in self.entries]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise InvalidInput("window starts must be strictly increasing")

    @property
    def starts(self) -> np.ndarray:
        return np.array([t for t, _ in self.entries], dtype=int)

    def kappa_series(self, m: int) -> np.ndarray:
        return np.array([p.kappa(m) for _, p in self.entries])

    def rows(self) -> list[dict]:
        return [dict(t_start=t, **row) for t, p in self.entries for row in p.rows()]


def delay_embed(cube: TimeSeriesCube, t: int, config: DelayConfig) -> DataMatrix:
    """One point per site: its variable vectors at steps ``t .. t+ell-1``, concatenated."""
    if t < 0 or t + config.ell > cube.T:
        raise WindowOutOfRange(f"window [{t}, {t + config.ell}) does not fit in {cube.T} steps")
    block = cube.samples[t:t + config.ell]  # ell x P x v
    points = np.transpose(block, (1, 0, 2)).reshape(cube.P, config.ell * cube.v)
    return DataMatrix(points, label=f"{cube.dt_label}t={t}")


def takens_min_length(manifold_dim: int) -> int:
    """Delay length ``2m + 1`` that generically embeds an ``m``-manifold."""
    if manifold_dim < 0:
        raise InvalidInput("manifold dimension must be >= 0")
    return 2 * manifold_dim + 1


def window_starts(T: int, config: DelayConfig) -> range:
    if T < config.ell:
        raise WindowOutOfRange(f"series of {T} steps is shorter than one window ({config.ell})")
    return range(0, T - config.ell + 1, config.stride)


def window_seed(seed: int, t: int) -> int:
    """Subsampling seed for the window starting at ``t``."""
    return int(np.random.SeedSequence([seed, t]).generate_state(1)[0])


def monitor(cube: TimeSeriesCube, config: DelayConfig, m_range: Sequence[int],
            sap_config: Optional[SapConfig] = None,
            secant_cap: Optional[int] = DEFAULT_MAX_SECANTS, seed: int = 0,
            warm_start: bool = True, threads: Optional[int] = None,
            progress=None) -> ProfileSeries:
    """kappa-profile of every delay window ``t = 0, stride, 2 stride, ...``.

    With ``warm_start`` each window's optimizer may start from the previous
    window's bases and windows run in order.  Without it, windows are
    independent and up to ``threads`` run at once.  Either way a window whose
    embedding equals the previous one exactly reuses its profile, so results
    do not depend on scheduling.
    """
    sap_config = sap_config or SapConfig()
    starts = list(window_starts(cube.T, config))
    windows = [delay_embed(cube, t, config) for t in starts]
    fresh = [k == 0 or not np.array_equal(windows[k].points, windows[k - 1].points)
             for k in range(len(starts))]

    def compute(k, warm=None):
        data = windows[k]
        secants = build_secants(data, max_secants=secant_cap, seed=window_seed(seed, starts[k]))
        return kappa_profile(secants, m_range, sap_config, label=data.label, warm_bases=warm)

    profiles: list = [None] * len(starts)
    if not warm_start and threads and threads > 1:
        todo = [k for k in range(len(starts)) if fresh[k]]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for k, prof in zip(todo, pool.map(compute, todo)):
                profiles[k] = prof
    for k in range(len(starts)):
        if not fresh[k]:
            profiles[k] = profiles[k - 1]
        elif profiles[k] is None:
            warm = profiles[k - 1].bases if (warm_start and k > 0) else None
            profiles[k] = compute(k, warm)
        if progress is not None:
            progress(starts[k], profiles[k])
    return ProfileSeries(tuple(zip(starts, profiles)))
