"""Synthetic inputs with known geometry, used by examples and tests."""
from __future__ import annotations

import numpy as np

from .delay import TimeSeriesCube


def plane_to_cloud_cube(T: int = 24, P: int = 40, v: int = 4, transition: int | None = None,
                        seed: int = 0) -> TimeSeriesCube:
    """Sites on a fixed 2-plane of ``R^v`` before ``transition``, on the unit ``S^{v-1}`` after.

    Site values drift slowly in time in both regimes so consecutive windows
    differ.  ``transition`` defaults to ``T // 2``.
    """
    if v < 3:
        raise ValueError("need v >= 3 so the cloud leaves the plane")
    rng = np.random.default_rng(seed)
    transition = T // 2 if transition is None else transition
    frame, _ = np.linalg.qr(rng.standard_normal((v, 2)))
    plane = rng.uniform(-1, 1, size=(P, 2))
    sphere = rng.standard_normal((P, v))
    sphere /= np.linalg.norm(sphere, axis=1, keepdims=True)
    drift = rng.standard_normal((P, v)) * 0.01
    out = np.empty((T, P, v))
    for t in range(T):
        if t < transition:
            out[t] = (plane + 0.01 * t * plane[::-1]) @ frame.T
        else:
            out[t] = sphere + t * drift
    return TimeSeriesCube(out, dt_label="synthetic")


def tone(seconds: float, rate: int = 48_000, freq: float = 2.0, channels: int = 2,
         amplitude: float = 0.5) -> np.ndarray:
    """Pure sine, channel ``c`` phase-shifted by ``c * pi / 3``; shape ``samples x channels``."""
    t = np.arange(int(round(seconds * rate))) / rate
    return np.column_stack([amplitude * np.sin(2 * np.pi * freq * t + c * np.pi / 3)
                            for c in range(channels)])


def white_noise(seconds: float, rate: int = 48_000, channels: int = 2, amplitude: float = 0.3,
                seed: int = 0) -> np.ndarray:
    """Gaussian noise clipped to [-1, 1]; shape ``samples x channels``."""
    rng = np.random.default_rng(seed)
    x = amplitude * rng.standard_normal((int(round(seconds * rate)), channels))
    return np.clip(x, -1.0, 1.0)
