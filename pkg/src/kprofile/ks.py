"""Kuramoto-Sivashinsky data on a 2*pi-periodic domain.

Solves ``u_t + 4 u_xxxx + alpha (u_xx + u_x**2 / 2) = 0`` pseudospectrally with
ETDRK4 (Cox & Matthews; contour-integral coefficients after Kassam &
Trefethen) and 2/3-rule dealiasing of the quadratic term.

The spatial mean of ``u`` obeys ``d<u>/dt = -alpha <u_x**2> / 2`` and feeds
back into nothing, so it drifts without bound.  Sampled states therefore have
it removed by default (``drop_mean``); the integration itself always carries
the full field, so residual checks run against the unmodified equation.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numba
import numpy as np

from .errors import DimensionMismatch, InvalidConfig, NumericalBlowup

DEFAULT_TRANSIENT_STEPS = 1_000_000
DEFAULT_SPAN = 100.0  # equation time covered by the recorded samples


def default_dt(alpha: float) -> float:
    """1e-3, shrunk so that ``dt * alpha**2 / 4`` (the natural KS time unit) stays <= 0.1."""
    return min(1e-3, 0.4 / alpha ** 2)


@dataclass(frozen=True)
class KsConfig:
    alpha: float
    grid_points: int = 32
    dt: Optional[float] = None
    transient_steps: Optional[int] = None
    sample_stride: Optional[int] = None
    n_samples: int = 10_000
    init: str = "default_cosine"
    seed: Optional[int] = None
    noise: float = 0.0
    nonlinear: bool = True
    dealias: bool = True
    drop_mean: bool = True

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise InvalidConfig("alpha must be a positive real")
        g = self.grid_points
        if g < 8 or g & (g - 1):
            raise InvalidConfig(f"grid_points must be a power of two >= 8, got {g}")
        if self.dt is not None and not self.dt > 0:
            raise InvalidConfig("dt must be positive")
        if self.n_samples < 1:
            raise InvalidConfig("n_samples must be >= 1")
        if self.transient_steps is not None and self.transient_steps < 0:
            raise InvalidConfig("transient_steps must be >= 0")
        if self.sample_stride is not None and self.sample_stride < 1:
            raise InvalidConfig("sample_stride must be >= 1")
        if self.init not in ("default_cosine", "seeded_random", "zero"):
            raise InvalidConfig(f"unknown init {self.init!r}")
        if self.init == "seeded_random" and self.seed is None:
            raise InvalidConfig("seeded_random init needs a seed")
        if self.noise and self.seed is None:
            raise InvalidConfig("noise needs a seed")

    @property
    def step(self) -> float:
        return self.dt if self.dt is not None else default_dt(self.alpha)

    @property
    def transient(self) -> int:
        return DEFAULT_TRANSIENT_STEPS if self.transient_steps is None else self.transient_steps

    @property
    def stride(self) -> int:
        if self.sample_stride is not None:
            return self.sample_stride
        return max(1, math.ceil(DEFAULT_SPAN / (self.n_samples * self.step)))

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(resolved_dt=self.step, resolved_transient_steps=self.transient,
                 resolved_sample_stride=self.stride)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "KsConfig":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


@dataclass(frozen=True)
class KsTrajectory:
    states: np.ndarray  # n_samples x grid_points, time ordered
    config: KsConfig

    @property
    def times(self) -> np.ndarray:
        """Equation time of each recorded state, measured from t = 0."""
        c = self.config
        return (c.transient + c.stride * np.arange(1, len(self.states) + 1)) * c.step

    def save(self, csv_path) -> Path:
        """Write states as CSV and the config to ``<stem>.json`` next to it."""
        csv_path = Path(csv_path)
        np.savetxt(csv_path, self.states, delimiter=",", fmt="%.17g")
        sidecar = csv_path.with_suffix(".json")
        sidecar.write_text(json.dumps(self.config.to_dict(), indent=2, sort_keys=True))
        return sidecar


def grid(n: int) -> np.ndarray:
    return 2 * np.pi * np.arange(n) / n


def wavenumbers(n: int) -> np.ndarray:
    return np.arange(n // 2 + 1, dtype=float)


def linear_symbol(alpha: float, n: int) -> np.ndarray:
    """Fourier multiplier of the linear part: ``alpha k^2 - 4 k^4``."""
    k = wavenumbers(n)
    return alpha * k ** 2 - 4 * k ** 4


def etdrk4_coefficients(L: np.ndarray, dt: float, n_contour: int = 32):
    """``exp(L dt)``, ``exp(L dt / 2)`` and the ETDRK4 weights, via contour means."""
    roots = np.exp(1j * np.pi * (np.arange(1, n_contour + 1) - 0.5) / n_contour)
    LR = dt * L[:, None] + roots[None, :]
    Q = dt * np.real(np.mean((np.exp(LR / 2) - 1) / LR, axis=1))
    f1 = dt * np.real(np.mean((-4 - LR + np.exp(LR) * (4 - 3 * LR + LR ** 2)) / LR ** 3, axis=1))
    f2 = dt * np.real(np.mean((2 + LR + np.exp(LR) * (-2 + LR)) / LR ** 3, axis=1))
    f3 = dt * np.real(np.mean((-4 - 3 * LR - LR ** 2 + np.exp(LR) * (4 - LR)) / LR ** 3, axis=1))
    return np.exp(dt * L), np.exp(dt * L / 2), Q, f1, f2, f3


def _dft_matrices(n: int):
    """Dense real-FFT pair matching ``numpy.fft.rfft`` / ``irfft`` for length ``n``."""
    x = grid(n)
    k = wavenumbers(n)
    fwd = np.exp(-1j * np.outer(k, x))  # (n/2+1) x n
    w = np.full(len(k), 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    inv = (np.exp(1j * np.outer(x, k)) * w) / n  # n x (n/2+1); real part taken
    return np.ascontiguousarray(fwd), np.ascontiguousarray(inv)


@numba.njit(cache=True)
def _nonlinear(v, ik_mask, fwd, inv, coef):
    ux = (inv @ (ik_mask * v)).real
    return coef * (fwd @ (ux * ux).astype(np.complex128))


@numba.njit(cache=True)
def _integrate(v, n_transient, stride, n_samples, E, E2, Q, f1, f2, f3, ik, mask, fwd, inv,
               coef, out):
    """Advance ``v`` in place; fills ``out`` with spectra. Returns -1 or the failing step."""
    ik_mask = ik * mask
    total = n_transient + stride * n_samples
    rec = 0
    for step in range(1, total + 1):
        Nv = _nonlinear(v, ik_mask, fwd, inv, coef) * mask
        a = E2 * v + Q * Nv
        Na = _nonlinear(a, ik_mask, fwd, inv, coef) * mask
        b = E2 * v + Q * Na
        Nb = _nonlinear(b, ik_mask, fwd, inv, coef) * mask
        c = E2 * a + Q * (2.0 * Nb - Nv)
        Nc = _nonlinear(c, ik_mask, fwd, inv, coef) * mask
        v = E * v + Nv * f1 + 2.0 * (Na + Nb) * f2 + Nc * f3
        if step % 256 == 0 or step == total:
            for j in range(v.shape[0]):
                if not (np.isfinite(v[j].real) and np.isfinite(v[j].imag)):
                    return step
        if step > n_transient and (step - n_transient) % stride == 0:
            out[rec, :] = v
            rec += 1
    return -1


def _dealias_mask(n: int) -> np.ndarray:
    return (wavenumbers(n) < n / 3).astype(float)


def initial_condition(config: KsConfig) -> np.ndarray:
    x = grid(config.grid_points)
    if config.init == "zero":
        u = np.zeros_like(x)
    elif config.init == "seeded_random":
        u = 0.1 * np.random.default_rng(config.seed).standard_normal(len(x))
    else:
        u = 0.1 * np.cos(x) * (1 + np.sin(x))
    if config.noise:
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, 1]))
        u = u + config.noise * rng.standard_normal(len(x))
    return u


def ks_simulate(config: KsConfig, u0: Optional[np.ndarray] = None) -> KsTrajectory:
    """Integrate, discard the transient, and record ``n_samples`` states.

    Raises ``NumericalBlowup`` as soon as the spectrum stops being finite.
    """
    n = config.grid_points
    dt = config.step
    u = initial_condition(config) if u0 is None else np.asarray(u0, dtype=float)
    if u.shape != (n,):
        raise DimensionMismatch(f"initial state must have {n} entries")
    L = linear_symbol(config.alpha, n)
    E, E2, Q, f1, f2, f3 = etdrk4_coefficients(L, dt)
    k = wavenumbers(n)
    mask = _dealias_mask(n) if config.dealias else np.ones_like(k)
    mask[-1] = 0.0  # Nyquist mode carries no derivative information
    coef = -0.5 * config.alpha if config.nonlinear else 0.0
    fwd, inv = _dft_matrices(n)
    v = np.fft.rfft(u).astype(np.complex128)
    out = np.empty((config.n_samples, n // 2 + 1), dtype=np.complex128)
    failed = _integrate(v, config.transient, config.stride, config.n_samples,
                        E.astype(np.complex128), E2.astype(np.complex128),
                        Q.astype(np.complex128), f1.astype(np.complex128),
                        f2.astype(np.complex128), f3.astype(np.complex128),
                        (1j * k).astype(np.complex128), mask.astype(np.complex128),
                        fwd, inv, complex(coef), out)
    if failed >= 0:
        raise NumericalBlowup(f"non-finite state at step {failed} (alpha={config.alpha}, dt={dt:g})")
    if config.drop_mean:
        out[:, 0] = 0.0
    states = np.fft.irfft(out, n=n, axis=1)
    if not np.all(np.isfinite(states)):
        raise NumericalBlowup("non-finite sampled state")
    return KsTrajectory(states, config)


def spectral_derivative(u: np.ndarray, order: int) -> np.ndarray:
    """``d^order u / dx^order`` along the last axis on the 2*pi-periodic grid."""
    n = u.shape[-1]
    k = wavenumbers(n)
    mult = (1j * k) ** order
    if order % 2 == 1:
        mult[-1] = 0.0
    return np.fft.irfft(np.fft.rfft(u, axis=-1) * mult, n=n, axis=-1)


def ks_residual(states_window: np.ndarray, config: KsConfig) -> float:
    """Max-norm PDE residual on consecutive fine-step states.

    Time derivatives are central differences over ``config.step``; space
    derivatives are spectral, and with ``config.dealias`` the quadratic term
    gets the solver's 2/3 mask, so the residual measures time-stepping error
    of the semi-discrete system.  States must include the spatial mean
    (simulate with ``drop_mean=False, sample_stride=1``).
    """
    U = np.asarray(states_window, dtype=float)
    if U.ndim != 2 or U.shape[0] < 3 or U.shape[1] != config.grid_points:
        raise DimensionMismatch(
            f"need >= 3 consecutive states of length {config.grid_points}, got shape {U.shape}")
    dt = config.step
    ut = (U[2:] - U[:-2]) / (2 * dt)
    mid = U[1:-1]
    ux = spectral_derivative(mid, 1)
    nl = 0.5 * ux ** 2 if config.nonlinear else 0.0
    if config.nonlinear and config.dealias:
        n = config.grid_points
        nl = np.fft.irfft(np.fft.rfft(nl, axis=-1) * _dealias_mask(n), n=n, axis=-1)
    res = ut + 4 * spectral_derivative(mid, 4) + config.alpha * (spectral_derivative(mid, 2) + nl)
    return float(np.abs(res).max())
