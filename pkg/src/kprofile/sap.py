"""Secant-avoidance projection (SAP) and kappa-profiles.

For a target dimension ``m`` the optimizer looks for an orthonormal basis
``B`` (``n x m``) maximizing ``min_s |B^T s|`` over the secant set.  Each
iteration takes the worst secant ``s``, splits it into ``s_par = B B^T s`` and
``s_perp``, and turns the subspace direction along ``s_par`` toward
``s_perp`` by a fraction of the angle that would bring ``s`` fully inside the
subspace.  The best basis seen is returned.

Two implementation tricks keep iterations cheap on large secant sets:

* the rotation only swaps one direction ``u -> u'`` of the subspace, so
  ``|B'^T s|^2 = |B^T s|^2 - (u.s)^2 + (u'.s)^2``;
* a projected norm moves by at most ``sin(delta)`` per step, so only secants
  within a margin of the current minimum need tracking until the summed
  rotation exceeds that margin.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .basis import ProjectionBasis, as_columns, orthonormalize
from .errors import DimensionMismatch, InvalidConfig, InvalidInput
from .secants import (DEFAULT_MAX_SECANTS, DataMatrix, SecantSet, build_secants,
                      min_projected_norm, projected_sq_norms, span_reduce)

GOOD_KAPPA = 0.2
_IN_SUBSPACE = 1e-12
_ACTIVE_ROWS = 8192

__all__ = [
    "GOOD_KAPPA", "KappaProfile", "ProfileEntry", "ProjectionBasis", "SapConfig",
    "SapResult", "good_dimension", "is_good_embedding", "kappa_profile", "profile_data",
    "sap_optimize", "secant_gram",
]


@dataclass(frozen=True)
class SapConfig:
    """Optimizer settings.

    ``init`` is ``"pca"`` (top singular directions of the secant matrix),
    ``"random"`` (seeded) or ``"warm"`` (``warm_basis``).  With
    ``candidates > 0`` that many seeded random bases are scored and the best
    ``restarts`` of them are refined alongside the primary start.  Each
    ascent ends with up to ``polish_iters`` trust-region linear-programming
    steps (``0`` disables them) on the ``polish_rows`` worst secants.
    """

    max_iters: int = 2000
    step_size: float = 0.1
    step_decay: float = 0.995
    tol: float = 1e-5
    patience: int = 100
    init: str = "pca"
    seed: int = 0
    warm_basis: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    candidates: int = 0
    restarts: int = 0
    active_margin: float = 0.05
    threads: Optional[int] = None
    polish_iters: int = 40
    polish_rows: int = 3000

    def __post_init__(self):
        if self.max_iters < 1:
            raise InvalidConfig("max_iters must be positive")
        if not 0 < self.step_size <= 1:
            raise InvalidConfig("step_size must lie in (0, 1]")
        if not 0 < self.step_decay <= 1:
            raise InvalidConfig("step_decay must lie in (0, 1]")
        if not self.tol > 0:
            raise InvalidConfig("tol must be positive")
        if self.patience < 1:
            raise InvalidConfig("patience must be positive")
        if self.init not in ("pca", "random", "warm"):
            raise InvalidConfig(f"unknown init {self.init!r}")
        if self.init == "warm" and self.warm_basis is None:
            raise InvalidConfig("init='warm' needs warm_basis")
        if self.candidates < 0 or self.restarts < 0:
            raise InvalidConfig("candidates and restarts must be non-negative")
        if self.restarts > self.candidates:
            raise InvalidConfig("restarts cannot exceed candidates")
        if not self.active_margin > 0:
            raise InvalidConfig("active_margin must be positive")
        if self.polish_iters < 0 or self.polish_rows < 1:
            raise InvalidConfig("polish_iters must be >= 0 and polish_rows >= 1")

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "warm_basis"}
        d["warm_basis"] = None if self.warm_basis is None else "<array>"
        return d


@dataclass(frozen=True)
class SapResult:
    basis: ProjectionBasis
    kappa: float
    iterations: int
    converged: bool
    kappa_history: tuple = field(repr=False)
    argmin: int = -1


@dataclass(frozen=True)
class ProfileEntry:
    m: int
    kappa: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class KappaProfile:
    """kappa_m over a contiguous range of target dimensions."""

    entries: tuple
    label: str = ""
    bases: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        ms = [e.m for e in self.entries]
        if any(b <= a for a, b in zip(ms, ms[1:])):
            raise InvalidInput("profile dimensions must be strictly increasing")

    @property
    def dims(self) -> list[int]:
        return [e.m for e in self.entries]

    @property
    def kappas(self) -> np.ndarray:
        return np.array([e.kappa for e in self.entries])

    def kappa(self, m: int) -> float:
        for e in self.entries:
            if e.m == m:
                return e.kappa
        raise KeyError(m)

    def good_dimension(self, threshold: float = GOOD_KAPPA) -> Optional[int]:
        return good_dimension(self, threshold)

    def rows(self) -> list[dict]:
        return [dict(m=e.m, kappa=e.kappa, iterations=e.iterations, converged=e.converged)
                for e in self.entries]


def is_good_embedding(kappa: float, threshold: float = GOOD_KAPPA) -> bool:
    """Rule of thumb: a projection with kappa >= 0.2 embeds the data well."""
    return bool(kappa >= threshold)


def good_dimension(profile: KappaProfile, threshold: float = GOOD_KAPPA) -> Optional[int]:
    """Smallest profiled ``m`` whose kappa passes ``threshold`` (None if none)."""
    for e in profile.entries:
        if is_good_embedding(e.kappa, threshold):
            return e.m
    return None


def secant_gram(secants: SecantSet, chunk_size: int = 1 << 16) -> np.ndarray:
    """``S^T S`` accumulated over row chunks."""
    S = secants.secants
    G = np.zeros((S.shape[1], S.shape[1]))
    for start in range(0, len(S), chunk_size):
        C = S[start:start + chunk_size]
        G += C.T @ C
    return G


def _top_eigvecs(G: np.ndarray, m: int) -> np.ndarray:
    w, V = np.linalg.eigh(G)
    V = V[:, ::-1][:, :m]
    # fix orientation: largest-magnitude entry of each column positive
    flip = V[np.argmax(np.abs(V), axis=0), np.arange(V.shape[1])] < 0
    V[:, flip] *= -1
    return V


def secant_frame(secants: SecantSet, gram: Optional[np.ndarray] = None,
                 chunk_size: int = 1 << 16) -> np.ndarray:
    """Orthonormal frame of the secant set that rotates with the data.

    Columns are eigenvectors of ``S^T S`` by decreasing eigenvalue.  Column
    ``k > 0`` is oriented so ``sum_s (s.v_0)^3 (s.v_k) >= 0``, a statistic
    unchanged by flipping individual secants or the whole frame, so for data
    ``X Q^T`` the frame is ``Q`` times the frame for ``X`` (up to a global sign,
    and provided the eigenvalues are distinct).
    """
    S = secants.secants
    G = secant_gram(secants) if gram is None else gram
    V = np.linalg.eigh(G)[1][:, ::-1].copy()
    c = np.zeros(V.shape[1])
    for start in range(0, len(S), chunk_size):
        P = S[start:start + chunk_size] @ V
        c += (P[:, :1] ** 3 * P).sum(axis=0)
    V[:, 1:][:, c[1:] < 0] *= -1
    return V


def _random_basis(rng: np.random.Generator, n: int, m: int, frame=None) -> np.ndarray:
    R = rng.standard_normal((n, m))
    return orthonormalize(R if frame is None else frame @ R)


def _initial_basis(secants: SecantSet, m: int, config: SapConfig, gram=None) -> np.ndarray:
    n = secants.n
    if config.init == "warm":
        B = as_columns(config.warm_basis)
        if B.shape != (n, m):
            raise DimensionMismatch(f"warm basis has shape {B.shape}, expected {(n, m)}")
        return orthonormalize(B)
    G = secant_gram(secants) if gram is None else gram
    if config.init == "random":
        return _random_basis(np.random.default_rng(config.seed), n, m, secant_frame(secants, G))
    return _top_eigvecs(G, m)


def _run(S: np.ndarray, B: np.ndarray, config: SapConfig):
    """One SAP ascent from ``B``; returns (best_B, history, iterations, converged)."""
    margin = config.active_margin
    m = B.shape[1]
    best_k, best_B = -np.inf, B.copy()
    history: list[float] = []
    converged = False
    q_all = None
    swaps: list[tuple[np.ndarray, np.ndarray]] = []  # since q_all was last exact
    drift = np.inf
    it = 0
    for it in range(config.max_iters):
        if drift > margin:
            if q_all is not None and 2 * len(swaps) < m:
                for uo, un in swaps:
                    q_all += (S @ un) ** 2 - (S @ uo) ** 2
            else:
                q_all = projected_sq_norms(S, B)
            swaps = []
            norms = np.sqrt(np.maximum(q_all, 0.0))
            k0 = norms.min()
            # keep the tracked set small: shrink the margin when too many rows sit near k0
            margin = config.active_margin
            if len(norms) > _ACTIVE_ROWS:
                kth = np.partition(norms, _ACTIVE_ROWS)[_ACTIVE_ROWS]
                margin = max(min(margin, (kth - k0) / 2), 1e-6)
            active = np.flatnonzero(norms <= k0 + 2 * margin)
            S_act, q_act = S[active], q_all[active]
            drift = 0.0
        a = int(np.argmin(q_act))
        kap = float(np.sqrt(max(q_act[a], 0.0)))
        if kap > best_k:
            best_k, best_B = kap, B.copy()
        history.append(best_k)
        if it >= config.patience and history[-1] - history[-1 - config.patience] < config.tol:
            converged = True
            break

        s = S_act[a]
        s_par = B @ (B.T @ s)
        s_perp = s - s_par
        n_perp = np.linalg.norm(s_perp)
        if n_perp < _IN_SUBSPACE:
            converged = True
            break
        n_par = np.linalg.norm(s_par)
        u = s_par / n_par if n_par > _IN_SUBSPACE else B[:, 0].copy()
        w = s_perp / n_perp
        delta = config.step_size * config.step_decay ** it * np.arctan2(n_perp, n_par)
        u_new = np.cos(delta) * u + np.sin(delta) * w
        B = orthonormalize(B + np.outer(u_new - u, B.T @ u))

        q_act = q_act + (S_act @ u_new) ** 2 - (S_act @ u) ** 2
        swaps.append((u, u_new))
        drift += abs(np.sin(delta))
    return best_B, history, it + 1, converged


def _polish(S: np.ndarray, B: np.ndarray, config: SapConfig):
    """Refine ``B`` to a local max-min by trust-region sequential LP.

    Writing ``B(Z) = orth(B + B_perp Z)``, each step maximizes ``t`` subject
    to the linearized ``|B(Z)^T s|^2 >= t`` for the secants that can still
    become the minimum, within a box on ``Z``.  A step is kept only when the
    exact minimum over all secants grows.  Returns (B, kappa**2, steps).
    """
    n, m = B.shape
    p = (n - m) * m
    q = projected_sq_norms(S, B)
    t0 = float(q.min())
    radius = 0.02 / np.sqrt(p)
    steps = 0
    for steps in range(1, config.polish_iters + 1):
        B_perp = np.linalg.qr(B, mode="complete")[0][:, m:]
        reach = radius * np.sqrt(p)
        rows = np.flatnonzero(q <= t0 + 2 * reach + reach * reach)
        if len(rows) > config.polish_rows:
            rows = rows[np.argsort(q[rows], kind="stable")[:config.polish_rows]]
        grad = 2 * np.einsum("ik,il->ikl", S[rows] @ B_perp, S[rows] @ B).reshape(len(rows), p)
        # scaled unknowns: Z = radius * z with |z| <= 1, t = t0 + radius * tau
        lp = linprog(np.r_[-1.0, np.zeros(p)], A_ub=np.hstack([np.ones((len(rows), 1)), -grad]),
                     b_ub=(q[rows] - t0) / radius, bounds=[(None, None)] + [(-1.0, 1.0)] * p,
                     method="highs")
        if lp.status != 0:
            break
        predicted = lp.x[0] * radius
        if predicted <= 1e-15:
            break
        B_new = orthonormalize(B + B_perp @ (lp.x[1:].reshape(n - m, m) * radius))
        q_new = projected_sq_norms(S, B_new)
        t_new = float(q_new.min())
        if t_new > t0:
            ratio = (t_new - t0) / predicted
            B, q, t0 = B_new, q_new, t_new
            if ratio > 0.75:
                radius = min(2 * radius, 0.5)
            elif ratio < 0.25:
                radius /= 2
        else:
            radius /= 4
        if radius < 1e-13:
            break
    return B, t0, steps


def sap_optimize(secants: SecantSet, m: int, config: Optional[SapConfig] = None,
                 gram: Optional[np.ndarray] = None) -> SapResult:
    """Approximately solve ``max_B min_s |B^T s|`` over ``n x m`` orthonormal ``B``."""
    config = config or SapConfig()
    n = secants.n
    if not 1 <= m <= n:
        raise DimensionMismatch(f"target dimension m={m} outside 1..{n}")
    S = secants.secants

    if m == n:
        basis = ProjectionBasis.identity(n)
        kappa, idx = min_projected_norm(secants, basis, threads=config.threads)
        return SapResult(basis, kappa, 0, True, (kappa,), idx)

    return _best_of(secants, m, config, [_initial_basis(secants, m, config, gram)], gram)


def _best_of(secants: SecantSet, m: int, config: SapConfig, starts: list, gram=None) -> SapResult:
    """Refine every start (plus the configured random candidates); earlier starts win ties."""
    S = secants.secants
    starts = list(starts)
    if config.candidates:
        rng = np.random.default_rng(config.seed)
        frame = secant_frame(secants, gram)
        cands = [_random_basis(rng, secants.n, m, frame) for _ in range(config.candidates)]
        scores = [min_projected_norm(secants, c, threads=config.threads)[0] for c in cands]
        order = sorted(range(len(cands)), key=lambda i: (-scores[i], i))
        starts += [cands[i] for i in order[:config.restarts]]

    best = None
    for B0 in starts:
        B, history, iters, converged = _run(S, B0, config)
        if config.polish_iters:
            B, t, extra = _polish(S, B, config)
            iters += extra
            history.append(float(np.sqrt(max(t, 0.0))))
        kappa, idx = min_projected_norm(secants, B, threads=config.threads)
        if best is None or kappa > best[1]:
            best = (B, kappa, idx, iters, converged, history)
    B, kappa, idx, iters, converged, history = best
    return SapResult(ProjectionBasis(B), kappa, iters, converged, tuple(history), idx)


def _extend(B: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Append the dominant direction of the secants' residual outside span(B)."""
    n = B.shape[0]
    P = np.eye(n) - B @ B.T
    R = P @ G @ P
    w, V = np.linalg.eigh((R + R.T) / 2)
    v = V[:, -1]
    v = v - B @ (B.T @ v)
    nv = np.linalg.norm(v)
    if nv < 1e-8:
        # secants already inside span(B): any completion direction will do
        E = np.eye(n) - B @ B.T
        v = E[:, np.argmax(np.linalg.norm(E, axis=0))]
        v = v - B @ (B.T @ v)
        nv = np.linalg.norm(v)
    v = v / nv
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return orthonormalize(np.column_stack([B, v]))


def kappa_profile(secants: SecantSet, m_range: Sequence[int] | range,
                  config: Optional[SapConfig] = None, label: str = "",
                  warm_bases: Optional[dict] = None) -> KappaProfile:
    """kappa_m for each ``m`` in ``m_range`` (contiguous, ascending).

    The first dimension starts from ``config.init``.  Each later dimension is
    refined from the previous optimum extended by one direction and from a
    fresh ``config.init`` start, keeping the better result (the extension on
    ties), so the reported kappas never decrease with ``m``.  ``warm_bases`` (``m -> basis``,
    e.g. from a neighbouring time window) offers alternative starting points;
    a warm basis is used only when it scores at least as well as the default
    start.
    """
    config = config or SapConfig()
    dims = list(m_range)
    if not dims:
        raise InvalidConfig("empty dimension range")
    if dims != list(range(dims[0], dims[-1] + 1)):
        raise InvalidConfig("dimension range must be contiguous and ascending")
    if not 1 <= dims[0] <= dims[-1] <= secants.n:
        raise DimensionMismatch(f"dimension range {dims[0]}..{dims[-1]} outside 1..{secants.n}")

    G = secant_gram(secants)
    warm_bases = warm_bases or {}
    entries, bases = [], {}
    prev: Optional[SapResult] = None
    for m in dims:
        if m == secants.n:
            res = sap_optimize(secants, m, config, gram=G)
        else:
            # a warm config only seeds the first dimension
            fresh = None if prev is not None and config.init == "warm" else _initial_basis(secants, m, config, G)
            start = _extend(prev.basis.columns, G) if prev is not None else fresh
            if m in warm_bases:
                alt = as_columns(warm_bases[m])
                k_alt = min_projected_norm(secants, alt, threads=config.threads)[0]
                k_start = min_projected_norm(secants, start, threads=config.threads)[0]
                if k_alt >= k_start:
                    start = alt
            starts = [start] if fresh is None or start is fresh else [start, fresh]
            res = _best_of(secants, m, config, starts, G)
        entries.append(ProfileEntry(m, res.kappa, res.iterations, res.converged))
        bases[m] = res.basis
        prev = res
    return KappaProfile(tuple(entries), label=label, bases=bases)


def profile_data(data: DataMatrix, m_range: Sequence[int] | range,
                 config: Optional[SapConfig] = None, max_secants: Optional[int] = DEFAULT_MAX_SECANTS,
                 seed: Optional[int] = None) -> KappaProfile:
    """kappa-profile of a point cloud, bases expressed in the ambient space.

    When the points' differences span ``r < n`` dimensions (always the case
    for ``N <= n``) secants are built and optimized inside that span.  Every
    ``m >= r`` then has kappa 1: the basis holds the whole span.
    """
    config = config or SapConfig()
    dims = list(m_range)
    if not dims or not 1 <= dims[0] <= dims[-1] <= data.n:
        raise DimensionMismatch(f"dimension range outside 1..{data.n}")
    reduced, F = span_reduce(data)
    r = reduced.n
    if r == data.n:
        secants = build_secants(data, max_secants=max_secants, seed=seed)
        return kappa_profile(secants, dims, config, label=data.label)

    inner = [m for m in dims if m <= r]
    entries, bases = [], {}
    if inner:
        secants = build_secants(reduced, max_secants=max_secants, seed=seed)
        sub = kappa_profile(secants, inner, config, label=data.label)
        entries.extend(sub.entries)
        bases.update({m: ProjectionBasis(orthonormalize(F @ b.columns)) for m, b in sub.bases.items()})
    outer = [m for m in dims if m > r]
    if outer:
        rng = np.random.default_rng(0)
        full = orthonormalize(np.hstack([F, rng.standard_normal((data.n, outer[-1] - r))]))
        for m in outer:
            entries.append(ProfileEntry(m, 1.0, 0, True))
            bases[m] = ProjectionBasis(full[:, :m])
    return KappaProfile(tuple(entries), label=data.label, bases=bases)
