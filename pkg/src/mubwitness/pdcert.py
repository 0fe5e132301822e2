"""Numerical evidence for (and attempts to refute) positive definiteness on U(d).

A function w is positive definite exactly when every Gram matrix
``G[r, t] = w(u_r^* u_t)`` is positive semidefinite. Nothing here proves
anything: passing checks mean "not refuted at this budget".

Thresholds are asymmetric on purpose: evidence uses ``-1e-8``, refutation
needs ``lambda_min < -1e-6`` to stay clear of eigensolver noise.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .haar import MASK64, IntegralEstimate, SamplerConfig, ginibre, haar_from_ginibre, index_rng, integrate, sample_block
from .linalg import DimensionError, adjoint, hermitian_eigenvalues, is_unitary
from .witness import M_DIM, WitnessFunction, h_plus_eps_m, m_combined, witness_h

EVIDENCE_THRESHOLD = 1e-8
REFUTATION_THRESHOLD = 1e-6
PROJECTOR_DIM_CAP = 8

# index_rng stream for searches, kept apart from the Haar integration stream (0)
_SEARCH_STREAM = 1


class NotStarSymmetricError(ValueError):
    pass


def theorem_backed(w: WitnessFunction) -> bool:
    """Whether every Gram matrix of ``w`` is PSD by a proven result."""
    return w.positive_definite is True


@dataclass
class GramReport:
    witness_name: str
    m: int
    lambda_min: float
    dim: int
    seed: Optional[int] = None
    lambda_min_shifted: Optional[float] = None
    trail: list = field(default_factory=list)
    unitaries: Optional[np.ndarray] = field(default=None, repr=False)

    def to_json(self) -> dict:
        out = {
            "witness": self.witness_name,
            "m": self.m,
            "dim": self.dim,
            "seed": self.seed,
            "lambda_min": self.lambda_min,
            "lambda_min_shifted": self.lambda_min_shifted,
        }
        if self.trail:
            out["trail"] = self.trail
        return out


@dataclass
class PsdResult:
    lambda_min: float
    psd: bool


def _stack(unitaries, check_unitary: bool = True) -> np.ndarray:
    stack = np.array([np.asarray(u, dtype=np.complex128) for u in unitaries])
    if stack.ndim != 3 or stack.shape[1] != stack.shape[2]:
        raise DimensionError("all unitaries must be square and of the same dimension")
    if check_unitary:
        for i, u in enumerate(stack):
            if not is_unitary(u):
                raise ValueError(f"element {i} is not unitary")
    return stack


def _gram_rows(w: WitnessFunction, stack: np.ndarray, rows: Sequence[int]) -> np.ndarray:
    """Values ``w(u_r^* u_t)`` for the given rows r and every t."""
    rows = list(rows)
    quot = adjoint(stack[rows])[:, None] @ stack[None, :]
    m, d = stack.shape[0], stack.shape[-1]
    return w.values(quot.reshape(len(rows) * m, d, d)).reshape(len(rows), m)


def gram(w: WitnessFunction, unitaries) -> np.ndarray:
    """Real symmetric Gram matrix of a star-symmetric witness.

    Only the upper triangle is evaluated; star symmetry gives the rest.
    """
    if not w.star_symmetric:
        raise NotStarSymmetricError(f"witness {w.name} is not star-symmetric; its Gram matrix is not Hermitian")
    stack = _stack(unitaries)
    if stack.shape[-1] != w.dim:
        raise DimensionError(f"witness {w.name} lives in dimension {w.dim}, got {stack.shape[-1]}")
    m = stack.shape[0]
    iu = np.triu_indices(m)
    quot = adjoint(stack[iu[0]]) @ stack[iu[1]]
    g = np.zeros((m, m))
    g[iu] = w.values(quot)
    g.T[iu] = g[iu]
    return g


def psd_check(g, threshold: float = EVIDENCE_THRESHOLD) -> PsdResult:
    g = np.asarray(g)
    scale = max(1.0, float(np.max(np.abs(g)))) if g.size else 1.0
    lam = float(hermitian_eigenvalues(g, herm_tol=1e-10 * scale)[0])
    return PsdResult(lam, lam >= -threshold)


def lambda_min(g) -> float:
    return float(hermitian_eigenvalues(g)[0])


def shifted_check(
    w: WitnessFunction,
    alpha0: float,
    unitaries,
    threshold: float = EVIDENCE_THRESHOLD,
    seed: Optional[int] = None,
) -> GramReport:
    """Smallest eigenvalues of G and of ``G - alpha0 * J`` (J the all-ones matrix)."""
    if w.haar_mean is not None and alpha0 > w.haar_mean:
        warnings.warn(f"alpha0={alpha0} exceeds the Haar mean {float(w.haar_mean)} of {w.name}", stacklevel=2)
    g = gram(w, unitaries)
    m = g.shape[0]
    plain = psd_check(g, threshold).lambda_min
    shifted = psd_check(g - alpha0 * np.ones((m, m)), threshold).lambda_min
    return GramReport(w.name, m, plain, w.dim, seed, lambda_min_shifted=shifted)


def quadratic_form(g, c) -> float:
    c = np.asarray(c, dtype=np.complex128)
    return float(np.real(np.conj(c) @ np.asarray(g) @ c))


def gram_h0_via_projectors(unitaries, max_dim: int = PROJECTOR_DIM_CAP) -> np.ndarray:
    """Gram matrix of h0 built as Hilbert-Schmidt products ``tr(Q_r Q_t)``.

    ``Q_t`` is the sum of rank-one projectors onto ``u_t e_j (x) u_t e_j``.
    The result is PSD by construction, independently of any eigen-solve.
    """
    stack = _stack(unitaries)
    d = stack.shape[-1]
    if d > max_dim:
        raise DimensionError(f"dimension {d} exceeds the projector cap {max_dim}")
    qs = []
    for u in stack:
        q = np.zeros((d * d, d * d), dtype=np.complex128)
        for j in range(d):
            v = np.kron(u[:, j], u[:, j])
            q += np.outer(v, v.conj())
        qs.append(q)
    flat = np.array([q.ravel() for q in qs])
    # tr(Q_r Q_t) = sum_ab Q_r[a,b] conj(Q_t[a,b]) for Hermitian Q_t
    return np.real(flat @ flat.conj().T)


def haar_tuple(cfg: SamplerConfig, trial: int, m: int) -> np.ndarray:
    """The m-tuple used by trial ``trial``: Haar indices ``trial*m .. trial*m+m-1``."""
    return sample_block(cfg, trial * m, m)


@dataclass
class PdScanResult:
    witness_name: str
    dim: int
    m: int
    trials: int
    seed: int
    lambda_mins: list

    @property
    def worst(self) -> float:
        return float(min(self.lambda_mins))

    def to_json(self) -> dict:
        return {
            "witness": self.witness_name,
            "dim": self.dim,
            "m": self.m,
            "trials": self.trials,
            "seed": self.seed,
            "lambda_min": self.worst,
            "lambda_mins": self.lambda_mins,
        }


def pd_scan(w: WitnessFunction, m: int, trials: int, cfg: SamplerConfig, workers: int = 1) -> PdScanResult:
    """Smallest Gram eigenvalue over ``trials`` independent Haar m-tuples."""

    def one(t):
        return psd_check(gram(w, haar_tuple(cfg, t, m))).lambda_min

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            lams = list(pool.map(one, range(trials)))
    else:
        lams = [one(t) for t in range(trials)]
    return PdScanResult(w.name, cfg.dim, m, trials, cfg.seed, lams)


def _random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    x = ginibre(rng, d)
    hm = (x + x.conj().T) / 2
    return hm / np.linalg.norm(hm)


def _exp_i(hm: np.ndarray, delta: float) -> np.ndarray:
    vals, vecs = np.linalg.eigh(hm)
    return (vecs * np.exp(1j * delta * vals)) @ vecs.conj().T


def _search_restart(w: WitnessFunction, m: int, cfg: SamplerConfig, restart: int, steps: int):
    rng = index_rng(cfg.seed, restart, stream=_SEARCH_STREAM)
    d = cfg.dim
    stack = haar_from_ginibre(np.array([ginibre(rng, d) for _ in range(m)]))
    g = gram(w, stack)
    best = lambda_min(g)
    accepted = []
    for step in range(steps):
        frac = step / max(steps - 1, 1)
        delta = 0.3 * (0.01 / 0.3) ** frac
        member = int(rng.integers(m))
        move = _exp_i(_random_hermitian(rng, d), delta)
        trial = stack.copy()
        trial[member] = trial[member] @ move
        row = _gram_rows(w, trial, [member])[0]
        g_new = g.copy()
        g_new[member, :] = row
        g_new[:, member] = row
        lam = lambda_min(g_new)
        if lam < best:
            best, stack, g = lam, trial, g_new
            accepted.append(step)
    return best, stack, accepted


def counterexample_search(
    w: WitnessFunction,
    m: int,
    cfg: SamplerConfig,
    restarts: int = 4,
    steps: int = 200,
) -> GramReport:
    """Random-restart descent on lambda_min of the Gram matrix.

    Each restart starts from a Haar m-tuple and right-multiplies one member at
    a time by ``exp(i*delta*H)``, H a random unit-norm Hermitian and delta
    annealed from 0.3 to 0.01, keeping moves that lower lambda_min. All
    randomness of restart r comes from ``(cfg.seed, r)``, so the reported
    trail ``(restart, accepted steps)`` replays bit-identically.
    """
    if m < 2:
        raise ValueError("m must be >= 2")
    if w.dim != cfg.dim:
        raise DimensionError(f"witness dimension {w.dim} != sampler dimension {cfg.dim}")
    best = None
    for r in range(restarts):
        lam, stack, accepted = _search_restart(w, m, cfg, r, steps)
        if best is None or lam < best[0]:
            best = (lam, stack, r, accepted)
    lam, stack, r, accepted = best
    trail = [{"restart": r, "steps": steps, "accepted": accepted}]
    return GramReport(w.name, m, float(lam), cfg.dim, cfg.seed, trail=trail, unitaries=stack)


def replay_search(w: WitnessFunction, m: int, cfg: SamplerConfig, restart: int, steps: int) -> GramReport:
    lam, stack, accepted = _search_restart(w, m, cfg, restart, steps)
    return GramReport(w.name, m, float(lam), cfg.dim, cfg.seed,
                      trail=[{"restart": restart, "steps": steps, "accepted": accepted}], unitaries=stack)


@dataclass
class EpsScanResult:
    kind: str
    eps_grid: list
    lambda_min_curve: list
    refuted_at: Optional[float]
    trial_curve: list
    search_curve: list
    m: int
    trials: int
    seed: int
    dim: int = M_DIM
    max_abs_m: float = 0.0
    m_mean: Optional[dict] = None
    conditional_bounds: Optional[list] = None

    @property
    def status(self) -> str:
        if self.refuted_at is not None:
            return f"refuted at eps={self.refuted_at}"
        return "not refuted at grid/budget"

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "m": self.m,
            "seed": self.seed,
            "trials_per_eps": [self.trials] * len(self.eps_grid),
            "eps_grid": self.eps_grid,
            "lambda_min_curve": self.lambda_min_curve,
            "trial_curve": self.trial_curve,
            "search_curve": self.search_curve,
            "refuted_at": self.refuted_at,
            "status": self.status,
            "max_abs_m": self.max_abs_m,
            "m_mean": self.m_mean,
            "conditional_bounds": self.conditional_bounds,
        }

    def csv_rows(self) -> list:
        rows = [["eps", "lambda_min", "trial_lambda_min", "search_lambda_min"]]
        for e, a, b, c in zip(self.eps_grid, self.lambda_min_curve, self.trial_curve, self.search_curve):
            rows.append([repr(e), repr(a), repr(b), "" if c is None else repr(c)])
        return rows


def conditional_bound(eps: float, m_mean: IntegralEstimate, k: float = 3.0) -> dict:
    """Bound ``5 / (5/7 + eps*E[m])`` if h + eps*m were positive definite, as an interval."""
    base = (M_DIM - 1) / (M_DIM + 1)
    centre = base + eps * m_mean.mean
    spread = k * eps * m_mean.stderr
    lo_mean, hi_mean = centre - spread, centre + spread
    return {
        "eps": eps,
        "bound": (M_DIM - 1) / centre,
        "interval": [(M_DIM - 1) / hi_mean, (M_DIM - 1) / lo_mean if lo_mean > 0 else math.inf],
        "note": "conditional on positive definiteness (not proven)",
    }


def eps_scan(
    kind: str,
    eps_grid: Sequence[float],
    m: int,
    trials: int,
    cfg: SamplerConfig,
    search_restarts: int = 1,
    search_steps: int = 50,
    mean_samples: int = 0,
    workers: int = 1,
) -> EpsScanResult:
    """Smallest Gram eigenvalue of ``h + eps*m`` along a grid of eps.

    Every eps sees the same Haar tuples (trial t uses indices t*m .. t*m+m-1),
    so ``G_h`` and ``G_m`` are computed once per trial. A counterexample
    search per eps is added on top when ``search_restarts > 0``. If
    ``mean_samples >= 2``, E[m] is estimated and conditional bounds are
    attached for every eps the scan did not refute.
    """
    eps_grid = [float(e) for e in eps_grid]
    if any(e < 0 for e in eps_grid) or eps_grid != sorted(eps_grid):
        raise ValueError("eps grid must be ascending and nonnegative")
    if cfg.dim != M_DIM:
        raise DimensionError("the eps scan is defined in dimension 6")
    h = witness_h(M_DIM)
    mw = m_combined(kind)

    def one(t):
        stack = haar_tuple(cfg, t, m)
        gh, gm = gram(h, stack), gram(mw, stack)
        lams = [lambda_min(gh + e * gm) for e in eps_grid]
        return lams, float(np.max(np.abs(gm)))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(trials)))
    else:
        results = [one(t) for t in range(trials)]

    trial_curve = [min(r[0][i] for r in results) for i in range(len(eps_grid))]
    max_abs_m = max(r[1] for r in results)

    search_curve = []
    for i, e in enumerate(eps_grid):
        if search_restarts > 0:
            sub = SamplerConfig(cfg.dim, (cfg.seed + 7919 * (i + 1)) & MASK64, cfg.chunk_size)
            rep = counterexample_search(h_plus_eps_m(kind, e), m, sub, search_restarts, search_steps)
            search_curve.append(rep.lambda_min)
        else:
            search_curve.append(None)

    curve = [a if b is None else min(a, b) for a, b in zip(trial_curve, search_curve)]
    refuted_at = next((e for e, lam in zip(eps_grid, curve) if lam < -REFUTATION_THRESHOLD), None)

    m_mean = bounds = None
    if mean_samples >= 2:
        est = integrate(mw, cfg, mean_samples)
        m_mean = est.to_json()
        bounds = [conditional_bound(e, est) for e, lam in zip(eps_grid, curve)
                  if e > 0 and lam >= -REFUTATION_THRESHOLD]

    return EpsScanResult(
        kind=kind,
        eps_grid=eps_grid,
        lambda_min_curve=curve,
        refuted_at=refuted_at,
        trial_curve=trial_curve,
        search_curve=search_curve,
        m=m,
        trials=trials,
        seed=cfg.seed,
        max_abs_m=max_abs_m,
        m_mean=m_mean,
        conditional_bounds=bounds,
    )
