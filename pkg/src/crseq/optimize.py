"""Joint PAPR / aperiodic-autocorrelation optimisation of one CR waveform.

Two stages:

1. pick the power spectrum ``beta = |B|^2`` by minimising the largest periodic
   autocorrelation sidelobe (``R_b(t) = sum_k beta_k exp(-2j*pi*k*t/N)``),
   subject to zeros on the holes and ``sum(beta) = N``;
2. with the magnitudes fixed, alternate phase updates (Gerchberg-Saxton style)
   on the penalised objective

   ``J = lam * ||F_2N [b; 0] - P||^2 + (1 - lam) * ||b - p||^2``

   with ``|P_k| = 1/sqrt(2)`` and ``|p_n| = 1``. The first term pushes the
   aperiodic sidelobes of ``b`` down, the second pushes ``b`` towards unimodular.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from .seeds import FreqWaveform
from .seqcore import SpectrumMask, dft_matrix, max_sidelobe, papr


@dataclass(frozen=True)
class OptimizerConfig:
    lam: float = 0.5
    epsilon: float = 1e-5
    max_iter: int = 10_000
    rng_seed: int = 0
    beta_method: Literal["minimax", "flat"] = "minimax"
    beta_iters: int = 5000
    beta_step: float = 3.0
    n_restarts: int = 1

    def __post_init__(self) -> None:
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_iter < 1 or self.n_restarts < 1:
            raise ValueError("max_iter and n_restarts must be >= 1")
        if self.beta_method not in ("minimax", "flat"):
            raise ValueError(f"unknown beta method {self.beta_method!r}")

    def replace(self, **kw) -> "OptimizerConfig":
        return OptimizerConfig(**{**asdict(self), **kw})


@dataclass(frozen=True)
class PowerSpectrum:
    beta: np.ndarray
    mask: SpectrumMask
    objective: float


@dataclass
class OptResult:
    waveform: FreqWaveform
    papr_db: float
    max_aacf: float
    iterations: int
    converged: bool
    objective_trace: list[float] = field(default_factory=list, repr=False)
    step_trace: list[float] = field(default_factory=list, repr=False)
    objective: float = float("nan")
    config: OptimizerConfig | None = None
    restart: int = 0

    def summary(self) -> dict:
        return {
            "lambda": self.config.lam if self.config else None,
            "papr_db": self.papr_db,
            "max_aacf": self.max_aacf,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def max_workers() -> int:
    env = os.environ.get("CRSEQ_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


# --------------------------------------------------------------------------
# stage 1: power spectrum


def sidelobe_objective(beta: np.ndarray) -> float:
    """``max_{1 <= t <= N-1} |F_N(t, :) beta|`` (periodic sidelobe over sqrt(N))."""
    beta = np.asarray(beta, dtype=float)
    N = beta.size
    if N == 1:
        return 0.0
    r = np.fft.fft(beta) / np.sqrt(N)
    return float(np.abs(r[1:]).max())


def project_capped_simplex(v: np.ndarray, avail: np.ndarray, total: float) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, x[~avail] = 0, sum(x) = total}``."""
    out = np.zeros_like(v, dtype=float)
    u = np.sort(v[avail])[::-1]
    css = np.cumsum(u) - total
    ind = np.arange(1, u.size + 1)
    cond = u - css / ind > 0
    rho = ind[cond][-1]
    theta = css[cond][-1] / rho
    out[avail] = np.maximum(v[avail] - theta, 0.0)
    return out


def flat_beta(mask: SpectrumMask) -> np.ndarray:
    if mask.n_available == 0:
        raise ValueError("mask has no available subcarrier")
    beta = np.zeros(mask.n)
    beta[mask.available] = mask.n / mask.n_available
    return beta


def solve_beta(
    mask: SpectrumMask,
    method: Literal["minimax", "flat"] = "minimax",
    iters: int = 5000,
    step: float = 3.0,
) -> PowerSpectrum:
    """Power spectrum with the smallest worst-case periodic sidelobe.

    Projected subgradient descent from the flat spectrum with step
    ``step / sqrt(t)`` along the normalised subgradient, keeping the best
    iterate. Deterministic.
    """
    beta = flat_beta(mask)
    N = mask.n
    best, best_obj = beta.copy(), sidelobe_objective(beta)
    if method == "flat" or N == 1 or best_obj == 0.0:
        return PowerSpectrum(best, mask, best_obj)
    avail = mask.marking.astype(bool)
    F = dft_matrix(N)[1 : N // 2 + 1]  # rows t and N - t give conjugate values for real beta
    for t in range(1, iters + 1):
        r = F @ beta
        i = int(np.argmax(np.abs(r)))
        g = np.real(np.conj(r[i]) / abs(r[i]) * F[i])
        g[~avail] = 0.0
        gn = np.linalg.norm(g)
        if gn == 0:
            break
        beta = project_capped_simplex(beta - step / np.sqrt(t) * g / gn, avail, N)
        obj = float(np.abs(F @ beta).max())
        if obj < best_obj:
            best, best_obj = beta.copy(), obj
    return PowerSpectrum(best, mask, best_obj)


# --------------------------------------------------------------------------
# stage 2: phase updates


def _fwd2(b: np.ndarray) -> np.ndarray:
    """``F_2N [b; 0_N]`` with the unitary 2N-point DFT."""
    return np.fft.fft(b, 2 * b.size, norm="ortho")


def gs_step_aux(B: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Optimal auxiliary vectors for fixed ``B``: returns ``(P, p)``.

    ``P`` has 2N entries of magnitude ``1/sqrt(2)`` and the phases of
    ``F_2N [b; 0]``; ``p`` has N unit entries with the phases of ``b``.
    """
    b = np.fft.ifft(B, norm="ortho")
    P = np.exp(1j * np.angle(_fwd2(b))) / np.sqrt(2)
    p = np.exp(1j * np.angle(b))
    return P, p


def gs_step_B(P: np.ndarray, p: np.ndarray, beta: np.ndarray, lam: float) -> np.ndarray:
    """Optimal ``B`` with ``|B| = sqrt(beta)`` for fixed ``P`` and ``p``."""
    N = p.size
    p_hat = np.fft.ifft(P, norm="ortho")[:N]
    target = lam * np.fft.fft(p_hat, norm="ortho") + (1 - lam) * np.fft.fft(p, norm="ortho")
    return np.sqrt(beta) * np.exp(1j * np.angle(target))


def objective(B: np.ndarray, P: np.ndarray, p: np.ndarray, lam: float) -> float:
    b = np.fft.ifft(B, norm="ortho")
    j1 = np.sum(np.abs(_fwd2(b) - P) ** 2)
    j2 = np.sum(np.abs(b - p) ** 2)
    return float(lam * j1 + (1 - lam) * j2)


def best_objective(B: np.ndarray, lam: float) -> float:
    """``J`` at the optimal auxiliaries for ``B``."""
    P, p = gs_step_aux(B)
    return objective(B, P, p, lam)


def _run_gs(beta: np.ndarray, mask: SpectrumMask, cfg: OptimizerConfig, rng: np.random.Generator, restart: int) -> OptResult:
    N = beta.size
    B = np.sqrt(beta) * np.exp(2j * np.pi * rng.random(N))
    trace: list[float] = []
    steps: list[float] = []
    converged = False
    it = 0
    for it in range(1, cfg.max_iter + 1):
        P, p = gs_step_aux(B)
        trace.append(objective(B, P, p, cfg.lam))
        B_new = gs_step_B(P, p, beta, cfg.lam)
        step = float(np.linalg.norm(B_new - B))
        steps.append(step)
        B = B_new
        if step < cfg.epsilon:
            converged = True
            break
    wf = FreqWaveform(B, mask, {"type": "optimized", "lambda": cfg.lam, "restart": restart})
    return OptResult(
        waveform=wf,
        papr_db=papr(wf.b),
        max_aacf=max_sidelobe(wf.b, "aperiodic"),
        iterations=it,
        converged=converged,
        objective_trace=trace,
        step_trace=steps,
        objective=best_objective(B, cfg.lam),
        config=cfg,
        restart=restart,
    )


def restart_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def optimize_waveform(
    mask: SpectrumMask,
    cfg: OptimizerConfig,
    beta: PowerSpectrum | None = None,
    workers: int | None = None,
) -> OptResult:
    """Run ``cfg.n_restarts`` random-phase starts and keep the one with the lowest ``J``.

    Restart ``r`` draws from ``SeedSequence([rng_seed, r])`` so the result does
    not depend on ``workers``.
    """
    if beta is None:
        beta = solve_beta(mask, cfg.beta_method, cfg.beta_iters, cfg.beta_step)
    runs = _map(lambda r: _run_gs(beta.beta, mask, cfg, restart_rng(cfg.rng_seed, r), r), range(cfg.n_restarts), workers)
    return min(runs, key=lambda res: (res.objective, res.restart))


def optimize_all(
    mask: SpectrumMask, cfg: OptimizerConfig, beta: PowerSpectrum | None = None, workers: int | None = None
) -> list[OptResult]:
    """Every restart, in restart order."""
    if beta is None:
        beta = solve_beta(mask, cfg.beta_method, cfg.beta_iters, cfg.beta_step)
    return _map(lambda r: _run_gs(beta.beta, mask, cfg, restart_rng(cfg.rng_seed, r), r), range(cfg.n_restarts), workers)


def pareto_sweep(
    mask: SpectrumMask, lambdas: Iterable[float], cfg: OptimizerConfig, workers: int | None = None
) -> list[OptResult]:
    """One best-of-restarts result per penalty factor, sharing a single power spectrum."""
    lambdas = list(lambdas)
    if not lambdas:
        raise ValueError("empty lambda grid")
    beta = solve_beta(mask, cfg.beta_method, cfg.beta_iters, cfg.beta_step)
    return [optimize_waveform(mask, cfg.replace(lam=float(lam)), beta, workers) for lam in lambdas]


def _map(fn, items: Sequence | range, workers: int | None):
    items = list(items)
    workers = max_workers() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
