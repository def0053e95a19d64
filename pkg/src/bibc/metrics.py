"""Evaluation quantities: dynamic range, radiated energy pattern, empirical ROC."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .emitter import Projector, build_projector
from .numerics import InvalidInputError
from .scene import ChannelSet, steering_vector
from .waveform import PhasePlan, Waveforms, complex_normal

PROJECTION_MODES = ("none", "perfect", "estimated")
DETECTOR_MODES = ("full", "p2only")

# Independent RNG stream labels; a trial's generator is seeded with
# (seed, stream, trial[, hypothesis]).
STREAM_PROJECTION = 1
STREAM_ROC = 2


class DegenerateDenominatorError(ArithmeticError):
    pass


def trial_rng(seed: int, stream: int, *index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), stream, *map(int, index)])


@dataclass(frozen=True)
class DynamicRangeReport:
    zeta_linear: float
    mode: str
    trials: int
    K: int = 0

    @property
    def zeta_db(self) -> float:
        return float(10.0 * np.log10(self.zeta_linear))


def zeta_ratio(G_AB, cascade, P_s, Psi) -> np.ndarray:
    """Received (direct + backscatter) over backscatter energy for one or a stack of ``P_s``."""
    tx = np.asarray(P_s) @ Psi
    direct = np.sum(np.abs(G_AB @ tx) ** 2, axis=(-2, -1))
    bsc = np.sum(np.abs(cascade @ tx) ** 2, axis=(-2, -1))
    scale = np.sum(np.abs(cascade) ** 2) * np.sum(np.abs(Psi) ** 2)
    if np.any(bsc <= 1e-24 * scale):
        raise DegenerateDenominatorError("backscatter component is nulled by the projector")
    return (direct + bsc) / bsc


def estimated_projections(
    ch: ChannelSet, wf: Waveforms, plan: PhasePlan, K: int, trials: int, seed: int
) -> np.ndarray:
    """Stack (trials, M, M) of scaled projectors built from noisy P1 estimates."""
    M, N = ch.M, ch.N
    clean = ch.G_BA @ wf.Phi
    noise = np.empty((trials, plan.J_p, M, plan.tau_p), dtype=np.complex128)
    for t in range(trials):
        noise[t] = complex_normal(trial_rng(seed, STREAM_PROJECTION, t), (plan.J_p, M, plan.tau_p))
    Yp_mean = clean[None] + noise.mean(axis=1)
    # G_AB_hat = (mean Yp Phi^H / alpha_p)^T, using Phi Phi^H = alpha_p I
    G_hat = np.swapaxes(Yp_mean @ wf.Phi.conj().T / wf.alpha_p, -1, -2)
    _, _, Vh = np.linalg.svd(G_hat)
    V_K = np.swapaxes(Vh[:, :K, :], -1, -2).conj()
    P = np.eye(M)[None] - V_K @ np.swapaxes(V_K, -1, -2).conj()
    return np.sqrt(M / (M - K)) * P


def dynamic_range(
    ch: ChannelSet,
    wf: Waveforms,
    plan: PhasePlan,
    mode: str,
    K: int = 0,
    trials: int = 1,
    seed: int = 0,
) -> DynamicRangeReport:
    """Dynamic range of the P2 received signal.

    ``none`` and ``perfect`` are deterministic. ``estimated`` averages the
    linear ratio over ``trials`` independent P1 noise draws, each
    producing its own channel estimate and projector.
    """
    if mode not in PROJECTION_MODES:
        raise InvalidInputError(f"mode must be one of {PROJECTION_MODES}, got {mode!r}")
    if trials < 1:
        raise InvalidInputError("trials must be >= 1")
    cascade = ch.cascade
    if mode == "none":
        z = zeta_ratio(ch.G_AB, cascade, np.eye(ch.M), wf.Psi)
        return DynamicRangeReport(float(z), mode, 1, 0)
    if mode == "perfect":
        z = zeta_ratio(ch.G_AB, cascade, build_projector(ch.G_AB, K).P_s, wf.Psi)
        return DynamicRangeReport(float(z), mode, 1, K)
    stack = estimated_projections(ch, wf, plan, K, trials, seed)
    z = zeta_ratio(ch.G_AB, cascade, stack, wf.Psi)
    return DynamicRangeReport(float(np.mean(z)), mode, trials, K)


def radiation_pattern(projector: Projector, theta_grid, d_ant: float, alpha_d: float) -> np.ndarray:
    """Energy radiated per P2 slot toward each departure angle.

    Returns an array of shape (len(theta_grid), 2) with columns
    ``(theta, E_t)`` where ``E_t = alpha_d M/(M-K) ||g(theta)^T P||^2``.
    """
    theta = np.atleast_1d(np.asarray(theta_grid, dtype=float))
    if theta.size == 0:
        raise InvalidInputError("theta grid must be non-empty")
    M, K = projector.M, projector.K
    g = np.stack([steering_vector(t, M, d_ant)[:, 0] for t in theta])
    e_t = alpha_d * M / (M - K) * np.sum(np.abs(g @ projector.P) ** 2, axis=1)
    return np.column_stack([theta, e_t])


@dataclass(frozen=True)
class Scenario:
    """Everything needed to simulate one detector configuration."""

    channels: ChannelSet
    plan: PhasePlan
    waveforms: Waveforms
    K: int
    projection_mode: str = "estimated"
    detector_mode: str = "full"
    epsilon: float = 1e-8
    max_iters: int = 50

    def __post_init__(self):
        if self.projection_mode not in PROJECTION_MODES:
            raise InvalidInputError(f"projection_mode must be one of {PROJECTION_MODES}")
        if self.detector_mode not in DETECTOR_MODES:
            raise InvalidInputError(f"detector_mode must be one of {DETECTOR_MODES}")


@dataclass(frozen=True)
class RocCurve:
    """Empirical ROC; ``points`` columns are ``(threshold_log, p_fa, p_d)``."""

    points: np.ndarray
    trials_h0: int
    trials_h1: int
    h0_stats: np.ndarray = field(default=None, repr=False)
    h1_stats: np.ndarray = field(default=None, repr=False)

    @property
    def p_fa(self) -> np.ndarray:
        return self.points[:, 1]

    @property
    def p_d(self) -> np.ndarray:
        return self.points[:, 2]


class _TrialContext:
    """Per-scenario constants shared read-only by all trials."""

    def __init__(self, scn: Scenario):
        ch, wf, plan = scn.channels, scn.waveforms, scn.plan
        self.scn = scn
        self.clean_p1 = np.ascontiguousarray(ch.G_BA @ wf.Phi)
        self.gamma_d = np.ascontiguousarray(plan.gamma_d)
        self.Phi = np.ascontiguousarray(wf.Phi)
        self.Psi = np.ascontiguousarray(wf.Psi)
        self.M = ch.M
        if scn.projection_mode == "none":
            self.fixed = Projector.identity(ch.M)
        elif scn.projection_mode == "perfect":
            self.fixed = build_projector(ch.G_AB, scn.K)
        else:
            self.fixed = None
        self.lam = float(np.sqrt(ch.M / (ch.M - scn.K))) if self.fixed is None else self.fixed.lam

    def statistic(self, trial: int, hypothesis: int, seed: int) -> tuple[float, int]:
        scn = self.scn
        ch, plan, wf = scn.channels, scn.plan, scn.waveforms
        rng = trial_rng(seed, STREAM_ROC, trial, hypothesis)
        Yp = self.clean_p1[None] + complex_normal(rng, (plan.J_p, ch.M, plan.tau_p))
        W = complex_normal(rng, (plan.J_d, ch.N, plan.tau_d))
        if self.fixed is not None:
            Q = np.ascontiguousarray(self.fixed.Q)
        else:
            G_hat = _kernels.ls_direct_ab(Yp, self.Phi, wf.alpha_p)
            Q = _kernels.nullspace_basis(G_hat, scn.K)
        tx = self.lam * (Q @ (Q.conj().T @ self.Psi))
        Y = (ch.G_AB @ tx)[None] + W
        if hypothesis:
            Y += self.gamma_d[:, None, None] * (ch.cascade @ tx)[None]
        if scn.detector_mode == "full":
            return _kernels.glrt_full(
                Yp, Y, self.Phi, self.Psi, Q, self.lam, self.gamma_d,
                wf.alpha_p, wf.alpha_d, scn.epsilon, scn.max_iters,
            )
        return _kernels.glrt_p2only(
            Y, self.Psi, Q, self.lam, self.gamma_d, wf.alpha_d, scn.epsilon, scn.max_iters
        )


def simulate_statistics(scn: Scenario, trials: int, seed: int = 0, threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Log-GLR samples under H0 and H1, one per trial and hypothesis.

    Trial ``t`` under hypothesis ``h`` always draws from the same RNG
    stream, so results do not depend on ``threads`` and different
    scenarios evaluated with the same seed share their noise.
    """
    if trials < 1:
        raise InvalidInputError("trials must be >= 1")
    ctx = _TrialContext(scn)
    out = np.empty((2, trials))

    def run(bounds):
        lo, hi = bounds
        for t in range(lo, hi):
            for h in (0, 1):
                out[h, t] = ctx.statistic(t, h, seed)[0]

    threads = max(1, int(threads))
    edges = np.linspace(0, trials, min(threads * 4, trials) + 1).astype(int)
    chunks = list(zip(edges[:-1], edges[1:]))
    if threads == 1:
        for c in chunks:
            run(c)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, chunks))
    return out[0].copy(), out[1].copy()


def default_thresholds(h0, h1, count: int = 512) -> np.ndarray:
    pooled = np.concatenate([h0, h1])
    q = np.quantile(pooled, np.linspace(0.0, 1.0, count))
    return np.concatenate([[-np.inf], np.unique(q), [np.inf]])


def roc_from_statistics(h0, h1, thresholds) -> RocCurve:
    """Sweep log-domain thresholds over cached statistics (decide H1 when stat > threshold)."""
    h0 = np.sort(np.asarray(h0, dtype=float))
    h1 = np.sort(np.asarray(h1, dtype=float))
    thr = np.sort(np.asarray(thresholds, dtype=float))
    p_fa = (h0.size - np.searchsorted(h0, thr, side="right")) / h0.size
    p_d = (h1.size - np.searchsorted(h1, thr, side="right")) / h1.size
    return RocCurve(np.column_stack([thr, p_fa, p_d]), h0.size, h1.size, h0, h1)


def pd_at_pfa(h0, h1, p_fa: float) -> float:
    """Detection probability at the threshold admitting at most ``p_fa`` false alarms."""
    h0 = np.sort(np.asarray(h0, dtype=float))
    allowed = int(np.floor(p_fa * h0.size + 1e-9))
    thr = h0[h0.size - allowed - 1] if allowed < h0.size else -np.inf
    return float(np.mean(np.asarray(h1) > thr))


def roc_curve(
    scn: Scenario,
    trials_per_hypothesis: int,
    thresholds=None,
    seed: int = 0,
    threads: int = 1,
) -> RocCurve:
    """Paired Monte Carlo ROC. ``thresholds`` are ``log(eta)`` values; ``None`` picks them from the data."""
    h0, h1 = simulate_statistics(scn, trials_per_hypothesis, seed, threads)
    if thresholds is None:
        thresholds = default_thresholds(h0, h1)
    return roc_from_statistics(h0, h1, thresholds)
