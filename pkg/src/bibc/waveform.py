"""Pilot/probe design, slot plans, power calibration and the noisy forward model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import InvalidInputError
from .scene import ChannelSet, mean_path_gains

GAMMA_MEAN = 0.5  # average reflection coefficient in P2 under the even split


class InvalidPlanError(ValueError):
    pass


@dataclass(frozen=True)
class PhasePlan:
    """Slot structure. Slot indices are 0-based; P1 occupies ``0..J_p-1``."""

    J_p: int
    tau_p: int
    J_d: int
    tau_d: int
    gamma: np.ndarray

    def __post_init__(self):
        gamma = np.asarray(self.gamma, dtype=np.int64)
        if gamma.shape != (self.J_p + self.J_d,):
            raise InvalidPlanError(f"gamma must have length J_p + J_d = {self.J_p + self.J_d}")
        if np.any((gamma != 0) & (gamma != 1)):
            raise InvalidPlanError("gamma entries must be 0 or 1")
        if np.any(gamma[: self.J_p]):
            raise InvalidPlanError("the BD must be silent (gamma = 0) in every P1 slot")
        object.__setattr__(self, "gamma", gamma)

    @property
    def J(self) -> int:
        return self.J_p + self.J_d

    @property
    def S_p(self) -> np.ndarray:
        return np.arange(self.J_p)

    @property
    def S_d(self) -> np.ndarray:
        return np.arange(self.J_p, self.J)

    @property
    def gamma_d(self) -> np.ndarray:
        """Reflection pattern restricted to P2 (length ``J_d``)."""
        return self.gamma[self.J_p :]

    @property
    def S_d0(self) -> np.ndarray:
        return self.S_d[self.gamma_d == 0]

    @property
    def S_d1(self) -> np.ndarray:
        return self.S_d[self.gamma_d == 1]

    @property
    def J_d0(self) -> int:
        return int(np.count_nonzero(self.gamma_d == 0))

    @property
    def J_d1(self) -> int:
        return int(np.count_nonzero(self.gamma_d == 1))

    def check_dimensions(self, M: int, N: int) -> None:
        if self.tau_p < N:
            raise InvalidPlanError(f"tau_p >= N required (tau_p={self.tau_p}, N={N})")
        if self.tau_d < M:
            raise InvalidPlanError(f"tau_d >= M required (tau_d={self.tau_d}, M={M})")


def make_phase_plan(J_p: int, J_d: int, tau_p: int = 16, tau_d: int = 16, pattern=None) -> PhasePlan:
    """Plan with a silent P1 and, by default, an alternating 0,1,0,1,... P2 pattern."""
    if J_p < 0 or J_d < 1:
        raise InvalidPlanError(f"need J_p >= 0 and J_d >= 1, got J_p={J_p}, J_d={J_d}")
    if pattern is None:
        if J_d % 2:
            raise InvalidPlanError(f"default pattern needs an even J_d, got {J_d}")
        pattern = np.arange(J_d) % 2
    pattern = np.asarray(pattern, dtype=np.int64)
    if pattern.shape != (J_d,):
        raise InvalidPlanError(f"pattern must have length J_d={J_d}")
    gamma = np.concatenate([np.zeros(J_p, dtype=np.int64), pattern])
    return PhasePlan(J_p=J_p, tau_p=tau_p, J_d=J_d, tau_d=tau_d, gamma=gamma)


def _orthogonal_rows(rows: int, length: int, p_t: float) -> np.ndarray:
    if length < rows:
        raise InvalidPlanError(f"need at least {rows} symbols per slot, got {length}")
    if not p_t > 0:
        raise InvalidInputError(f"transmit power must be positive, got {p_t}")
    k = np.arange(length)
    dft = np.exp(-2j * np.pi * np.outer(np.arange(rows), k) / length)
    return np.sqrt(p_t / rows) * dft


def make_pilot(N: int, tau_p: int, p_t: float) -> np.ndarray:
    """Pilot matrix Phi (N x tau_p) with ``Phi Phi^H = (p_t tau_p / N) I``."""
    return _orthogonal_rows(N, tau_p, p_t)


def make_probe(M: int, tau_d: int, p_t: float) -> np.ndarray:
    """Probe matrix Psi (M x tau_d) with ``Psi Psi^H = (p_t tau_d / M) I``."""
    return _orthogonal_rows(M, tau_d, p_t)


@dataclass(frozen=True)
class Waveforms:
    Phi: np.ndarray
    Psi: np.ndarray
    p_t_phase1: float
    p_t_phase2: float

    @property
    def alpha_p(self) -> float:
        return self.p_t_phase1 * self.Phi.shape[1] / self.Phi.shape[0]

    @property
    def alpha_d(self) -> float:
        return self.p_t_phase2 * self.Psi.shape[1] / self.Psi.shape[0]


def make_waveforms(M: int, N: int, plan: PhasePlan, p_t_phase1: float, p_t_phase2: float) -> Waveforms:
    plan.check_dimensions(M, N)
    return Waveforms(
        Phi=make_pilot(N, plan.tau_p, p_t_phase1),
        Psi=make_probe(M, plan.tau_d, p_t_phase2),
        p_t_phase1=float(p_t_phase1),
        p_t_phase2=float(p_t_phase2),
    )


def calibrate_powers(ch: ChannelSet, plan: PhasePlan, snr_p: float, snr_d: float) -> tuple[float, float]:
    """Per-phase transmit powers meeting linear SNR targets at unit noise variance.

    ``SNR_p = beta_BA p_t J_p tau_p`` and
    ``SNR_d = beta_AC beta_CB p_t J_d tau_d * 0.5``.
    """
    if not (snr_p > 0 and snr_d > 0):
        raise InvalidInputError("SNR targets must be positive")
    beta_ba, beta_ac, beta_cb = mean_path_gains(ch)
    if beta_ba == 0 or beta_ac == 0 or beta_cb == 0:
        raise InvalidInputError("zero channel gain; cannot calibrate power")
    p1 = snr_p / (beta_ba * plan.J_p * plan.tau_p) if plan.J_p else 0.0
    p2 = snr_d / (beta_ac * beta_cb * plan.J_d * plan.tau_d * GAMMA_MEAN)
    return p1, p2


@dataclass(frozen=True)
class Observation:
    """Received blocks: ``Yp`` is (J_p, M, tau_p), ``Y`` is (J_d, N, tau_d)."""

    Yp: np.ndarray
    Y: np.ndarray


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """i.i.d. CN(0, 1) samples (variance 1/2 per real component)."""
    z = rng.standard_normal((2, *shape))
    return (z[0] + 1j * z[1]) * np.sqrt(0.5)


def transmit_phase1(ch: ChannelSet, wf: Waveforms, plan: PhasePlan, rng, noise: bool = True) -> np.ndarray:
    """P1 blocks ``G_BA Phi + W`` for every pilot slot, stacked (J_p, M, tau_p)."""
    clean = ch.G_BA @ wf.Phi
    Yp = np.broadcast_to(clean, (plan.J_p, *clean.shape)).copy()
    if noise:
        Yp += complex_normal(rng, Yp.shape)
    return Yp


def transmit_phase2(
    ch: ChannelSet,
    wf: Waveforms,
    plan: PhasePlan,
    P_s,
    rng,
    hypothesis: int = 1,
    noise: bool = True,
) -> np.ndarray:
    """P2 blocks stacked (J_d, N, tau_d). Under ``hypothesis=0`` the BD term is absent."""
    P_s = np.asarray(P_s)
    if P_s.shape != (ch.M, ch.M):
        raise InvalidInputError(f"P_s must be {ch.M}x{ch.M}, got {P_s.shape}")
    if hypothesis not in (0, 1):
        raise ValueError("hypothesis must be 0 (H0) or 1 (H1)")
    tx = P_s @ wf.Psi
    direct = ch.G_AB @ tx
    Y = np.broadcast_to(direct, (plan.J_d, *direct.shape)).copy()
    if hypothesis == 1:
        Y += plan.gamma_d[:, None, None] * (ch.cascade @ tx)[None]
    if noise:
        Y += complex_normal(rng, Y.shape)
    return Y
