"""PanB side: parameter estimation under both hypotheses and the approximate GLRT.

These are the readable reference implementations. Monte Carlo loops use
the algebraically simplified kernels in :mod:`bibc._kernels`, which are
checked against this module in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .emitter import Projector
from .numerics import InvalidInputError, best_rank_one, solve_identity_plus_projector
from .waveform import InvalidPlanError, Observation, PhasePlan, Waveforms

DEFAULT_EPSILON = 1e-8
DEFAULT_MAX_ITERS = 50


@dataclass(frozen=True)
class ReaderSideInfo:
    """Everything the reader knows besides the P2 samples."""

    Phi: np.ndarray
    Psi: np.ndarray
    projector: Projector
    plan: PhasePlan
    alpha_p: float
    alpha_d: float

    @classmethod
    def from_parts(cls, wf: Waveforms, projector: Projector, plan: PhasePlan) -> "ReaderSideInfo":
        return cls(wf.Phi, wf.Psi, projector, plan, wf.alpha_p, wf.alpha_d)

    @property
    def P(self) -> np.ndarray:
        return self.projector.P

    @property
    def P_s(self) -> np.ndarray:
        return self.projector.P_s

    @property
    def Q(self) -> np.ndarray:
        return self.projector.Q

    @property
    def lam(self) -> float:
        return self.projector.lam


@dataclass(frozen=True)
class H1Estimate:
    """Output of the cyclic estimator.

    ``G_AB_hat`` is ``None`` in P2-only mode, where only the product
    ``H_DL = G_AB P_s`` is identifiable.
    """

    G_AB_hat: np.ndarray | None
    H_DL_hat: np.ndarray
    H_BL_hat: np.ndarray
    iterations: int
    final_delta: float
    converged: bool
    objective_history: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class GlrtResult:
    log_glr: float
    decision: int
    threshold: float
    h0_estimate: np.ndarray
    h1_estimate: H1Estimate


def _check(obs: Observation, info: ReaderSideInfo) -> None:
    plan = info.plan
    if obs.Y.shape[0] != plan.J_d or obs.Yp.shape[0] != plan.J_p:
        raise InvalidInputError(
            f"observation has {obs.Yp.shape[0]} P1 / {obs.Y.shape[0]} P2 slots, plan expects {plan.J_p} / {plan.J_d}"
        )
    if obs.Y.shape[0] and obs.Y.shape[2] != info.Psi.shape[1]:
        raise InvalidInputError("P2 block length does not match Psi")
    if obs.Yp.shape[0] and obs.Yp.shape[2] != info.Phi.shape[1]:
        raise InvalidInputError("P1 block length does not match Phi")


def _p1_term(obs: Observation, info: ReaderSideInfo) -> np.ndarray:
    # sum_j Phi^* (Yp_j)^T, N x M
    return np.einsum("nt,jmt->nm", info.Phi.conj(), obs.Yp)


def _joint_ls(obs, info, p2_blocks, count_d) -> np.ndarray:
    rhs = _p1_term(obs, info)
    if len(p2_blocks):
        rhs = rhs + np.sum(p2_blocks, axis=0) @ info.Psi.conj().T @ info.P_s
    a = info.alpha_p * info.plan.J_p
    # P2 Gram term: alpha_d * count * P_s P_s^H = alpha_d * count * lam^2 * P
    b = info.alpha_d * count_d * info.lam**2
    return solve_identity_plus_projector(a, b, info.P, rhs, check=False)


def estimate_gab_h0(obs: Observation, info: ReaderSideInfo) -> np.ndarray:
    """Joint P1+P2 LS estimate of ``G_AB`` assuming no BD."""
    _check(obs, info)
    return _joint_ls(obs, info, obs.Y, info.plan.J_d)


def estimate_gab_h1_initial(obs: Observation, info: ReaderSideInfo) -> np.ndarray:
    """Same as :func:`estimate_gab_h0` but using only the silent P2 slots."""
    _check(obs, info)
    silent = obs.Y[info.plan.gamma_d == 0]
    return _joint_ls(obs, info, silent, info.plan.J_d0)


def _fit_hbl(obs: Observation, info: ReaderSideInfo, direct: np.ndarray) -> np.ndarray:
    plan = info.plan
    if plan.J_d1 == 0:
        raise InvalidPlanError("no active (gamma = 1) slot in P2; backscatter link not estimable")
    active = obs.Y[plan.gamma_d == 1]
    residual = active - (direct @ info.Psi)[None]
    Z = np.sum(residual, axis=0) @ info.Psi.conj().T @ info.Q / (plan.J_d1 * info.alpha_d * info.lam)
    fit = best_rank_one(Z)
    return info.lam * fit.matrix() @ info.Q.conj().T


def estimate_hbl(obs: Observation, info: ReaderSideInfo, G_AB_hat) -> np.ndarray:
    """Rank-one, row-space-constrained estimate of ``H_BL = g_CB g_AC^T P_s``."""
    _check(obs, info)
    return _fit_hbl(obs, info, np.asarray(G_AB_hat) @ info.P_s)


def refine_gab_h1(obs: Observation, info: ReaderSideInfo, H_BL_hat) -> np.ndarray:
    """LS estimate of ``G_AB`` from all slots after removing the backscatter term."""
    _check(obs, info)
    compensated = obs.Y - info.plan.gamma_d[:, None, None] * (np.asarray(H_BL_hat) @ info.Psi)[None]
    return _joint_ls(obs, info, compensated, info.plan.J_d)


def objective_h1(obs: Observation, info: ReaderSideInfo, G_AB, H_BL) -> float:
    """Negative log-likelihood (up to constants) of the joint H1 model."""
    p1 = obs.Yp - (G_AB.T @ info.Phi)[None]
    model = (G_AB @ info.P_s @ info.Psi)[None] + info.plan.gamma_d[:, None, None] * (H_BL @ info.Psi)[None]
    return float(np.sum(np.abs(p1) ** 2) + np.sum(np.abs(obs.Y - model) ** 2))


def cyclic_h1_estimate(
    obs: Observation,
    info: ReaderSideInfo,
    epsilon: float = DEFAULT_EPSILON,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> H1Estimate:
    """Alternate the ``H_BL`` fit and the ``G_AB`` refit until the squared
    Frobenius change in ``G_AB`` drops to ``epsilon`` or ``max_iters`` cycles ran.
    """
    if not epsilon > 0 or max_iters < 1:
        raise InvalidInputError("epsilon must be > 0 and max_iters >= 1")
    G = estimate_gab_h1_initial(obs, info)
    H = estimate_hbl(obs, info, G)
    history = [objective_h1(obs, info, G, H)]
    delta = np.inf
    it = 0
    while it < max_iters:
        G_new = refine_gab_h1(obs, info, H)
        H = estimate_hbl(obs, info, G_new)
        delta = float(np.linalg.norm(G_new - G) ** 2)
        G = G_new
        it += 1
        history.append(objective_h1(obs, info, G, H))
        if delta <= epsilon:
            break
    return H1Estimate(
        G_AB_hat=G,
        H_DL_hat=G @ info.P_s,
        H_BL_hat=H,
        iterations=it,
        final_delta=delta,
        converged=delta <= epsilon,
        objective_history=history,
    )


def glrt_log(obs: Observation, info: ReaderSideInfo, h0_est, h1_est: H1Estimate) -> float:
    """Log GLR in the expanded trace form."""
    G1, H = h1_est.G_AB_hat, h1_est.H_BL_hat
    B = h0_est @ info.P_s @ info.Psi
    A = (G1 @ info.P_s @ info.Psi)[None] + info.plan.gamma_d[:, None, None] * (H @ info.Psi)[None]
    C1 = G1.T @ info.Phi
    C2 = h0_est.T @ info.Phi
    total = _expanded_terms(obs.Y, A, B) + _expanded_terms(obs.Yp, C1[None], C2)
    return float(total)


def _expanded_terms(Y, A, B) -> float:
    # sum_j 2 Re Tr{Y_j (A_j - B)^H} - ||A_j||^2 + ||B||^2
    if Y.shape[0] == 0:
        return 0.0
    A = np.broadcast_to(A, Y.shape)
    cross = 2.0 * np.real(np.vdot(A - B[None], Y))
    return cross - np.sum(np.abs(A) ** 2) + Y.shape[0] * np.sum(np.abs(B) ** 2)


def detect(log_glr: float, eta: float) -> int:
    """1 (H1) when ``log_glr > log(eta)``; ties go to H0."""
    if not eta > 0:
        raise InvalidInputError(f"eta must be positive, got {eta}")
    return int(log_glr > np.log(eta))


def glrt(
    obs: Observation,
    info: ReaderSideInfo,
    eta: float = 1.0,
    epsilon: float = DEFAULT_EPSILON,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> GlrtResult:
    """Full detector using both P1 and P2 observations."""
    g0 = estimate_gab_h0(obs, info)
    h1 = cyclic_h1_estimate(obs, info, epsilon, max_iters)
    stat = glrt_log(obs, info, g0, h1)
    return GlrtResult(stat, detect(stat, eta), eta, g0, h1)


# P2-only detector: P1 samples unavailable at the reader, so only
# H_DL = G_AB P_s can be estimated.


def _p2only_hdl(Y_blocks, info: ReaderSideInfo, count: int) -> np.ndarray:
    if count == 0:
        return np.zeros((Y_blocks.shape[1], info.P.shape[0]), dtype=np.complex128)
    return np.sum(Y_blocks, axis=0) @ info.Psi.conj().T @ info.P / (count * info.alpha_d)


def p2only_estimate_hdl_h0(obs: Observation, info: ReaderSideInfo) -> np.ndarray:
    """``(1/(J_d alpha_d)) sum_j Y_j Psi^H P``."""
    _check(obs, info)
    return _p2only_hdl(obs.Y, info, info.plan.J_d)


def objective_p2only(obs: Observation, info: ReaderSideInfo, H_DL, H_BL) -> float:
    model = (H_DL @ info.Psi)[None] + info.plan.gamma_d[:, None, None] * (H_BL @ info.Psi)[None]
    return float(np.sum(np.abs(obs.Y - model) ** 2))


def p2only_h1_estimate(
    obs: Observation,
    info: ReaderSideInfo,
    epsilon: float = DEFAULT_EPSILON,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> H1Estimate:
    """Cyclic estimate of ``(H_DL, H_BL)`` from P2 only.

    Starts from the silent slots, then alternates the rank-one ``H_BL``
    fit with a projected LS refit of ``H_DL`` over all P2 slots.
    """
    if not epsilon > 0 or max_iters < 1:
        raise InvalidInputError("epsilon must be > 0 and max_iters >= 1")
    _check(obs, info)
    plan = info.plan
    D = _p2only_hdl(obs.Y[plan.gamma_d == 0], info, plan.J_d0)
    H = _fit_hbl(obs, info, D)
    history = [objective_p2only(obs, info, D, H)]
    delta = np.inf
    it = 0
    while it < max_iters:
        compensated = obs.Y - plan.gamma_d[:, None, None] * (H @ info.Psi)[None]
        D_new = _p2only_hdl(compensated, info, plan.J_d)
        H = _fit_hbl(obs, info, D_new)
        delta = float(np.linalg.norm(D_new - D) ** 2)
        D = D_new
        it += 1
        history.append(objective_p2only(obs, info, D, H))
        if delta <= epsilon:
            break
    return H1Estimate(None, D, H, it, delta, delta <= epsilon, history)


def p2only_glrt_log(obs: Observation, info: ReaderSideInfo, hdl_h0, h1_est: H1Estimate) -> float:
    B = hdl_h0 @ info.Psi
    A = (h1_est.H_DL_hat @ info.Psi)[None] + info.plan.gamma_d[:, None, None] * (h1_est.H_BL_hat @ info.Psi)[None]
    return float(_expanded_terms(obs.Y, A, B))


def p2only_glrt(
    obs: Observation,
    info: ReaderSideInfo,
    epsilon: float = DEFAULT_EPSILON,
    max_iters: int = DEFAULT_MAX_ITERS,
    eta: float = 1.0,
) -> GlrtResult:
    """Detector that ignores the P1 samples."""
    h0 = p2only_estimate_hdl_h0(obs, info)
    h1 = p2only_h1_estimate(obs, info, epsilon, max_iters)
    stat = p2only_glrt_log(obs, info, h0, h1)
    return GlrtResult(stat, detect(stat, eta), eta, h0, h1)
