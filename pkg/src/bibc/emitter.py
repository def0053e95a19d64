"""PanA side: least-squares direct-channel estimate and the nullspace projector."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import InvalidInputError, _fix_phase, as_matrix

DEGENERATE_GAP = 1e-10


class InvalidKError(ValueError):
    pass


@dataclass(frozen=True)
class Projector:
    """Scaled orthogonal projector ``P_s = lam * P`` with ``P = Q Q^H`` of rank ``M - K``."""

    P: np.ndarray
    Q: np.ndarray
    K: int
    V_K: np.ndarray
    ambiguous: bool = False

    @property
    def M(self) -> int:
        return self.P.shape[0]

    @property
    def lam(self) -> float:
        return float(np.sqrt(self.M / (self.M - self.K)))

    @property
    def P_s(self) -> np.ndarray:
        return self.lam * self.P

    @classmethod
    def identity(cls, M: int) -> "Projector":
        eye = np.eye(M, dtype=np.complex128)
        return cls(P=eye, Q=eye.copy(), K=0, V_K=np.zeros((M, 0), dtype=np.complex128))


def ls_estimate_direct(Yp, Phi) -> np.ndarray:
    """LS estimate of ``G_BA`` (M x N) from stacked P1 blocks (J_p, M, tau_p).

    ``G_BA_hat = (1/J_p) sum_j Yp_j Phi^H (Phi Phi^H)^-1``; the reader-side
    estimate of ``G_AB`` is its transpose.
    """
    Yp = np.asarray(Yp, dtype=np.complex128)
    Phi = as_matrix(Phi, "Phi")
    if Yp.ndim != 3 or Yp.shape[2] != Phi.shape[1]:
        raise InvalidInputError(f"Yp shape {Yp.shape} does not match Phi {Phi.shape}")
    if Yp.shape[0] < 1:
        raise InvalidInputError("need at least one P1 slot")
    gram = Phi @ Phi.conj().T
    return np.linalg.solve(gram.T, (Yp.mean(axis=0) @ Phi.conj().T).T).T


def build_projector(G_hat_AB, K: int) -> Projector:
    """Project away the ``K`` dominant right singular directions of ``G_hat_AB``.

    Q is read from the full unitary V of the SVD, so ``Q Q^H = I - V_K V_K^H``
    holds to machine precision. The result is flagged ``ambiguous`` when
    the K-th and (K+1)-th singular values coincide within 1e-10, in which
    case only the nulled subspace dimension, not its orientation, is
    determined by the data.
    """
    G = as_matrix(G_hat_AB, "G_hat_AB")
    M = G.shape[1]
    if not 0 <= K < M:
        raise InvalidKError(f"K must satisfy 0 <= K < M={M}, got K={K}")
    if K == 0:
        return Projector.identity(M)
    _, s, Vh = np.linalg.svd(G, full_matrices=True)
    V = Vh.conj().T
    _, V = _fix_phase(np.zeros((0, M)), V)
    V_K = V[:, :K]
    Q = V[:, K:]
    P = np.eye(M, dtype=np.complex128) - V_K @ V_K.conj().T
    s_full = np.concatenate([s, np.zeros(M - s.size)])
    ambiguous = bool(abs(s_full[K - 1] - s_full[K]) < DEGENERATE_GAP)
    return Projector(P=P, Q=Q, K=K, V_K=V_K, ambiguous=ambiguous)
