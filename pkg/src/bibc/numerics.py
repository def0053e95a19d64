"""Complex linear-algebra primitives shared by the estimators.

All functions are pure and return fresh arrays. Matrices are plain
``numpy.ndarray`` objects of dtype ``complex128``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_RANK_TOL = 1e-12
PROJECTOR_TOL = 1e-10


class InvalidInputError(ValueError):
    """Raised when an argument violates a documented precondition."""


def as_matrix(A, name: str = "A") -> np.ndarray:
    """Return ``A`` as a finite 2-D complex128 array."""
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2 or A.size == 0:
        raise InvalidInputError(f"{name} must be a non-empty 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return A


@dataclass(frozen=True)
class ThinSvd:
    """Truncated SVD ``A = U diag(s) V^H`` keeping the numerical rank."""

    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray

    @property
    def r(self) -> int:
        return self.singular_values.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.singular_values) @ self.V.conj().T


def _fix_phase(U: np.ndarray, V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Largest-magnitude entry of each right singular vector made real-positive.
    idx = np.argmax(np.abs(V), axis=0)
    pivot = V[idx, np.arange(V.shape[1])]
    mag = np.abs(pivot)
    phase = np.where(mag > 0, pivot / np.where(mag > 0, mag, 1.0), 1.0)
    return U * phase.conj(), V * phase.conj()


def svd_thin(A, rank_tol: float = DEFAULT_RANK_TOL) -> ThinSvd:
    """Thin SVD truncated to the numerical rank.

    Singular values not exceeding ``rank_tol * s_max`` are discarded. The
    phase of each right singular vector is fixed so that its largest
    entry is real and positive (the left vector is rotated to match), which
    makes outputs reproducible across LAPACK builds.
    """
    A = as_matrix(A)
    if rank_tol < 0:
        raise InvalidInputError("rank_tol must be non-negative")
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    r = int(np.count_nonzero(s > rank_tol * s[0])) if s[0] > 0 else 0
    U, V = _fix_phase(U[:, :r], Vh[:r].conj().T)
    return ThinSvd(U=U, singular_values=s[:r].copy(), V=V)


@dataclass(frozen=True)
class RankOneFit:
    u: np.ndarray
    delta: float
    v: np.ndarray
    degenerate: bool = False

    def matrix(self) -> np.ndarray:
        return self.delta * np.outer(self.u, self.v.conj())


def best_rank_one(A) -> RankOneFit:
    """Best Frobenius-norm rank-one approximation ``u * delta * v^H``.

    For the zero matrix ``delta`` is 0, ``u`` and ``v`` are the first
    canonical basis vectors and ``degenerate`` is set.
    """
    A = as_matrix(A)
    n, m = A.shape
    if not np.any(A):
        u = np.zeros(n, dtype=np.complex128)
        v = np.zeros(m, dtype=np.complex128)
        u[0] = v[0] = 1.0
        return RankOneFit(u=u, delta=0.0, v=v, degenerate=True)
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    U1, V1 = _fix_phase(U[:, :1], Vh[:1].conj().T)
    return RankOneFit(u=U1[:, 0], delta=float(s[0]), v=V1[:, 0])


def check_projector(P, tol: float = PROJECTOR_TOL) -> np.ndarray:
    """Validate that ``P`` is an orthogonal projector and return it."""
    P = as_matrix(P, "P")
    if P.shape[0] != P.shape[1]:
        raise InvalidInputError(f"projector must be square, got {P.shape}")
    if np.linalg.norm(P @ P - P) > tol or np.linalg.norm(P - P.conj().T) > tol:
        raise InvalidInputError("P is not an orthogonal projector (idempotence/Hermitian check failed)")
    return P


def solve_identity_plus_projector(a: float, b: float, P, RHS, check: bool = True) -> np.ndarray:
    """Return ``RHS @ inv(a*I + b*P)`` for an orthogonal projector ``P``.

    Uses the closed form ``inv(a*I + b*P) = I/a - b/(a*(a+b)) * P``.
    """
    if not a > 0:
        raise InvalidInputError(f"a must be positive, got {a}")
    if b < 0:
        raise InvalidInputError(f"b must be non-negative, got {b}")
    P = check_projector(P) if check else np.asarray(P)
    RHS = np.asarray(RHS, dtype=np.complex128)
    if RHS.shape[-1] != P.shape[0]:
        raise InvalidInputError(f"RHS has {RHS.shape[-1]} columns, projector is {P.shape[0]}x{P.shape[0]}")
    return RHS / a - (b / (a * (a + b))) * (RHS @ P)
