"""Per-trial detector kernels for the Monte Carlo loops.

Each kernel is written in the numpy subset numba understands. When numba
is importable and ``BIBC_DISABLE_NUMBA`` is not set to a truthy value, the
kernels are compiled with ``@njit(nogil=True)`` so worker threads can run
them concurrently; otherwise the same functions execute as plain numpy.

The kernels use ``Psi Psi^H = alpha_d I`` to drop every product with Psi
from the iteration, e.g. ``(Y_j - g H Psi) Psi^H P_s = Y_j Psi^H P_s - g alpha_d H P_s``.
"""

from __future__ import annotations

import os

import numpy as np

DISABLE_ENV = "BIBC_DISABLE_NUMBA"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def _numba_disabled() -> bool:
    return os.environ.get(DISABLE_ENV, "").strip().lower() in {"1", "true", "yes", "on"}


USE_NUMBA = numba is not None and not _numba_disabled()


def _jit(fn):
    if USE_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


@_jit
def _cmatmul(A, B):
    return np.ascontiguousarray(A) @ np.ascontiguousarray(B)


@_jit
def _hermitian(A):
    return np.ascontiguousarray(A.conj().T)


@_jit
def _fro2(A):
    return np.sum(A.real**2 + A.imag**2)


@_jit
def _solve_structured(a, b, P, RHS):
    # RHS (a I + b P)^-1
    return RHS / a - (b / (a * (a + b))) * _cmatmul(RHS, P)


POWER_TOL = 1e-14
POWER_MAX_STEPS = 300


@_jit
def _rank_one_svd(Z):
    U, s, Vh = np.linalg.svd(Z, full_matrices=False)
    return np.ascontiguousarray(Vh[0, :].conj()), s[0]


@_jit
def _dominant_right(Z, v0):
    """Dominant right singular vector of Z, warm-started at ``v0``.

    Power iteration on ``Z^H Z``; falls back to a full SVD when the
    Rayleigh residual has not dropped below ``POWER_TOL`` in
    ``POWER_MAX_STEPS`` steps (near-degenerate top singular values).
    """
    C = _cmatmul(_hermitian(Z), Z)
    v = v0.copy()
    nv = np.sqrt(_fro2(v))
    if nv == 0.0:
        return _rank_one_svd(Z)[0]
    v = v / nv
    for _ in range(POWER_MAX_STEPS):
        w = _cmatmul(C, v.reshape(-1, 1))[:, 0]
        mu = np.sum((v.conj() * w).real)
        if mu <= 0.0:
            return _rank_one_svd(Z)[0]
        res = np.sqrt(_fro2(w - mu * v))
        v = w / np.sqrt(_fro2(w))
        if res <= POWER_TOL * mu:
            return v
    return _rank_one_svd(Z)[0]


@_jit
def _rank_one_hbl(Z, Qh, lam, v):
    # lam * u1 d1 v1^H Q^H == lam * (Z v1) v1^H Q^H
    Zv = _cmatmul(Z, v.reshape(-1, 1))
    row = _cmatmul(v.conj().reshape(1, -1), Qh)
    return lam * _cmatmul(Zv, row)


@_jit
def _fit(Z, Qh, lam, v0, warm):
    # Warm-started power iteration only pays off when compiled; the
    # interpreted path calls LAPACK directly.
    if _fro2(Z) == 0.0:
        return np.zeros((Z.shape[0], Qh.shape[1]), dtype=np.complex128), v0
    if warm and USE_NUMBA:
        v = _dominant_right(Z, v0)
    else:
        v = _rank_one_svd(Z)[0]
    return _rank_one_hbl(Z, Qh, lam, v), v


@_jit
def nullspace_basis(G_hat, K):
    """Orthonormal basis (M x (M-K)) of the complement of the top-K right singular vectors."""
    U, s, Vh = np.linalg.svd(G_hat, full_matrices=True)
    V = _hermitian(Vh)
    return np.ascontiguousarray(V[:, K:])


@_jit
def ls_direct_ab(Yp, Phi, alpha_p):
    """LS estimate of G_AB (N x M) from P1 blocks, using ``Phi Phi^H = alpha_p I``."""
    acc = np.zeros((Yp.shape[1], Yp.shape[2]), dtype=np.complex128)
    for j in range(Yp.shape[0]):
        acc += Yp[j]
    G_BA = _cmatmul(acc, _hermitian(Phi)) / (alpha_p * Yp.shape[0])
    return np.ascontiguousarray(G_BA.T)


@_jit
def glrt_full(Yp, Y, Phi, Psi, Q, lam, gamma_d, alpha_p, alpha_d, epsilon, max_iters):
    """Log GLR of the joint P1+P2 detector. Returns ``(log_glr, iterations)``."""
    Jp = Yp.shape[0]
    Jd = Y.shape[0]
    Qh = _hermitian(Q)
    P = _cmatmul(Q, Qh)
    Ps = lam * P
    PsiH = _hermitian(Psi)
    PhiC = np.ascontiguousarray(Phi.conj())

    S1 = np.zeros((Phi.shape[0], Psi.shape[0]), dtype=np.complex128)
    for j in range(Jp):
        S1 += _cmatmul(PhiC, np.ascontiguousarray(Yp[j].T))

    YPsiH_all = np.zeros((Phi.shape[0], Psi.shape[0]), dtype=np.complex128)
    YPsiH_silent = np.zeros_like(YPsiH_all)
    YPsiH_active = np.zeros_like(YPsiH_all)
    Jd0 = 0
    Jd1 = 0
    for j in range(Jd):
        t = _cmatmul(np.ascontiguousarray(Y[j]), PsiH)
        YPsiH_all += t
        if gamma_d[j] == 0:
            YPsiH_silent += t
            Jd0 += 1
        else:
            YPsiH_active += t
            Jd1 += 1

    a = alpha_p * Jp
    lam2 = lam * lam
    G0 = _solve_structured(a, alpha_d * Jd * lam2, P, S1 + _cmatmul(YPsiH_all, Ps))

    rhs_all = S1 + _cmatmul(YPsiH_all, Ps)
    Zc = _cmatmul(YPsiH_active, Q) / (Jd1 * alpha_d * lam)
    G = _solve_structured(a, alpha_d * Jd0 * lam2, P, S1 + _cmatmul(YPsiH_silent, Ps))
    v = np.zeros(Q.shape[1], dtype=np.complex128)
    H, v = _fit(Zc - _cmatmul(G, Q), Qh, lam, v, False)
    it = 0
    while it < max_iters:
        G_new = _solve_structured(a, alpha_d * Jd * lam2, P, rhs_all - (Jd1 * alpha_d) * _cmatmul(H, Ps))
        H, v = _fit(Zc - _cmatmul(G_new, Q), Qh, lam, v, True)
        delta = _fro2(G_new - G)
        G = G_new
        it += 1
        if delta <= epsilon:
            break

    PsPsi = _cmatmul(Ps, Psi)
    B = _cmatmul(G0, PsPsi)
    base = _cmatmul(G, PsPsi)
    HPsi = _cmatmul(H, Psi)
    stat = 0.0
    nB = _fro2(B)
    for j in range(Jd):
        A = base + gamma_d[j] * HPsi
        D = A - B
        stat += 2.0 * np.sum((Y[j] * D.conj()).real) - _fro2(A) + nB
    C1 = _cmatmul(np.ascontiguousarray(G.T), Phi)
    C2 = _cmatmul(np.ascontiguousarray(G0.T), Phi)
    DC = C1 - C2
    nC1 = _fro2(C1)
    nC2 = _fro2(C2)
    for j in range(Jp):
        stat += 2.0 * np.sum((Yp[j] * DC.conj()).real) - nC1 + nC2
    return stat, it


@_jit
def glrt_p2only(Y, Psi, Q, lam, gamma_d, alpha_d, epsilon, max_iters):
    """Log GLR of the P2-only detector. Returns ``(log_glr, iterations)``."""
    Jd = Y.shape[0]
    N = Y.shape[1]
    M = Psi.shape[0]
    Qh = _hermitian(Q)
    P = _cmatmul(Q, Qh)
    PsiH = _hermitian(Psi)
    YPsiH_all = np.zeros((N, M), dtype=np.complex128)
    YPsiH_silent = np.zeros((N, M), dtype=np.complex128)
    YPsiH_active = np.zeros((N, M), dtype=np.complex128)
    Jd0 = 0
    Jd1 = 0
    for j in range(Jd):
        t = _cmatmul(np.ascontiguousarray(Y[j]), PsiH)
        YPsiH_all += t
        if gamma_d[j] == 0:
            YPsiH_silent += t
            Jd0 += 1
        else:
            YPsiH_active += t
            Jd1 += 1

    D0 = _cmatmul(YPsiH_all, P) / (Jd * alpha_d)
    if Jd0 > 0:
        D = _cmatmul(YPsiH_silent, P) / (Jd0 * alpha_d)
    else:
        D = np.zeros((N, M), dtype=np.complex128)
    Zc = _cmatmul(YPsiH_active, Q) / (Jd1 * alpha_d * lam)
    # residual fit uses (Y - D Psi) Psi^H Q = Y Psi^H Q - alpha_d D Q
    v = np.zeros(Q.shape[1], dtype=np.complex128)
    H, v = _fit(Zc - _cmatmul(D, Q) / lam, Qh, lam, v, False)
    it = 0
    while it < max_iters:
        D_new = (_cmatmul(YPsiH_all, P) - (Jd1 * alpha_d) * _cmatmul(H, P)) / (Jd * alpha_d)
        H, v = _fit(Zc - _cmatmul(D_new, Q) / lam, Qh, lam, v, True)
        delta = _fro2(D_new - D)
        D = D_new
        it += 1
        if delta <= epsilon:
            break

    B = _cmatmul(D0, Psi)
    base = _cmatmul(D, Psi)
    HPsi = _cmatmul(H, Psi)
    stat = 0.0
    nB = _fro2(B)
    for j in range(Jd):
        A = base + gamma_d[j] * HPsi
        Dd = A - B
        stat += 2.0 * np.sum((Y[j] * Dd.conj()).real) - _fro2(A) + nB
    return stat, it
