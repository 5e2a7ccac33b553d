"""
Renyi divergences, fidelity and entropies. All logarithms are base 2.

Orders are plain floats; ``0.0``, ``1.0`` and ``math.inf`` select the limit
formulas. Classical functions accept ``alpha`` in ``[0, inf]``, quantum ones
in ``[1/2, inf]``.
"""

from __future__ import annotations

import math

import numpy as np

from . import linalg
from .errors import DimensionMismatch, OutOfRange, UnsupportedAlpha
from .states import require_bipartite

INF = math.inf
SUPPORT_TOL = 1e-10


def _check_order(alpha, minimum):
    a = float(alpha)
    if math.isnan(a) or a < minimum:
        raise UnsupportedAlpha(f"order {alpha} is outside [{minimum}, inf]")
    return a


def _log2(x):
    return math.log2(x) if x > 0 else -INF


def renyi_classical(P, Q, alpha) -> float:
    """Classical Renyi divergence ``D_alpha(P||Q)`` in bits.

    Returns ``inf`` when the support condition for the order fails.
    """
    P = np.asarray(P, dtype=float).ravel()
    Q = np.asarray(Q, dtype=float).ravel()
    if P.shape != Q.shape:
        raise DimensionMismatch(f"lengths differ: {P.size} vs {Q.size}")
    a = _check_order(alpha, 0.0)
    pos = P > 0
    if a == 0.0:
        return -_log2(Q[pos].sum())
    if a == INF:
        if np.any(Q[pos] <= 0):
            return INF
        return _log2(float(np.max(P[pos] / Q[pos])))
    if a == 1.0:
        if np.any(Q[pos] <= 0):
            return INF
        return float(np.sum(P[pos] * np.log2(P[pos] / Q[pos])))
    if a > 1.0:
        if np.any(Q[pos] <= 0):
            return INF
        s = np.sum(P[pos] ** a * Q[pos] ** (1.0 - a))
    else:
        both = pos & (Q > 0)
        s = np.sum(P[both] ** a * Q[both] ** (1.0 - a))
    if s <= 0:
        return INF
    return math.log2(s) / (a - 1.0)


def binary_d(p: float, q: float, alpha) -> float:
    """Binary Renyi divergence ``d_alpha(p, q)`` in bits."""
    vals = []
    for v in (p, q):
        v = float(v)
        if not -1e-12 <= v <= 1 + 1e-12:
            raise OutOfRange(f"argument {v} is outside [0, 1]")
        vals.append(min(max(v, 0.0), 1.0))
    p, q = vals
    return renyi_classical([p, 1.0 - p], [q, 1.0 - q], alpha)


def binary_entropy(x: float) -> float:
    x = float(x)
    if not -1e-12 <= x <= 1 + 1e-12:
        raise OutOfRange(f"argument {x} is outside [0, 1]")
    x = min(max(x, 0.0), 1.0)
    if x in (0.0, 1.0):
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def _as_matrix(rho):
    return linalg.check_hermitian(np.asarray(rho, dtype=complex))


def fidelity(rho, sigma) -> float:
    """``F = ||sqrt(rho) sqrt(sigma)||_1 = Tr sqrt(sqrt(sigma) rho sqrt(sigma))``."""
    r, s = _as_matrix(rho), _as_matrix(sigma)
    if r.shape != s.shape:
        raise DimensionMismatch(f"shapes differ: {r.shape} vs {s.shape}")
    rs = linalg.mat_power(s, 0.5)
    w = np.linalg.eigvalsh(linalg.hermitian_part(rs @ r @ rs))
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))))


def von_neumann_entropy(rho) -> float:
    w = np.linalg.eigvalsh(linalg.hermitian_part(_as_matrix(rho)))
    w = w[w > 0]
    return float(-np.sum(w * np.log2(w)))


def _logm_support(w, U, keep):
    f = np.zeros_like(w)
    f[keep] = np.log2(w[keep])
    return (U * f) @ U.conj().T


def sandwiched(rho, sigma, alpha) -> float:
    """Sandwiched Renyi divergence
    ``1/(alpha-1) log Tr[(sigma^s rho sigma^s)^alpha]`` with
    ``s = (1-alpha)/(2 alpha)``, in bits.

    Powers of ``sigma`` are taken on its support. For ``alpha >= 1`` the value
    is ``inf`` when the support of ``rho`` is not contained in that of
    ``sigma``.
    """
    r, s = _as_matrix(rho), _as_matrix(sigma)
    if r.shape != s.shape:
        raise DimensionMismatch(f"shapes differ: {r.shape} vs {s.shape}")
    a = _check_order(alpha, 0.5)
    if a == 0.5:
        F = fidelity(r, s)
        return -2.0 * _log2(F)

    w, U = linalg.eig_hermitian(s)
    lmax = max(float(w[-1]), 0.0)
    keep = w > linalg.RANK_TOL * lmax if lmax > 0 else np.zeros_like(w, dtype=bool)

    if a >= 1.0:
        Uk = U[:, keep]
        inside = np.trace(Uk.conj().T @ r @ Uk).real
        if np.trace(r).real - inside > SUPPORT_TOL * max(1.0, np.trace(r).real):
            return INF

    if a == 1.0:
        wr, Ur = linalg.eig_hermitian(r)
        kr = wr > linalg.RANK_TOL * max(wr[-1], 0.0)
        log_r = _logm_support(wr, Ur, kr)
        log_s = _logm_support(w, U, keep)
        return float(np.real(np.trace(r @ (log_r - log_s))))

    if a == INF:
        t = -0.5
    else:
        t = (1.0 - a) / (2.0 * a)
    f = np.zeros_like(w)
    f[keep] = w[keep] ** t
    st = (U * f) @ U.conj().T
    mu = np.linalg.eigvalsh(linalg.hermitian_part(st @ r @ st))
    mu = np.clip(mu, 0.0, None)
    if a == INF:
        return _log2(float(mu[-1]))
    q = float(np.sum(mu**a))
    if q <= 0:
        return INF if a < 1 else -INF
    return math.log2(q) / (a - 1.0)


def cond_entropy_down(rho_ab, alpha, dims=None) -> float:
    """``H_alpha(A|B) = log|A| - D_alpha(rho_AB, pi_A (x) rho_B)``."""
    rho = require_bipartite(rho_ab, dims)
    dA, dB = rho.dims
    rho_b = linalg.partial_trace(rho.matrix, rho.dims, [1])
    ref = np.kron(np.eye(dA) / dA, rho_b)
    return math.log2(dA) - sandwiched(rho.matrix, ref, alpha)


def mutual_reference(rho_ab, sigma_b=None, dims=None):
    """``pi_A (x) sigma_B``, with ``sigma_B`` defaulting to ``rho_B``."""
    rho = require_bipartite(rho_ab, dims)
    dA, dB = rho.dims
    if sigma_b is None:
        sigma_b = linalg.partial_trace(rho.matrix, rho.dims, [1])
    sigma_b = np.asarray(sigma_b, dtype=complex)
    if sigma_b.shape != (dB, dB):
        raise DimensionMismatch(f"reference state must be {dB}x{dB}")
    return np.kron(np.eye(dA) / dA, sigma_b)
