"""
Explicit guessing and recovery strategies and their success figures.

Channel convention
------------------
A channel ``E`` from ``B`` (dimension ``dim_in``) to ``A'`` (``dim_out``) is
stored by its Choi operator on ``in (x) out``::

    choi = sum_{k,l} |k><l| (x) E(|k><l|)

so ``E(X) = Tr_in[(X^T (x) I) choi]`` and trace preservation reads
``Tr_out choi = I``.

The pretty good recovery for ``rho_AB`` is built from
``K = rho_B^{-1/2} rho_{A'B} rho_B^{-1/2}`` and acts as
``E(sigma_AB) = Tr_B[conj(K)_{A'B} sigma_AB^{T_B}]``. Writing the transposed
input against the complex conjugate of ``K`` is what makes the recovery
fidelity equal ``Tr[K rho_AB] / |A|`` for complex states; for real states the
conjugate is a no-op.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .divergences import sandwiched
from .errors import DimensionMismatch, InvalidState, NonCommuting
from .states import Ensemble, as_ensemble, cq_state, require_bipartite

POVM_TOL = 1e-9
CHANNEL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Povm:
    elements: np.ndarray

    def __post_init__(self):
        E = np.array(self.elements, dtype=complex)
        if E.ndim != 3 or E.shape[1] != E.shape[2]:
            raise InvalidState("POVM elements must be square matrices of one size", invariant="shape")
        for el in E:
            if not linalg.is_psd(el, linalg.PSD_TOL):
                raise InvalidState("POVM element is not PSD", invariant="psd")
        dev = np.abs(E.sum(axis=0) - np.eye(E.shape[1])).max()
        if dev > POVM_TOL:
            raise InvalidState(f"POVM elements sum to I only within {dev:.3e}", invariant="completeness")
        E.setflags(write=False)
        object.__setattr__(self, "elements", E)

    def __len__(self):
        return len(self.elements)

    @property
    def dim(self) -> int:
        return self.elements.shape[1]


@dataclass(frozen=True, eq=False)
class Channel:
    choi: np.ndarray
    dim_in: int
    dim_out: int

    def __post_init__(self):
        C = np.array(self.choi, dtype=complex)
        n = self.dim_in * self.dim_out
        if C.shape != (n, n):
            raise InvalidState(f"Choi operator must be {n}x{n}", invariant="shape")
        if not linalg.is_psd(C, linalg.PSD_TOL):
            raise InvalidState("Choi operator is not PSD", invariant="cp")
        tp = linalg.partial_trace(C, (self.dim_in, self.dim_out), [0])
        dev = np.abs(tp - np.eye(self.dim_in)).max()
        if dev > CHANNEL_TOL:
            raise InvalidState(f"channel is trace preserving only within {dev:.3e}", invariant="tp")
        C.setflags(write=False)
        object.__setattr__(self, "choi", C)

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=complex)
        C4 = self.choi.reshape(self.dim_in, self.dim_out, self.dim_in, self.dim_out)
        return np.einsum("kl,kalb->ab", X, C4)


def identity_channel(d: int) -> Channel:
    v = np.eye(d).ravel()
    return Channel(np.outer(v, v).astype(complex), d, d)


def apply_channel(C: Channel, sigma, dims) -> np.ndarray:
    """``(id_A (x) E)(sigma_AB)`` as an operator on ``A (x) A'``."""
    dA, dB = dims
    if dB != C.dim_in:
        raise DimensionMismatch(f"channel expects input dimension {C.dim_in}, got {dB}")
    S4 = np.asarray(sigma, dtype=complex).reshape(dA, dB, dA, dB)
    C4 = C.choi.reshape(C.dim_in, C.dim_out, C.dim_in, C.dim_out)
    out = np.einsum("akbl,kclf->acbf", S4, C4)
    n = dA * C.dim_out
    return out.reshape(n, n)


def _complete(elements, first: int = 0) -> np.ndarray:
    """Add the deficit ``I - sum(elements)`` to element ``first``."""
    E = np.array(elements)
    d = E.shape[1]
    E[first] += np.eye(d) - E.sum(axis=0)
    return linalg.hermitian_part(E)


def pgm(E: Ensemble) -> Povm:
    """Pretty good measurement ``phi^{-1/2} p_x phi_x phi^{-1/2}``.

    The part of the identity outside the support of the average state is
    given to element 0.
    """
    inv_sqrt = linalg.mat_power(E.average(), -0.5)
    els = [inv_sqrt @ w @ inv_sqrt for w in E.weighted()]
    return Povm(_complete(els))


def quad_pgm(E: Ensemble) -> Povm:
    """Quadratically weighted PGM with ``phibar = sum_x p_x^2 phi_x^2``."""
    sq = np.array([w @ w for w in E.weighted()])
    inv_sqrt = linalg.mat_power(sq.sum(axis=0), -0.5)
    els = [inv_sqrt @ s @ inv_sqrt for s in sq]
    return Povm(_complete(els))


def trivial_povm(E: Ensemble, guess=None) -> Povm:
    """Always announce ``guess`` (default: the most likely symbol)."""
    if guess is None:
        guess = int(np.argmax(E.priors))
    els = np.zeros((E.size, E.dim, E.dim), dtype=complex)
    els[guess] = np.eye(E.dim)
    return Povm(els)


def uniform_povm(m: int, d: int) -> Povm:
    return Povm(np.array([np.eye(d) / m] * m, dtype=complex))


def guessing_prob(E: Ensemble, povm: Povm) -> float:
    """``sum_x p_x Tr[phi_x Lambda_x]``."""
    E = as_ensemble(E)
    if len(povm) != E.size:
        raise DimensionMismatch(f"{len(povm)} POVM elements for {E.size} hypotheses")
    if povm.dim != E.dim:
        raise DimensionMismatch(f"POVM acts on dimension {povm.dim}, states on {E.dim}")
    val = np.einsum("xij,xji->", E.weighted(), povm.elements).real
    return float(val)


def p_pg(E: Ensemble) -> float:
    """PGM success probability from ``2**D_2(rho_XB, pi_X (x) rho_B) / |X|``."""
    E = as_ensemble(E)
    rho = cq_state(E)
    ref = np.kron(np.eye(E.size) / E.size, E.average())
    return float(2.0 ** sandwiched(rho.matrix, ref, 2) / E.size)


def pretty_good_recovery(rho_ab, dims=None) -> Channel:
    """Pretty good recovery channel from ``B`` to ``A'`` for ``rho_AB``.

    On the kernel of ``rho_B`` (conjugated, matching the transposed input)
    the channel outputs the maximally mixed state.
    """
    rho = require_bipartite(rho_ab, dims)
    dA, dB = rho.dims
    rho_b = linalg.partial_trace(rho.matrix, rho.dims, [1])
    inv_sqrt = np.kron(np.eye(dA), linalg.mat_power(rho_b, -0.5))
    K = inv_sqrt @ rho.matrix @ inv_sqrt
    # choi[(k, a), (l, b)] = conj(K)[(a, k), (b, l)]
    C = linalg.permute_systems(K.conj(), (dA, dB), (1, 0))
    kernel = np.eye(dB) - linalg.mat_power(rho_b, 0).T
    C = C + np.kron(kernel, np.eye(dA) / dA)
    return Channel(linalg.hermitian_part(C), dB, dA)


def recovery_fidelity(rho_ab, C: Channel, dims=None) -> float:
    """``Tr[Phi_AA' (id_A (x) E)(rho_AB)]``."""
    rho = require_bipartite(rho_ab, dims)
    dA, dB = rho.dims
    if C.dim_in != dB or C.dim_out != dA:
        raise DimensionMismatch(f"channel maps {C.dim_in}->{C.dim_out}, state needs {dB}->{dA}")
    R4 = rho.matrix.reshape(dA, dB, dA, dB)
    C4 = C.choi.reshape(dB, dA, dB, dA)
    return float(np.einsum("akbl,kalb->", R4, C4).real / dA)


def r_pg(rho_ab, dims=None) -> float:
    """Pretty good recovery fidelity from ``2**D_2(rho_AB, pi_A (x) rho_B) / |A|^2``."""
    rho = require_bipartite(rho_ab, dims)
    dA, _ = rho.dims
    rho_b = linalg.partial_trace(rho.matrix, rho.dims, [1])
    ref = np.kron(np.eye(dA) / dA, rho_b)
    return float(2.0 ** sandwiched(rho.matrix, ref, 2) / dA**2)


def p_quad_classical(P_xy) -> float:
    """``sum_y sum_x P(x,y)^3 / sum_x P(x,y)^2`` for a joint table ``P[x, y]``.

    Columns with zero probability contribute nothing.
    """
    P = np.asarray(P_xy, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    if P.ndim != 2 or P.min() < -1e-12 or abs(P.sum() - 1.0) > 1e-9:
        raise InvalidState("joint table must be a nonnegative 2-d array summing to 1", invariant="table")
    P = np.clip(P, 0.0, None)
    num = (P**3).sum(axis=0)
    den = (P**2).sum(axis=0)
    live = den > 0
    return float(np.sum(num[live] / den[live]))


def common_eigenbasis(E: Ensemble, tol: float = 1e-10) -> np.ndarray:
    """Unitary diagonalizing every state of a commuting ensemble.

    Raises :class:`NonCommuting` if some pairwise commutator exceeds ``tol``.
    """
    S = E.states
    for i in range(len(S)):
        for j in range(i + 1, len(S)):
            if np.abs(S[i] @ S[j] - S[j] @ S[i]).max() > tol:
                raise NonCommuting(f"states {i} and {j} do not commute")
    if all(np.abs(s - np.diag(np.diag(s))).max() <= tol for s in S):
        return np.eye(E.dim, dtype=complex)
    # a generic real combination separates all joint eigenspaces
    coeffs = np.linspace(1.0, 2.0, len(S)) + np.sqrt(np.arange(len(S)) + 2.0)
    _, U = np.linalg.eigh(np.tensordot(coeffs, S, axes=1))
    return U


def classical_joint(E: Ensemble) -> np.ndarray:
    """Joint table ``P[x, y] = p_x <y|phi_x|y>`` in the common eigenbasis."""
    U = common_eigenbasis(E)
    diag = np.einsum("iy,xij,jy->xy", U.conj(), E.states, U).real
    return E.priors[:, None] * np.clip(diag, 0.0, None)
