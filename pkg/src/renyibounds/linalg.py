"""
Dense complex Hermitian linear algebra.

Operators are plain ``numpy`` arrays of shape ``(dim, dim)``.  Functions that
need a tensor-product structure take the subsystem dimensions explicitly as
``dims``, a sequence of positive integers whose product is ``dim``.

Two eigensolvers are available behind :func:`eig_hermitian`:

- ``"lapack"`` (default) calls ``numpy.linalg.eigh``;
- ``"jacobi"`` is a cyclic complex Jacobi solver written here, used as an
  independent cross-check and for callers that want a self-contained path.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .errors import MissingDims, NoConvergence, NotHermitian, NotPSD

HERMITICITY_TOL = 1e-10
PSD_TOL = 1e-9
RANK_TOL = 1e-12
EIG_TOL = 1e-10

JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100


class EigDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.conj().T


def dagger(M):
    return np.conj(np.swapaxes(M, -1, -2))


def hermitian_part(M):
    return 0.5 * (M + dagger(M))


def check_hermitian(M, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Return ``M`` as a complex array, raising :class:`NotHermitian` if
    ``max|M - M^dag| > tol * max(1, max|M|)``."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {M.shape}")
    scale = max(1.0, float(np.abs(M).max(initial=0.0)))
    dev = float(np.abs(M - M.conj().T).max(initial=0.0))
    if dev > tol * scale:
        raise NotHermitian(f"matrix is not Hermitian (max deviation {dev:.3e})")
    return M


def jacobi_eigh(M, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi eigensolver for a complex Hermitian matrix.

    Each rotation first removes the phase of the pivot ``a_pq`` and then
    applies the real symmetric Schur rotation. Sweeps stop once the
    off-diagonal Frobenius mass is at most ``tol * ||M||_F``.

    Returns
    -------
    eigenvalues : ndarray, ascending
    eigenvectors : ndarray, unitary, columns are eigenvectors
    """
    A = np.array(M, dtype=complex)
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    norm = np.linalg.norm(A)
    if n == 1 or norm == 0.0:
        return np.real(np.diag(A)).copy(), V
    target = tol * norm

    def off_exact(A):
        return np.linalg.norm(A - np.diag(np.diag(A)))

    for _ in range(max_sweeps):
        if off_exact(A) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                b = abs(apq)
                if b <= 1e-300:
                    continue
                phase = apq / b
                tau = (A[q, q].real - A[p, p].real) / (2.0 * b)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # columns p, q of U = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                U = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ U
                A[idx, :] = U.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                V[:, idx] = V[:, idx] @ U
    else:
        if off_exact(A) > target:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")

    w = np.real(np.diag(A))
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def eig_hermitian(M, method: str = "lapack") -> EigDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Raises :class:`NotHermitian` if the symmetry check fails.
    """
    M = check_hermitian(M)
    M = hermitian_part(M)
    if method == "lapack":
        w, U = np.linalg.eigh(M)
    elif method == "jacobi":
        w, U = jacobi_eigh(M)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    return EigDecomposition(w, U)


def support_projector(M, rank_tol: float = RANK_TOL) -> np.ndarray:
    w, U = eig_hermitian(M)
    lmax = max(float(w[-1]), 0.0)
    keep = w > rank_tol * lmax if lmax > 0 else np.zeros_like(w, dtype=bool)
    Uk = U[:, keep]
    return Uk @ Uk.conj().T


def mat_power(M, t: float, method: str = "lapack") -> np.ndarray:
    """Fractional power of a PSD matrix.

    Eigenvalues at or below ``RANK_TOL * lambda_max`` are mapped to zero for
    every exponent, so negative powers are pseudo-inverse powers on the
    support and ``t = 0`` gives the support projector.

    Raises :class:`NotPSD` if an eigenvalue is below ``-PSD_TOL`` (relative to
    ``max(1, lambda_max)``).
    """
    w, U = eig_hermitian(M, method=method)
    lmax = float(w[-1]) if w.size else 0.0
    if w.size and w[0] < -PSD_TOL * max(1.0, abs(lmax)):
        raise NotPSD(f"matrix has eigenvalue {w[0]:.3e} < 0")
    cutoff = RANK_TOL * lmax
    keep = w > cutoff if lmax > 0 else np.zeros_like(w, dtype=bool)
    f = np.zeros_like(w)
    f[keep] = w[keep] ** t
    return (U * f) @ U.conj().T


def kron(*ops) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, np.asarray(op))
    return out


def _check_dims(M, dims) -> tuple:
    if dims is None:
        raise MissingDims("subsystem dimensions are required")
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise MissingDims(f"subsystem dimensions must be positive, got {dims}")
    n = int(np.prod(dims))
    if M.shape != (n, n):
        raise MissingDims(f"dims {dims} do not match matrix shape {M.shape}")
    return dims


def partial_trace(M, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    ``keep`` is an index or a collection of indices into ``dims``; the kept
    subsystems stay in their original order.
    """
    M = np.asarray(M)
    dims = _check_dims(M, dims)
    if np.isscalar(keep) or isinstance(keep, (int, np.integer)):
        keep = [int(keep)]
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    if any(k < 0 or k >= n for k in keep):
        raise MissingDims(f"subsystem index out of range for dims {dims}")
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = [letters[n + i] if i in keep else row[i] for i in range(n)]
    out_idx = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    T = M.reshape(dims + dims)
    R = np.einsum("".join(row) + "".join(col) + "->" + out_idx, T)
    d = int(np.prod([dims[i] for i in keep])) if keep else 1
    return R.reshape(d, d)


def partial_transpose(M, dims: Sequence[int], subsystem) -> np.ndarray:
    """Transpose the listed subsystem(s) in the product basis."""
    M = np.asarray(M)
    dims = _check_dims(M, dims)
    subs = [subsystem] if np.isscalar(subsystem) else list(subsystem)
    n = len(dims)
    T = M.reshape(dims + dims)
    axes = list(range(2 * n))
    for s in subs:
        axes[s], axes[n + s] = axes[n + s], axes[s]
    return T.transpose(axes).reshape(M.shape)


def permute_systems(M, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: output factor ``i`` is input factor ``perm[i]``."""
    M = np.asarray(M)
    dims = _check_dims(M, dims)
    n = len(dims)
    perm = list(perm)
    T = M.reshape(dims + dims)
    return T.transpose(perm + [n + p for p in perm]).reshape(M.shape)


def is_psd(M, tol: float = PSD_TOL) -> bool:
    w = np.linalg.eigvalsh(hermitian_part(np.asarray(M, dtype=complex)))
    return bool(w[0] >= -tol * max(1.0, abs(w[-1])))
