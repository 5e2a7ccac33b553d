"""
Density operators, ensembles and the named state families.

Conventions
-----------
- The computational basis of a ``d``-dimensional system is the Z basis.
- The X basis is the discrete Fourier basis
  ``|x~> = d**-0.5 * sum_z exp(2j*pi*x*z/d) |z>``, so ``|<x~|z>|**2 = 1/d``.
- Random instances are drawn from ``numpy.random.Generator`` objects; every
  ``seed`` argument accepts an integer or an existing generator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import linalg
from .errors import BadParams, DimensionMismatch, InvalidState, MissingDims

TRACE_TOL = 1e-10
PROB_TOL = 1e-10


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _validate_density(matrix: np.ndarray) -> None:
    try:
        linalg.check_hermitian(matrix)
    except linalg.NotHermitian as exc:
        raise InvalidState(str(exc), invariant="hermitian") from None
    w = np.linalg.eigvalsh(linalg.hermitian_part(matrix))
    if w[0] < -linalg.PSD_TOL:
        raise InvalidState(f"eigenvalue {w[0]:.3e} is negative", invariant="psd")
    tr = np.trace(matrix).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidState(f"trace is {tr!r}, expected 1", invariant="unit_trace")


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A validated density matrix together with its subsystem dimensions."""

    matrix: np.ndarray
    dims: tuple = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidState(f"matrix must be square, got {m.shape}", invariant="square")
        dims = (m.shape[0],) if self.dims is None else tuple(int(d) for d in self.dims)
        if any(d < 1 for d in dims) or int(np.prod(dims)) != m.shape[0]:
            raise InvalidState(f"dims {dims} do not multiply to {m.shape[0]}", invariant="dims")
        _validate_density(m)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def ptrace(self, keep) -> "DensityOperator":
        if np.isscalar(keep):
            keep = [keep]
        keep = sorted(set(int(k) for k in keep))
        m = linalg.partial_trace(self.matrix, self.dims, keep)
        return DensityOperator(m, tuple(self.dims[k] for k in keep))

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))


def as_density(rho, dims=None) -> DensityOperator:
    if isinstance(rho, DensityOperator):
        if dims is not None and tuple(dims) != rho.dims:
            return DensityOperator(rho.matrix, dims)
        return rho
    return DensityOperator(np.asarray(rho), dims)


def require_bipartite(rho, dims=None) -> DensityOperator:
    rho = as_density(rho, dims)
    if len(rho.dims) != 2:
        raise MissingDims(f"expected a bipartite state, got dims {rho.dims}")
    return rho


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Prior probabilities ``p_x`` and states ``phi_x`` on a common space."""

    priors: np.ndarray
    states: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.asarray(self.priors, dtype=float).ravel()
        S = np.array([np.asarray(s, dtype=complex) for s in self.states])
        if S.ndim != 3 or S.shape[1] != S.shape[2]:
            raise DimensionMismatch("ensemble states must share one square shape")
        if len(p) != len(S):
            raise DimensionMismatch(f"{len(p)} priors for {len(S)} states")
        if len(p) == 0:
            raise InvalidState("ensemble is empty", invariant="nonempty")
        if p.min() < -PROB_TOL or abs(p.sum() - 1.0) > PROB_TOL:
            raise InvalidState("priors must be a probability vector", invariant="priors")
        p = np.clip(p, 0.0, None)
        for s in S:
            _validate_density(s)
        p.setflags(write=False)
        S.setflags(write=False)
        object.__setattr__(self, "priors", p)
        object.__setattr__(self, "states", S)

    @property
    def size(self) -> int:
        return len(self.priors)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def weighted(self) -> np.ndarray:
        """The subnormalized operators ``p_x phi_x``."""
        return self.priors[:, None, None] * self.states

    def average(self) -> np.ndarray:
        return self.weighted().sum(axis=0)


def cq_state(E: Ensemble) -> DensityOperator:
    """``sum_x p_x |x><x| (x) phi_x`` with dims ``(|X|, dim B)``."""
    m, d = E.size, E.dim
    M = np.zeros((m * d, m * d), dtype=complex)
    for x, block in enumerate(E.weighted()):
        M[x * d:(x + 1) * d, x * d:(x + 1) * d] = block
    return DensityOperator(M, (m, d))


def ensemble_from_cq(rho, dims=None, tol: float = 1e-9) -> Ensemble:
    """Inverse of :func:`cq_state`; raises if ``rho`` is not block diagonal.

    Blocks with zero weight get the maximally mixed state as placeholder.
    """
    rho = require_bipartite(rho, dims)
    m, d = rho.dims
    T = rho.matrix.reshape(m, d, m, d)
    off = T.copy()
    for x in range(m):
        off[x, :, x, :] = 0
    if np.abs(off).max(initial=0.0) > tol:
        raise InvalidState("state is not classical on its first subsystem", invariant="cq")
    priors, states = [], []
    for x in range(m):
        block = T[x, :, x, :]
        p = float(np.trace(block).real)
        priors.append(max(p, 0.0))
        states.append(block / p if p > PROB_TOL else np.eye(d) / d)
    priors = np.array(priors)
    return Ensemble(priors / priors.sum(), np.array(states))


def as_ensemble(obj) -> Ensemble:
    if isinstance(obj, Ensemble):
        return obj
    return ensemble_from_cq(obj)


def maximally_mixed(d: int) -> DensityOperator:
    if d < 1:
        raise BadParams("dimension must be positive")
    return DensityOperator(np.eye(d) / d, (d,))


def max_entangled_vector(d: int) -> np.ndarray:
    v = np.zeros(d * d, dtype=complex)
    v[:: d + 1] = 1.0 / np.sqrt(d)
    return v


def max_entangled(d: int) -> DensityOperator:
    """``|Phi><Phi|`` with ``|Phi> = d**-0.5 sum_x |x>|x>``."""
    if d < 1:
        raise BadParams("dimension must be positive")
    v = max_entangled_vector(d)
    return DensityOperator(np.outer(v, v.conj()), (d, d))


def pure(vec, dims=None) -> DensityOperator:
    v = np.asarray(vec, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    return DensityOperator(np.outer(v, v.conj()), dims)


def purify(rho) -> DensityOperator:
    """A pure state on system (x) reference whose first marginal is ``rho``.

    The reference dimension equals the numerical rank of ``rho``.
    """
    rho = as_density(rho)
    w, U = linalg.eig_hermitian(rho.matrix)
    keep = w > linalg.RANK_TOL * max(w[-1], 0.0)
    w, U = w[keep], U[:, keep]
    r = len(w)
    psi = np.zeros((rho.dim, r), dtype=complex)
    for i in range(r):
        psi[:, i] = np.sqrt(w[i]) * U[:, i]
    return pure(psi.ravel(), rho.dims + (r,))


def l_distribution(m: int, p0: float) -> np.ndarray:
    """``p0`` on symbol 0 and ``(1 - p0)/(m - 1)`` on each other symbol."""
    if m < 2 or not 0.0 <= p0 <= 1.0:
        raise BadParams(f"need m >= 2 and p0 in [0, 1], got m={m}, p0={p0}")
    P = np.full(m, (1.0 - p0) / (m - 1))
    P[0] = p0
    return P


def shift_operator(d: int) -> np.ndarray:
    return np.roll(np.eye(d), 1, axis=0)


def phase_operator(d: int) -> np.ndarray:
    return np.diag(np.exp(2j * np.pi * np.arange(d) / d))


def bell_vector(d: int, k: int) -> np.ndarray:
    """Generalized Bell vector ``(I (x) X^a Z^b)|Phi>`` for ``k = a*d + b``."""
    a, b = divmod(int(k), d)
    W = np.linalg.matrix_power(shift_operator(d), a) @ np.linalg.matrix_power(phase_operator(d), b)
    return np.kron(np.eye(d), W) @ max_entangled_vector(d)


def bell_diagonal(d: int, weights) -> DensityOperator:
    w = np.asarray(weights, dtype=float).ravel()
    if len(w) != d * d or w.min() < -PROB_TOL or abs(w.sum() - 1) > PROB_TOL:
        raise BadParams(f"need a probability vector of length {d * d}")
    M = np.zeros((d * d, d * d), dtype=complex)
    for k, wk in enumerate(w):
        if wk != 0:
            v = bell_vector(d, k)
            M += wk * np.outer(v, v.conj())
    return DensityOperator(M, (d, d))


def fourier_basis(d: int) -> np.ndarray:
    """Columns are the X-basis vectors."""
    z = np.arange(d)
    return np.exp(2j * np.pi * np.outer(z, z) / d) / np.sqrt(d)


def theta_state(d: int, p0: float) -> DensityOperator:
    """Pure state with L-distributed amplitudes in the X basis.

    Amplitude ``sqrt(p0)`` on X-basis vector 0 and ``sqrt((1-p0)/(d-1))`` on
    each of the others.
    """
    if d < 2 or not 0.0 <= p0 <= 1.0:
        raise BadParams(f"need d >= 2 and p0 in [0, 1], got d={d}, p0={p0}")
    amps = np.sqrt(l_distribution(d, p0))
    return pure(fourier_basis(d) @ amps, (d,))


def monogamy_state(d: int, theta: float) -> DensityOperator:
    """``N**-0.5 (cos t |Phi>_AB |0>_C + sin t |Phi>_AC |0>_B)`` on A, B, C."""
    if d < 2 or not 0.0 <= theta <= np.pi / 2 + 1e-15:
        raise BadParams(f"need d >= 2 and theta in [0, pi/2], got d={d}, theta={theta}")
    phi = max_entangled_vector(d).reshape(d, d)
    psi = np.zeros((d, d, d), dtype=complex)
    psi[:, :, 0] += np.cos(theta) * phi
    psi[:, 0, :] += np.sin(theta) * phi
    norm = 1.0 + np.sin(2 * theta) / d
    v = psi.ravel() / np.sqrt(norm)
    return DensityOperator(np.outer(v, v.conj()), (d, d, d))


def measure_conjugate(rho, which: str) -> DensityOperator:
    """Measure A of a tripartite state in the Z or X basis.

    ``which="Z"`` keeps C and returns the cq state xi_ZC; ``which="X"`` keeps
    B and returns psi_XB. A state with a single subsystem is treated as having
    trivial B and C.
    """
    rho = as_density(rho)
    dims = rho.dims
    if len(dims) == 1:
        dims = (dims[0], 1, 1)
    if len(dims) != 3:
        raise MissingDims(f"expected a tripartite state, got dims {rho.dims}")
    dA, dB, dC = dims
    which = which.upper()
    if which == "Z":
        basis, keep = np.eye(dA), 2
    elif which == "X":
        basis, keep = fourier_basis(dA), 1
    else:
        raise BadParams(f"unknown observable {which!r}")
    T = rho.matrix.reshape(dA, dB, dC, dA, dB, dC)
    # <x|_A rho |x>_A for each basis vector, then trace out the other system
    blocks = np.einsum("ax,abcdef,dx->xbcef", basis.conj(), T, basis)
    if keep == 1:
        blocks = np.einsum("xbcec->xbe", blocks)
    else:
        blocks = np.einsum("xbcbf->xcf", blocks)
    dK = blocks.shape[1]
    M = np.zeros((dA * dK, dA * dK), dtype=complex)
    for x in range(dA):
        M[x * dK:(x + 1) * dK, x * dK:(x + 1) * dK] = blocks[x]
    return DensityOperator(linalg.hermitian_part(M), (dA, dK))


def random_density(d: int, seed=None) -> DensityOperator:
    """Hilbert-Schmidt random density matrix ``G G^dag / Tr``."""
    if d < 1:
        raise BadParams("dimension must be positive")
    rng = _rng(seed)
    G = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    M = G @ G.conj().T
    return DensityOperator(M / np.trace(M).real, (d,))


def random_pure(d: int, seed=None, dims=None) -> DensityOperator:
    if d < 1:
        raise BadParams("dimension must be positive")
    rng = _rng(seed)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return pure(v, dims if dims is not None else (d,))


def random_ensemble(m: int, d: int, seed=None, classical: bool = False,
                    pure_states: bool = False) -> Ensemble:
    """Dirichlet(1) priors with Hilbert-Schmidt (or Haar pure) states.

    ``classical=True`` draws diagonal states from Dirichlet(1), so all states
    commute.
    """
    if m < 1 or d < 1:
        raise BadParams("ensemble size and dimension must be positive")
    rng = _rng(seed)
    priors = rng.dirichlet(np.ones(m))
    if classical:
        states = [np.diag(rng.dirichlet(np.ones(d))).astype(complex) for _ in range(m)]
    elif pure_states:
        states = [random_pure(d, rng).matrix for _ in range(m)]
    else:
        states = [random_density(d, rng).matrix for _ in range(m)]
    return Ensemble(priors, np.array(states))


def random_state(dims: Sequence[int], seed=None, pure_state: bool = False) -> DensityOperator:
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise BadParams(f"dimensions must be positive, got {dims}")
    n = int(np.prod(dims))
    if pure_state:
        return random_pure(n, seed, dims)
    return DensityOperator(random_density(n, seed).matrix, dims)


def random_tripartite(dA: int, dB: int, dC: int, seed=None, pure_state: bool = False) -> DensityOperator:
    return random_state((dA, dB, dC), seed, pure_state)


# -- JSON state files --------------------------------------------------------

def state_to_json(rho) -> dict:
    rho = as_density(rho)
    rows = [[[float(z.real), float(z.imag)] for z in row] for row in rho.matrix]
    return {"dims": list(rho.dims), "matrix": rows}


def state_from_json(obj) -> DensityOperator:
    """Parse ``{"dims": [...], "matrix": ...}``.

    ``matrix`` is row-major ``[re, im]`` pairs, either nested by row or flat.
    Invariants are checked; failures raise :class:`InvalidState`.
    """
    if not isinstance(obj, dict) or "matrix" not in obj:
        raise InvalidState("state object needs a 'matrix' entry", invariant="format")
    try:
        arr = np.asarray(obj["matrix"], dtype=float)
    except (TypeError, ValueError):
        raise InvalidState("matrix entries must be [re, im] pairs", invariant="format") from None
    if arr.ndim < 2 or arr.shape[-1] != 2:
        raise InvalidState("matrix entries must be [re, im] pairs", invariant="format")
    z = arr[..., 0] + 1j * arr[..., 1]
    if z.ndim == 1:
        n = int(round(np.sqrt(z.size)))
        if n * n != z.size:
            raise InvalidState("flat matrix length is not a square", invariant="square")
        z = z.reshape(n, n)
    dims = obj.get("dims")
    return DensityOperator(z, None if dims is None else tuple(dims))


def load_state(path) -> DensityOperator:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidState(f"{path}: not valid JSON ({exc})", invariant="format") from None
    return state_from_json(obj)


def save_state(rho, path) -> None:
    Path(path).write_text(json.dumps(state_to_json(rho)) + "\n")
