"""
Certified optimal guessing probability and entanglement recovery fidelity.

Both quantities are values of a dominance SDP in one Hermitian variable
``omega``:

- guessing: ``P_opt = min Tr omega  s.t.  omega >= p_x phi_x`` for all ``x``;
- recovery: ``R_opt = min Tr omega / |A|  s.t.  I_A (x) omega >= rho_AB``.

The SDP is solved by a log-barrier path-following method with Newton steps
in the entries of ``omega``. Every iterate is turned into a certified
interval:

- upper end: shift ``omega`` by a multiple of the identity until every
  constraint is exactly satisfied (the shift may be negative), and report its
  objective;
- lower end: the barrier multipliers ``Z_k = S_k^{-1} / t`` are renormalized
  into an exact POVM (guessing) or an exact Choi operator (recovery), whose
  success is then evaluated with :mod:`renyibounds.strategies`.

Because both witnesses are exactly feasible, ``[lower, upper]`` contains the
optimum regardless of how far the iteration got.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import linalg
from .errors import NoConvergence
from .states import DensityOperator, Ensemble, as_ensemble, purify, require_bipartite
from .strategies import (
    Channel,
    Povm,
    guessing_prob,
    identity_channel,
    pgm,
    pretty_good_recovery,
    recovery_fidelity,
    trivial_povm,
)

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-6
MAX_ITER = 200
T_GROWTH = 10.0
FEAS_MARGIN = 1e-12
CENTERING_TOL = 1e-5
T_MAX = 1e14


@dataclass
class CertifiedValue:
    """Optimum bracketed by an achievable strategy and a feasible dual point."""

    lower: float
    upper: float
    primal_witness: Union[Povm, Channel]
    dual_witness: np.ndarray
    iterations: int
    converged: bool
    history: list = field(default_factory=list, repr=False)

    @property
    def gap(self) -> float:
        return self.upper - self.lower

    @property
    def value(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def as_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "gap": self.gap,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def _chol_logdet(S):
    """``log det S`` via Cholesky, or ``None`` if ``S`` is not positive definite."""
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        return None
    d = np.real(np.diag(L))
    if np.any(d <= 0):
        return None
    return 2.0 * float(np.sum(np.log(d)))


class _GuessingProblem:
    def __init__(self, E: Ensemble):
        self.E = E
        self.C = E.weighted()
        self.n = E.dim
        self.scale = 1.0
        self.n_barrier = E.size * E.dim

    def initial(self):
        lam = max(np.linalg.eigvalsh(c)[-1] for c in self.C) + 1.0
        return lam * np.eye(self.n, dtype=complex)

    def slacks(self, omega):
        return omega[None, :, :] - self.C

    def adjoint(self, W):
        return W.sum(axis=0)

    def hessian(self, W):
        n = self.n
        H = np.zeros((n * n, n * n), dtype=complex)
        for w in W:
            H += np.kron(w, w.T)
        return H

    def min_slack_eig(self, omega):
        return min(np.linalg.eigvalsh(linalg.hermitian_part(s))[0] for s in self.slacks(omega))

    def witness(self, W, t):
        Z = W / t
        S = Z.sum(axis=0)
        r = linalg.mat_power(S, -0.5)
        els = np.array([linalg.hermitian_part(r @ z @ r) for z in Z])
        els[0] += np.eye(self.n) - els.sum(axis=0)
        return Povm(linalg.hermitian_part(els))

    def evaluate(self, witness):
        return guessing_prob(self.E, witness)

    def baselines(self):
        return [trivial_povm(self.E), pgm(self.E)]


class _RecoveryProblem:
    def __init__(self, rho: DensityOperator):
        self.rho = rho
        self.dA, self.dB = rho.dims
        self.n = self.dB
        self.scale = 1.0 / self.dA
        self.n_barrier = self.dA * self.dB

    def initial(self):
        lam = np.linalg.eigvalsh(self.rho.matrix)[-1] + 1.0
        return lam * np.eye(self.n, dtype=complex)

    def slacks(self, omega):
        return (np.kron(np.eye(self.dA), omega) - self.rho.matrix)[None]

    def adjoint(self, W):
        return linalg.partial_trace(W[0], (self.dA, self.dB), [1])

    def hessian(self, W):
        n, dA = self.n, self.dA
        W4 = W[0].reshape(dA, n, dA, n)
        H = np.einsum("aibk,blaj->ijkl", W4, W4)
        return H.reshape(n * n, n * n)

    def min_slack_eig(self, omega):
        return np.linalg.eigvalsh(linalg.hermitian_part(self.slacks(omega)[0]))[0]

    def witness(self, W, t):
        Z = W[0] / t
        S = linalg.partial_trace(Z, (self.dA, self.dB), [1])
        r = np.kron(np.eye(self.dA), linalg.mat_power(S, -0.5))
        Zn = linalg.hermitian_part(r @ Z @ r)
        # choi[(k, a), (l, b)] = Zn[(b, l), (a, k)]
        C = linalg.permute_systems(Zn.T, (self.dA, self.dB), (1, 0))
        return Channel(linalg.hermitian_part(C), self.dB, self.dA)

    def evaluate(self, witness):
        return recovery_fidelity(self.rho, witness)

    def baselines(self):
        out = [pretty_good_recovery(self.rho)]
        if self.dA == self.dB:
            out.append(identity_channel(self.dA))
        return out


def _barrier(problem, omega, t):
    vals = []
    for s in problem.slacks(omega):
        ld = _chol_logdet(s)
        if ld is None:
            return math.inf
        vals.append(ld)
    return t * float(np.trace(omega).real) - sum(vals)


def _solve(problem, tol, max_iter, strict, debug):
    n = problem.n
    eye = np.eye(n, dtype=complex)

    best_low, best_wit = -math.inf, None
    for cand in problem.baselines():
        v = problem.evaluate(cand)
        if v > best_low:
            best_low, best_wit = v, cand

    omega = problem.initial()
    best_up, best_omega = math.inf, None
    iterations = 0
    history = []

    def certify(omega, W=None, t=None):
        nonlocal best_low, best_wit, best_up, best_omega
        if W is not None:
            try:
                wit = problem.witness(W, t)
                low = problem.evaluate(wit)
            except (np.linalg.LinAlgError, ValueError) as exc:
                log.debug("witness repair failed: %s", exc)
            else:
                if low > best_low:
                    best_low, best_wit = low, wit
        shift = -problem.min_slack_eig(omega) + FEAS_MARGIN
        om = omega + shift * eye
        up = problem.scale * float(np.trace(om).real)
        if up < best_up:
            best_up, best_omega = up, om
        if debug:
            history.append((t, best_low, best_up))
        return best_up - best_low <= tol

    certify(omega)
    # the central point at t has duality gap n_barrier / t
    t = problem.n_barrier * problem.scale / max(best_up - best_low, tol)
    done = best_up - best_low <= tol

    while not done and iterations < max_iter and t < T_MAX:
        while iterations < max_iter:
            S = problem.slacks(omega)
            try:
                W = linalg.hermitian_part(np.array([np.linalg.inv(s) for s in S]))
                G = t * eye - problem.adjoint(W)
                step = np.linalg.solve(problem.hessian(W), -G.ravel()).reshape(n, n)
            except np.linalg.LinAlgError:
                break
            step = linalg.hermitian_part(step)
            dec = -float(np.real(np.vdot(G, step)))
            iterations += 1
            if dec / 2 <= CENTERING_TOL:
                break
            f0 = _barrier(problem, omega, t)
            alpha = 1.0
            while alpha > 1e-12:
                cand = omega + alpha * step
                if _barrier(problem, cand, t) <= f0 - 0.25 * alpha * dec:
                    break
                alpha *= 0.5
            else:
                break
            omega = linalg.hermitian_part(cand)
        done = certify(omega, W, t)
        t *= T_GROWTH

    converged = best_up - best_low <= tol
    if not converged:
        msg = f"certified gap {best_up - best_low:.3e} > tol {tol:.1e} after {iterations} iterations"
        if strict:
            raise NoConvergence(msg)
        log.info(msg)
    return CertifiedValue(
        lower=float(best_low),
        upper=float(max(best_up, best_low)),
        primal_witness=best_wit,
        dual_witness=best_omega,
        iterations=iterations,
        converged=converged,
        history=history,
    )


def p_opt(E, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER, strict: bool = False,
          debug: bool = False) -> CertifiedValue:
    """Certified optimal guessing probability of an ensemble (or cq state).

    ``dual_witness`` is ``omega`` with ``omega >= p_x phi_x`` for all ``x``;
    ``primal_witness`` is a POVM achieving ``lower``. With ``strict=True`` a
    gap above ``tol`` at the iteration cap raises :class:`NoConvergence`.
    """
    return _solve(_GuessingProblem(as_ensemble(E)), tol, max_iter, strict, debug)


def r_opt(rho_ab, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER, strict: bool = False,
          debug: bool = False, dims=None) -> CertifiedValue:
    """Certified optimal entanglement recovery fidelity ``R_opt(A|B)``.

    ``dual_witness`` is ``omega_B`` with ``I_A (x) omega_B >= rho_AB``;
    ``primal_witness`` is a Choi-form channel ``B -> A'``.
    """
    return _solve(_RecoveryProblem(require_bipartite(rho_ab, dims)), tol, max_iter, strict, debug)


def max_fid_uniform(rho_ab, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER,
                    strict: bool = False, dims=None) -> CertifiedValue:
    """``max_sigma F(rho_AB, pi_A (x) sigma_B)^2``.

    Evaluated as ``R_opt(A|R)`` for a purification ``rho_ABR``.
    """
    rho = require_bipartite(rho_ab, dims)
    psi = purify(rho)
    rho_ar = psi.ptrace([0, 2])
    return r_opt(rho_ar, tol=tol, max_iter=max_iter, strict=strict)


def dominance_residual(E_or_rho, omega) -> float:
    """Smallest eigenvalue over the dominance constraints for ``omega``."""
    if isinstance(E_or_rho, Ensemble):
        return _GuessingProblem(E_or_rho).min_slack_eig(omega)
    return _RecoveryProblem(require_bipartite(E_or_rho)).min_slack_eig(omega)
