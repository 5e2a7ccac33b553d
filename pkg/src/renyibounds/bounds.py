"""
Every inequality as a checkable relation.

Each check returns a :class:`BoundReport`. ``slack`` is oriented so that
``slack >= 0`` means the inequality holds, and it is always recomputable from
the stored ``lhs`` and ``rhs``. When a side depends on ``P_opt`` or ``R_opt``
the certified interval is used and the endpoint that makes the inequality
hardest to satisfy is the one stored in ``lhs``/``rhs``; both endpoints are
kept in ``context``. A ``satisfied`` verdict therefore holds for the exact
optimum, not just for a numerical estimate of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .divergences import (
    INF,
    binary_d,
    binary_entropy,
    cond_entropy_down,
    fidelity,
    sandwiched,
)
from .optimal import CertifiedValue, p_opt, r_opt
from .states import as_ensemble, cq_state, measure_conjugate, require_bipartite, as_density
from .strategies import (
    classical_joint,
    guessing_prob,
    p_pg,
    p_quad_classical,
    r_pg,
    recovery_fidelity,
)

SDP_TOL = 1e-8
DEFAULT_TOL = 1e-6
TRIPARTITE_TOL = 1e-5
CLASSICAL_TOL = 1e-8
SNAP_TOL = 1e-12


@dataclass
class BoundReport:
    name: str
    lhs: float
    rhs: float
    sense: str
    slack: float
    tolerance: float
    satisfied: bool
    context: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "sense": self.sense,
            "slack": self.slack,
            "tolerance": self.tolerance,
            "satisfied": self.satisfied,
            "context": self.context,
        }


def oriented_slack(lhs: float, rhs: float, sense: str) -> float:
    if sense == ">=":
        return lhs - rhs
    if sense == "<=":
        return rhs - lhs
    raise ValueError(f"unknown sense {sense!r}")


def make_report(name, lhs, rhs, sense, tolerance, **context) -> BoundReport:
    lhs, rhs = float(lhs), float(rhs)
    if sense == ">=" and lhs == INF or sense == "<=" and rhs == INF:
        slack = INF
    else:
        slack = oriented_slack(lhs, rhs, sense)
    return BoundReport(name, lhs, rhs, sense, slack, tolerance, bool(slack >= -tolerance), context)


def _clip01(v):
    return min(max(float(v), 0.0), 1.0)


def _snap01(v, eps: float = SNAP_TOL):
    """Clip to [0, 1] and snap rounding noise at the ends onto the ends.

    d_alpha(p, q) has infinite slope at p in {0, 1} for alpha < 1, and moving
    p away from q only increases it, so snapping never loosens a check.
    """
    v = _clip01(v)
    if v > 1.0 - eps:
        return 1.0
    if v < eps:
        return 0.0
    return v


def _endpoints(cv: CertifiedValue):
    return _clip01(cv.lower), _clip01(cv.upper)


def _hardest(f, cv: CertifiedValue, want: str):
    """Evaluate ``f`` at both interval endpoints and keep the max or min."""
    vals = [f(v) for v in _endpoints(cv)]
    return max(vals) if want == "max" else min(vals)


def _interval(cv: CertifiedValue) -> dict:
    return {"lower": cv.lower, "upper": cv.upper, "converged": cv.converged}


def fidelity_envelope(p: float, m: int) -> float:
    """``(sqrt(p) + sqrt(m-1) sqrt(1-p))**2``."""
    p = _clip01(p)
    return (math.sqrt(p) + math.sqrt(m - 1) * math.sqrt(1.0 - p)) ** 2


def ellipse_residual(x: float, z: float, m: float) -> float:
    """``m (x+z-1)^2 + m/(m-1) (x-z)^2 - 1``: zero on the boundary, negative inside."""
    if m < 2:
        raise ValueError(f"need m >= 2, got {m}")
    return m * (x + z - 1.0) ** 2 + m / (m - 1.0) * (x - z) ** 2 - 1.0


# -- the two-part proposition --------------------------------------------------

def check_prop_c(E, povm, sigma_b=None, alpha=2, tol: float = DEFAULT_TOL) -> BoundReport:
    """``D_alpha(rho_XB, pi_X (x) sigma_B) >= d_alpha(P(X|B), 1/|X|)``."""
    E = as_ensemble(E)
    m = E.size
    rho = cq_state(E)
    sigma = E.average() if sigma_b is None else np.asarray(sigma_b, dtype=complex)
    lhs = sandwiched(rho.matrix, np.kron(np.eye(m) / m, sigma), alpha)
    guess = _snap01(guessing_prob(E, povm))
    rhs = binary_d(guess, 1.0 / m, alpha)
    return make_report("prop_c", lhs, rhs, ">=", tol, alpha=float(alpha), m=m, dim_b=E.dim,
                       guessing_prob=guess)


def check_prop_q(rho_ab, channel, sigma_b=None, alpha=2, tol: float = DEFAULT_TOL) -> BoundReport:
    """``D_alpha(rho_AB, pi_A (x) sigma_B) >= d_alpha(R(A|B), 1/|A|^2)``."""
    rho = require_bipartite(rho_ab)
    dA, dB = rho.dims
    if sigma_b is None:
        sigma_b = linalg.partial_trace(rho.matrix, rho.dims, [1])
    sigma = np.asarray(sigma_b, dtype=complex)
    lhs = sandwiched(rho.matrix, np.kron(np.eye(dA) / dA, sigma), alpha)
    rec = _snap01(recovery_fidelity(rho, channel))
    rhs = binary_d(rec, 1.0 / dA**2, alpha)
    return make_report("prop_q", lhs, rhs, ">=", tol, alpha=float(alpha), dim_a=dA, dim_b=dB,
                       recovery_fidelity=rec)


# -- Fano inequalities ------------------------------------------------------

def fano_classical(E, popt: CertifiedValue = None, tol: float = DEFAULT_TOL) -> BoundReport:
    """``H(X|B) <= (1 - P_opt) log(|X|-1) + h2(P_opt)``."""
    E = as_ensemble(E)
    m = E.size
    if m < 2:
        raise ValueError("Fano inequality needs |X| >= 2")
    popt = popt or p_opt(E, tol=SDP_TOL)
    lhs = cond_entropy_down(cq_state(E), 1)
    rhs = _hardest(lambda p: (1 - p) * math.log2(m - 1) + binary_entropy(p), popt, "min")
    return make_report("fano_c", lhs, rhs, "<=", tol, m=m, dim_b=E.dim, p_opt=_interval(popt))


def fano_quantum(rho_ab, ropt: CertifiedValue = None, tol: float = DEFAULT_TOL) -> BoundReport:
    """``H(A|B) <= -log|A| + (1 - R_opt) log(|A|^2-1) + h2(R_opt)``."""
    rho = require_bipartite(rho_ab)
    dA, dB = rho.dims
    ropt = ropt or r_opt(rho, tol=SDP_TOL)
    lhs = cond_entropy_down(rho, 1)

    def f(r):
        return -math.log2(dA) + (1 - r) * math.log2(dA**2 - 1) + binary_entropy(r)

    rhs = _hardest(f, ropt, "min")
    return make_report("fano_q", lhs, rhs, "<=", tol, dim_a=dA, dim_b=dB, r_opt=_interval(ropt))


# -- pretty good versus optimal ------------------------------------------------

def _pg_rhs(p, m):
    return p**2 + (1 - p) ** 2 / (m - 1)


def pgm_bound(E, popt: CertifiedValue = None, tol: float = DEFAULT_TOL) -> BoundReport:
    """``P_pg >= P_opt^2 + (1-P_opt)^2/(|X|-1)``.

    ``context`` also carries the older comparison ``P_pg >= P_opt^2`` and the
    margin of the new right-hand side above ``1/|X|``, both directly and via
    ``(|X| P_opt - 1)^2 / (|X|(|X|-1))``.
    """
    E = as_ensemble(E)
    m = E.size
    if m < 2:
        raise ValueError("need |X| >= 2")
    popt = popt or p_opt(E, tol=SDP_TOL)
    lhs = p_pg(E)
    rhs = _hardest(lambda p: _pg_rhs(p, m), popt, "max")
    lo, up = _endpoints(popt)
    weak_rhs = up**2
    p = lo
    return make_report(
        "pgm_bound", lhs, rhs, ">=", tol, m=m, dim_b=E.dim, p_opt=_interval(popt),
        weak_rhs=weak_rhs, weak_slack=lhs - weak_rhs,
        above_uniform=_pg_rhs(p, m) - 1.0 / m,
        above_uniform_closed=(m * p - 1) ** 2 / (m * (m - 1)),
    )


def recovery_bound(rho_ab, ropt: CertifiedValue = None, tol: float = DEFAULT_TOL) -> BoundReport:
    """``R_pg >= R_opt^2 + (1-R_opt)^2/(|A|^2-1)``."""
    rho = require_bipartite(rho_ab)
    dA, dB = rho.dims
    m = dA**2
    ropt = ropt or r_opt(rho, tol=SDP_TOL)
    lhs = r_pg(rho)
    rhs = _hardest(lambda r: _pg_rhs(r, m), ropt, "max")
    return make_report("recovery_bound", lhs, rhs, ">=", tol, dim_a=dA, dim_b=dB,
                       r_opt=_interval(ropt), weak_rhs=_clip01(ropt.upper) ** 2)


# -- fidelity bounds, uncertainty and monogamy --------------------------------

def fidelity_bound_c(E, sigma_b=None, popt: CertifiedValue = None,
                     tol: float = DEFAULT_TOL) -> BoundReport:
    """``|X| F(rho_XB, pi_X (x) sigma_B)^2 <= (sqrt(P) + sqrt(|X|-1) sqrt(1-P))^2``."""
    E = as_ensemble(E)
    m = E.size
    popt = popt or p_opt(E, tol=SDP_TOL)
    sigma = E.average() if sigma_b is None else np.asarray(sigma_b, dtype=complex)
    F = fidelity(cq_state(E).matrix, np.kron(np.eye(m) / m, sigma))
    lhs = m * F**2
    rhs = _hardest(lambda p: fidelity_envelope(p, m), popt, "min")
    return make_report("fidelity_c", lhs, rhs, "<=", tol, m=m, dim_b=E.dim, p_opt=_interval(popt))


def fidelity_bound_q(rho_ab, sigma_b=None, ropt: CertifiedValue = None,
                     tol: float = DEFAULT_TOL) -> BoundReport:
    """``|A|^2 F(rho_AB, pi_A (x) sigma_B)^2 <= (sqrt(R) + sqrt(|A|^2-1) sqrt(1-R))^2``."""
    rho = require_bipartite(rho_ab)
    dA, dB = rho.dims
    m = dA**2
    ropt = ropt or r_opt(rho, tol=SDP_TOL)
    if sigma_b is None:
        sigma_b = linalg.partial_trace(rho.matrix, rho.dims, [1])
    F = fidelity(rho.matrix, np.kron(np.eye(dA) / dA, np.asarray(sigma_b, dtype=complex)))
    lhs = m * F**2
    rhs = _hardest(lambda r: fidelity_envelope(r, m), ropt, "min")
    return make_report("fidelity_q", lhs, rhs, "<=", tol, dim_a=dA, dim_b=dB, r_opt=_interval(ropt))


def _tripartite(rho_abc):
    rho = as_density(rho_abc)
    if len(rho.dims) == 1:
        rho = as_density(rho.matrix, (rho.dims[0], 1, 1))
    if len(rho.dims) != 3:
        raise ValueError(f"expected a tripartite state, got dims {rho.dims}")
    return rho


def _boundary_report(name, x: CertifiedValue, z: CertifiedValue, m, tol, **context):
    # lhs at its largest, rhs at its smallest
    lhs = m * _clip01(z.upper)
    rhs = _hardest(lambda v: fidelity_envelope(v, m), x, "min")
    xm, zm = _clip01(x.value), _clip01(z.value)
    return make_report(name, lhs, rhs, "<=", tol, m=m, x=xm, z=zm,
                       x_interval=_interval(x), z_interval=_interval(z),
                       ellipse_residual=ellipse_residual(xm, zm, m), **context)


def uncertainty_check(rho_abc, tol: float = TRIPARTITE_TOL) -> BoundReport:
    """``|A| P_opt(Z|C) <= (sqrt(x) + sqrt(|A|-1) sqrt(1-x))^2``, ``x = P_opt(X|B)``.

    X is measured in the Fourier basis and Z in the computational basis of A.
    A single-system state is read as having trivial B and C.
    """
    rho = _tripartite(rho_abc)
    dA, dB, dC = rho.dims
    x = p_opt(measure_conjugate(rho, "X"), tol=SDP_TOL)
    z = p_opt(measure_conjugate(rho, "Z"), tol=SDP_TOL)
    return _boundary_report("uncertainty", x, z, dA, tol, dims=[dA, dB, dC])


def monogamy_check(rho_abc, tol: float = TRIPARTITE_TOL) -> BoundReport:
    """``|A|^2 R_opt(A|C) <= (sqrt(x) + sqrt(|A|^2-1) sqrt(1-x))^2``, ``x = R_opt(A|B)``."""
    rho = _tripartite(rho_abc)
    dA, dB, dC = rho.dims
    x = r_opt(rho.ptrace([0, 1]), tol=SDP_TOL)
    z = r_opt(rho.ptrace([0, 2]), tol=SDP_TOL)
    return _boundary_report("monogamy", x, z, dA**2, tol, dims=[dA, dB, dC])


# -- quadratically weighted measurement and related checks --------------------

def _classical_p_opt(P):
    return float(P.max(axis=0).sum())


def quad_bound(E, tol: float = CLASSICAL_TOL) -> BoundReport:
    """``P_quad >= P_opt^3 + (1-P_opt)^3/(|X|-1)^2`` for a commuting ensemble.

    ``context`` carries the stronger comparison ``P_quad >= P_opt^2``.
    """
    E = as_ensemble(E)
    m = E.size
    P = classical_joint(E)
    lhs = p_quad_classical(P)
    p = _classical_p_opt(P)
    rhs = p**3 + (1 - p) ** 3 / (m - 1) ** 2
    square_rhs = p**2
    return make_report("quad_bound", lhs, rhs, ">=", tol, m=m, dim_b=E.dim, p_opt=p,
                       square_rhs=square_rhs, square_slack=lhs - square_rhs)


def d3_quad_relation(E, tol: float = CLASSICAL_TOL) -> BoundReport:
    """``D_3(rho_XB, pi_X (x) rho_B) <= 1/2 log(|X|^2 P_quad)`` for a commuting ensemble."""
    E = as_ensemble(E)
    m = E.size
    pq = p_quad_classical(classical_joint(E))
    lhs = sandwiched(cq_state(E).matrix, np.kron(np.eye(m) / m, E.average()), 3)
    rhs = 0.5 * math.log2(m**2 * pq)
    return make_report("d3_quad", lhs, rhs, "<=", tol, m=m, dim_b=E.dim, p_quad=pq)


def beigi_check(E, tol: float = DEFAULT_TOL) -> BoundReport:
    """``log(|X| P_pg) >= D_2(rho_XB, rho_XB/|X| + (1-1/|X|) rho_X (x) rho_B)``."""
    E = as_ensemble(E)
    m = E.size
    rho = cq_state(E).matrix
    prod = np.kron(np.diag(E.priors), E.average())
    lhs = math.log2(m * p_pg(E))
    rhs = sandwiched(rho, rho / m + (1 - 1 / m) * prod, 2)
    return make_report("beigi", lhs, rhs, ">=", tol, m=m, dim_b=E.dim)
