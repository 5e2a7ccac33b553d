import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from renyibounds import states
from renyibounds.linalg import partial_trace
from renyibounds.divergences import (
    binary_d,
    binary_entropy,
    cond_entropy_down,
    fidelity,
    renyi_classical,
    sandwiched,
    von_neumann_entropy,
)
from renyibounds.errors import OutOfRange, UnsupportedAlpha

from conftest import ket, proj, rand_density, root_fidelity_svd

ALPHAS = [0.5, 0.8, 1.0, 1.5, 2.0, 3.0, math.inf]


def classical_oracle(P, Q, a):
    """Direct sums for strictly positive vectors."""
    P, Q = np.asarray(P, float), np.asarray(Q, float)
    if a == 1:
        return float(np.sum(P * np.log2(P / Q)))
    if a == math.inf:
        return float(np.log2(np.max(P / Q)))
    return float(np.log2(np.sum(P**a * Q ** (1 - a))) / (a - 1))


@pytest.mark.parametrize("alpha", [0.0, 0.3] + ALPHAS)
def test_classical_self_is_zero(alpha):
    P = [0.2, 0.3, 0.5]
    assert abs(renyi_classical(P, P, alpha)) < 1e-14


def test_classical_examples():
    assert abs(renyi_classical([1, 0], [0.5, 0.5], 2) - 1) < 1e-14
    assert renyi_classical([1, 0], [0, 1], 2) == math.inf
    assert renyi_classical([1, 0], [0, 1], 1) == math.inf
    assert abs(renyi_classical([0.5, 0.5, 0], [0.25, 0.25, 0.5], 0) - 1) < 1e-14


@pytest.mark.parametrize("alpha", ALPHAS)
def test_classical_matches_oracle(alpha, rng):
    P, Q = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
    assert abs(renyi_classical(P, Q, alpha) - classical_oracle(P, Q, alpha)) < 1e-12


def test_binary():
    for a in ALPHAS:
        assert abs(binary_d(0.3, 0.3, a)) < 1e-14
    for m in (2, 3, 7):
        assert abs(binary_d(1, 1 / m, math.inf) - math.log2(m)) < 1e-14
    assert binary_d(0.7, 0.25, 2) == renyi_classical([0.7, 0.3], [0.25, 0.75], 2)
    with pytest.raises(OutOfRange):
        binary_d(1.2, 0.5, 2)


def test_binary_entropy():
    assert binary_entropy(0) == 0 and binary_entropy(1) == 0
    assert abs(binary_entropy(0.5) - 1) < 1e-15
    with pytest.raises(OutOfRange):
        binary_entropy(-0.1)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_sandwiched_self_is_zero(alpha, rng):
    rho = rand_density(3, rng)
    assert abs(sandwiched(rho, rho, alpha)) < 1e-10


@pytest.mark.parametrize("alpha", ALPHAS)
def test_sandwiched_classical_reduction(alpha, rng):
    P, Q = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
    val = sandwiched(np.diag(P), np.diag(Q), alpha)
    assert abs(val - classical_oracle(P, Q, alpha)) < 1e-10


def test_sandwiched_half_is_fidelity(rng):
    for _ in range(10):
        rho, sigma = rand_density(2, rng), rand_density(2, rng)
        assert abs(sandwiched(rho, sigma, 0.5) + 2 * math.log2(fidelity(rho, sigma))) < 1e-10


def test_sandwiched_direct_formula(rng):
    # independent evaluation through eigh-based powers
    def power(M, t):
        w, U = np.linalg.eigh(M)
        return (U * w**t) @ U.conj().T

    rho, sigma = rand_density(3, rng), rand_density(3, rng)
    for a in (0.7, 2.0, 3.0):
        s = power(sigma, (1 - a) / (2 * a))
        mu = np.linalg.eigvalsh(s @ rho @ s)
        expect = math.log2(np.sum(mu**a)) / (a - 1)
        assert abs(sandwiched(rho, sigma, a) - expect) < 1e-10


def test_sandwiched_umegaki(rng):
    def logm(M):
        w, U = np.linalg.eigh(M)
        return (U * np.log2(w)) @ U.conj().T

    rho, sigma = rand_density(3, rng), rand_density(3, rng)
    expect = np.trace(rho @ (logm(rho) - logm(sigma))).real
    assert abs(sandwiched(rho, sigma, 1) - expect) < 1e-10


def test_sandwiched_max_divergence_is_min_scale(rng):
    rho, sigma = rand_density(3, rng), rand_density(3, rng)
    lam = 2 ** sandwiched(rho, sigma, math.inf)
    w = np.linalg.eigvalsh(lam * sigma - rho)
    assert w[0] > -1e-10 and w[0] < 1e-8


def test_sandwiched_support_violation():
    rho, sigma = np.diag([0.5, 0.5]), np.diag([1.0, 0.0])
    for a in (1.0, 2.0, math.inf):
        assert sandwiched(rho, sigma, a) == math.inf
    assert sandwiched(rho, sigma, 0.5) < math.inf


def test_sandwiched_monotone_in_alpha(rng):
    rho, sigma = rand_density(3, rng), rand_density(3, rng)
    vals = [sandwiched(rho, sigma, a) for a in ALPHAS]
    assert all(b >= a - 1e-10 for a, b in zip(vals, vals[1:]))


def test_sandwiched_rejects_small_alpha():
    with pytest.raises(UnsupportedAlpha):
        sandwiched(np.eye(2) / 2, np.eye(2) / 2, 0.3)


def test_fidelity_examples(rng):
    rho = rand_density(3, rng)
    assert abs(fidelity(rho, rho) - 1) < 1e-10
    a, b = ket(1, 2j, 0.5), ket(0.3, -1, 1j)
    assert abs(fidelity(proj(a), proj(b)) - abs(np.vdot(a, b))) < 1e-7
    assert abs(fidelity(np.eye(2) / 2, np.diag([1, 0])) - 1 / math.sqrt(2)) < 1e-14


def test_fidelity_matches_svd_oracle(rng):
    for _ in range(10):
        rho, sigma = rand_density(4, rng), rand_density(4, rng)
        assert abs(fidelity(rho, sigma) - root_fidelity_svd(rho, sigma)) < 1e-10


def test_cond_entropy():
    sigma = states.random_density(3, seed=1).matrix
    prod = np.kron(np.eye(2) / 2, sigma)
    for a in ALPHAS:
        assert abs(cond_entropy_down(prod, a, dims=(2, 3)) - 1) < 1e-10
    for d in (2, 3):
        assert abs(cond_entropy_down(states.max_entangled(d), 1) + math.log2(d)) < 1e-10
    corr = np.diag([0.5, 0, 0, 0.5])
    assert abs(cond_entropy_down(corr, 1, dims=(2, 2))) < 1e-12


def test_von_neumann():
    assert abs(von_neumann_entropy(np.eye(4) / 4) - 2) < 1e-14


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 4), st.sampled_from([0.5, 1.0, 2.0, math.inf]), st.integers(0, 2**32 - 1))
def test_data_processing_under_partial_trace(d, alpha, seed):
    rng = np.random.default_rng(seed)
    rho, sigma = rand_density(2 * d, rng), rand_density(2 * d, rng)
    r, s = partial_trace(rho, (2, d), [1]), partial_trace(sigma, (2, d), [1])
    assert sandwiched(r, s, alpha) <= sandwiched(rho, sigma, alpha) + 1e-9
