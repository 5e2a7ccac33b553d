import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from renyibounds import states, strategies
from renyibounds.errors import InvalidState, NonCommuting
from renyibounds.strategies import (
    Channel,
    Povm,
    apply_channel,
    guessing_prob,
    identity_channel,
    p_pg,
    p_quad_classical,
    pgm,
    pretty_good_recovery,
    quad_pgm,
    r_pg,
    recovery_fidelity,
)

from conftest import ket, proj, rand_density


def kraus_choi(kraus):
    d_out, d_in = kraus[0].shape
    C = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    for k in range(d_in):
        for l in range(d_in):
            Ekl = np.zeros((d_in, d_in))
            Ekl[k, l] = 1
            C += np.kron(Ekl, sum(K @ Ekl @ K.conj().T for K in kraus))
    return C


def random_kraus(d_in, d_out, n, rng):
    G = rng.normal(size=(n * d_out, d_in)) + 1j * rng.normal(size=(n * d_out, d_in))
    Q, _ = np.linalg.qr(G)
    return [Q[i * d_out:(i + 1) * d_out] for i in range(n)]


def sqrt_pinv(M):
    w, U = np.linalg.eigh(M)
    f = np.where(w > 1e-12 * w[-1], 1 / np.sqrt(np.where(w > 0, w, 1)), 0)
    return (U * f) @ U.conj().T


def l_ensemble(m, p0):
    return states.Ensemble(states.l_distribution(m, p0), np.ones((m, 1, 1)))


def test_povm_validation():
    with pytest.raises(InvalidState) as exc:
        Povm(np.array([np.eye(2) / 2, np.eye(2) / 3]))
    assert exc.value.invariant == "completeness"
    with pytest.raises(InvalidState) as exc:
        Povm(np.array([np.diag([1.5, 0.5]), np.diag([-0.5, 0.5])]))
    assert exc.value.invariant == "psd"


def test_channel_validation():
    with pytest.raises(InvalidState) as exc:
        Channel(np.eye(4), 2, 2)
    assert exc.value.invariant == "tp"


def test_choi_convention_against_kraus(rng):
    kraus = random_kraus(3, 2, 4, rng)
    ch = Channel(kraus_choi(kraus), 3, 2)
    X = rand_density(3, rng)
    assert np.abs(ch.apply(X) - sum(K @ X @ K.conj().T for K in kraus)).max() < 1e-12
    sigma = rand_density(6, rng)
    out = apply_channel(ch, sigma, (2, 3))
    expect = sum(np.kron(np.eye(2), K) @ sigma @ np.kron(np.eye(2), K).conj().T for K in kraus)
    assert np.abs(out - expect).max() < 1e-12


def test_identity_channel(rng):
    rho = states.random_state((3, 3), rng)
    ch = identity_channel(3)
    assert np.abs(apply_channel(ch, rho.matrix, (3, 3)) - rho.matrix).max() < 1e-14
    assert abs(recovery_fidelity(states.max_entangled(3), ch) - 1) < 1e-14


def test_pgm_orthogonal():
    E = states.Ensemble([0.5, 0.5], [proj([1, 0]), proj([0, 1])])
    M = pgm(E)
    assert np.abs(M.elements[0] - proj([1, 0])).max() < 1e-14
    assert abs(guessing_prob(E, M) - 1) < 1e-14
    assert abs(p_pg(E) - 1) < 1e-12


def test_pgm_l_distribution():
    for m, p0 in [(4, 0.7), (3, 0.5), (8, 0.2)]:
        E = l_ensemble(m, p0)
        expect = p0**2 + (1 - p0) ** 2 / (m - 1)
        assert abs(guessing_prob(E, pgm(E)) - expect) < 1e-12
        assert abs(p_pg(E) - expect) < 1e-12
    assert abs(p_pg(l_ensemble(4, 0.7)) - 0.52) < 1e-12


def test_pgm_classical_collision_formula(rng):
    for _ in range(10):
        E = states.random_ensemble(3, 4, rng, classical=True)
        P = E.priors[:, None] * np.array([np.diag(s).real for s in E.states])
        expect = np.sum((P**2).sum(axis=0) / P.sum(axis=0))
        assert abs(guessing_prob(E, pgm(E)) - expect) < 1e-12


def test_pgm_kernel_completion():
    # states confined to a 2-dim subspace of C^3
    E = states.Ensemble([0.4, 0.6], [proj([1, 0, 0]), proj(ket(1, 1, 0))])
    M = pgm(E)
    assert np.abs(M.elements.sum(axis=0) - np.eye(3)).max() < 1e-12
    assert abs(M.elements[0][2, 2] - 1) < 1e-12


def test_uniform_guessing():
    E = states.random_ensemble(4, 3, seed=2)
    assert abs(guessing_prob(E, strategies.uniform_povm(4, 3)) - 0.25) < 1e-15


def test_p_pg_no_information():
    s = rand_density(3, np.random.default_rng(0))
    E = states.Ensemble(np.ones(5) / 5, np.array([s] * 5))
    assert abs(p_pg(E) - 0.2) < 1e-12


def test_quad_pgm_examples():
    E = states.Ensemble([0.3, 0.7], [proj([1, 0]), proj([0, 1])])
    assert abs(guessing_prob(E, quad_pgm(E)) - 1) < 1e-12
    single = states.Ensemble([1.0], [rand_density(3, np.random.default_rng(1))])
    assert np.abs(quad_pgm(single).elements[0] - np.eye(3)).max() < 1e-12
    L = l_ensemble(4, 0.7)
    assert abs(guessing_prob(L, quad_pgm(L)) - 0.346 / 0.52) < 1e-12
    assert abs(p_quad_classical(states.l_distribution(4, 0.7)) - 0.6653846153846154) < 1e-12


def test_p_quad_classical():
    assert abs(p_quad_classical(np.diag([0.2, 0.5, 0.3])) - 1) < 1e-15
    for seed in range(10):
        E = states.random_ensemble(3, 3, seed, classical=True)
        P = strategies.classical_joint(E)
        assert abs(p_quad_classical(P) - guessing_prob(E, quad_pgm(E))) < 1e-10


def test_common_eigenbasis_rotated(rng):
    E = states.random_ensemble(3, 3, rng, classical=True)
    U = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))[0]
    F = states.Ensemble(E.priors, np.array([U @ s @ U.conj().T for s in E.states]))
    P0 = strategies.classical_joint(E)
    P1 = strategies.classical_joint(F)
    assert abs(p_quad_classical(P0) - p_quad_classical(P1)) < 1e-10
    with pytest.raises(NonCommuting):
        strategies.common_eigenbasis(states.random_ensemble(2, 2, seed=3))


def test_pretty_good_recovery_contract(rng):
    # fidelity equals Tr[K rho]/|A| with K = rho_B^{-1/2} rho rho_B^{-1/2}, complex states included
    for dA, dB in [(2, 2), (2, 3), (3, 2), (3, 3)]:
        rho = states.random_state((dA, dB), rng).matrix
        rho_b = np.einsum("abac->bc", rho.reshape(dA, dB, dA, dB))
        S = np.kron(np.eye(dA), sqrt_pinv(rho_b))
        K = S @ rho @ S
        expect = np.trace(K @ rho).real / dA
        ch = pretty_good_recovery(rho, dims=(dA, dB))
        assert abs(recovery_fidelity(rho, ch, dims=(dA, dB)) - expect) < 1e-10
        assert abs(r_pg(rho, dims=(dA, dB)) - expect) < 1e-10


def test_pretty_good_recovery_rank_deficient(rng):
    # B marginal with a kernel: the channel must stay trace preserving
    psi = states.random_state((2, 2), rng, pure_state=True).matrix
    rho = np.zeros((6, 6), dtype=complex)
    idx = [0, 1, 3, 4]
    rho[np.ix_(idx, idx)] = psi
    ch = pretty_good_recovery(rho, dims=(2, 3))
    assert abs(recovery_fidelity(rho, ch, dims=(2, 3)) - r_pg(rho, dims=(2, 3))) < 1e-10


def test_pretty_good_recovery_examples():
    assert abs(recovery_fidelity(states.max_entangled(3), pretty_good_recovery(states.max_entangled(3))) - 1) < 1e-12
    sigma = rand_density(3, np.random.default_rng(5))
    prod = states.DensityOperator(np.kron(np.eye(2) / 2, sigma), (2, 3))
    assert abs(recovery_fidelity(prod, pretty_good_recovery(prod)) - 0.25) < 1e-12
    assert abs(r_pg(prod) - 0.25) < 1e-12
    assert abs(r_pg(states.max_entangled(2)) - 1) < 1e-12
    bd = states.bell_diagonal(2, [0.7, 0.1, 0.1, 0.1])
    assert abs(r_pg(bd) - 0.52) < 1e-12


def test_any_channel_on_product(rng):
    sigma = rand_density(2, rng)
    prod = states.DensityOperator(np.kron(np.eye(3) / 3, sigma), (3, 2))
    ch = Channel(kraus_choi(random_kraus(2, 3, 3, rng)), 2, 3)
    assert abs(recovery_fidelity(prod, ch) - 1 / 9) < 1e-12


def test_identity_on_monogamy_marginal():
    rho_ab = states.monogamy_state(2, np.pi / 4).ptrace([0, 1])
    rho_ab = states.DensityOperator(rho_ab, (2, 2))
    assert abs(recovery_fidelity(rho_ab, identity_channel(2)) - 0.75) < 1e-12
    d, t = 3, 0.4
    rho_ab = states.DensityOperator(states.monogamy_state(d, t).ptrace([0, 1]), (d, d))
    expect = (d * np.cos(t) + np.sin(t)) ** 2 / (d * (d + np.sin(2 * t)))
    assert abs(recovery_fidelity(rho_ab, identity_channel(d)) - expect) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_pgm_identity_property(m, d, seed):
    E = states.random_ensemble(m, d, seed)
    assert abs(p_pg(E) - guessing_prob(E, pgm(E))) < 1e-8


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_recovery_identity_property(dA, dB, seed):
    rho = states.random_state((dA, dB), seed)
    assert abs(r_pg(rho) - recovery_fidelity(rho, pretty_good_recovery(rho))) < 1e-8
