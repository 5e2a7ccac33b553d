import numpy as np
import pytest

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def rand_hermitian(d, rng):
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (A + A.conj().T) / 2


def rand_density(d, rng, rank=None):
    r = d if rank is None else rank
    G = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def ket(*amps):
    v = np.asarray(amps, dtype=complex)
    return v / np.linalg.norm(v)


def proj(v):
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def helstrom(p, psi, phi):
    """Two pure states: ``(1 + sqrt(1 - 4 p q |<psi|phi>|^2)) / 2``."""
    q = 1 - p
    ov = abs(np.vdot(psi, phi)) ** 2
    return 0.5 * (1 + np.sqrt(max(0.0, 1 - 4 * p * q * ov)))


def root_fidelity_svd(rho, sigma):
    """``||sqrt(rho) sqrt(sigma)||_1`` with square roots from eigh, norm from SVD."""
    def sqrtm(M):
        w, U = np.linalg.eigh((M + M.conj().T) / 2)
        return (U * np.sqrt(np.clip(w, 0, None))) @ U.conj().T
    return float(np.linalg.svd(sqrtm(rho) @ sqrtm(sigma), compute_uv=False).sum())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
