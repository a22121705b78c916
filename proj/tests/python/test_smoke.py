import math

import numpy as np
import pytest

import balsel


def test_scalar_lyapunov_and_h2():
    assert balsel.solve_lyapunov(np.array([[-1.0]]), np.array([[1.0]]))[0, 0] == pytest.approx(0.5)
    a, b, c = np.array([[-1.0]]), np.array([[1.0]]), np.array([[1.0]])
    assert balsel.h2_norm(a, b, c) == pytest.approx(math.sqrt(0.5), rel=1e-12)


def test_stein_and_care_residuals():
    a = np.array([[0.5]])
    assert balsel.solve_stein(a, np.array([[1.0]]))[0, 0].real == pytest.approx(4.0 / 3.0)
    x = balsel.solve_care(np.array([[-1.0]]), np.array([[1.0]]), np.array([[1.0]]), np.array([[1.0]]))
    assert x[0, 0].real == pytest.approx(math.sqrt(2.0) - 1.0, abs=1e-12)


def test_gramians_and_balance():
    a, b, c = balsel.random_system(10, 3, 2, seed=4)
    wc, wo = balsel.gramians(a, b, c)
    assert np.linalg.norm(a @ wc + wc @ a.conj().T + b @ b.conj().T) < 1e-9 * np.linalg.norm(b) ** 2
    psi, phi, hankel = balsel.balance(wc, wo, 3)
    assert psi.shape == (10, 3) and phi.shape == (10, 3)
    assert np.allclose(phi.conj().T @ psi, np.eye(3), atol=1e-8)
    assert all(hankel[i] >= hankel[i + 1] for i in range(len(hankel) - 1))


def test_pivoted_qr_order():
    order, rdiag = balsel.pivoted_qr(np.array([[1.0, 0.0, 2.0], [0.0, 1.0, 0.0]]))
    assert order[0] == 2
    assert rdiag[0] == pytest.approx(2.0)


def test_select_and_brute_force():
    a, b, c = balsel.random_system(8, 8, 8, seed=31, discrete=True)
    gamma, beta = balsel.select(a, b, c, 3, discrete=True)
    assert len(set(gamma)) == 3 and len(set(beta)) == 3
    wc, _ = balsel.gramians(a, b, c, discrete=True)
    gram = c @ wc @ c.conj().T
    best, value, values = balsel.brute_force(gram, 3)
    assert len(values) == 56
    assert value >= balsel.logdet(gram, gamma) - 1e-12


def test_errors_are_typed():
    with pytest.raises(balsel.DomainError):
        balsel.solve_lyapunov(np.array([[1.0]]), np.array([[1.0]]))
    with pytest.raises(balsel.Error):
        balsel.solve_stein(np.array([[2.0]]), np.array([[1.0]]))
    with pytest.raises(balsel.SizeError):
        balsel.brute_force(np.eye(25), 7, cap=10)
