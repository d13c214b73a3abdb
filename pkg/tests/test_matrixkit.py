import numpy as np
import pytest

from scfde.channel import PowerDelayProfile, convolve_channel, draw_channel
from scfde.errors import ConvergenceError
from scfde.matrixkit import (
    DftOperator,
    circulant_eigenvalues,
    dft_first_columns,
    regularized_ls,
    top_left_singular_vector,
)


def unitary_dft_matrix(P):
    """Oracle construction, independent of the library's FFT path."""
    k = np.arange(P)
    return np.exp(-2j * np.pi * np.outer(k, k) / P) / np.sqrt(P)


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_forward_inverse_round_trip():
    rng = np.random.default_rng(0)
    dft = DftOperator(33)
    v = random_complex(rng, 33)
    assert np.linalg.norm(dft.inverse(dft.forward(v)) - v) / np.linalg.norm(v) < 1e-10
    A = random_complex(rng, 33, 5)
    assert np.linalg.norm(dft.forward(dft.inverse(A)) - A) / np.linalg.norm(A) < 1e-10


def test_parseval():
    rng = np.random.default_rng(1)
    dft = DftOperator(50)
    v = random_complex(rng, 50)
    assert abs(np.linalg.norm(dft.forward(v)) - np.linalg.norm(v)) < 1e-10


def test_first_columns_orthonormal():
    F_L = dft_first_columns(32, 7)
    gram = F_L.conj().T @ F_L
    assert np.linalg.norm(gram - np.eye(7)) < 1e-10


def test_first_columns_matches_oracle_matrix():
    F = unitary_dft_matrix(16)
    assert np.allclose(dft_first_columns(16, 5), F[:, :5], rtol=0, atol=1e-13)


def test_circulant_eigenvalues_delta_is_flat():
    x = np.zeros(12)
    x[0] = 1.0
    assert np.allclose(circulant_eigenvalues(x), np.ones(12), rtol=0, atol=1e-13)


def test_circulant_eigenvalues_dc_only():
    ev = circulant_eigenvalues(np.ones(9))
    expected = np.zeros(9, dtype=complex)
    expected[0] = 9.0
    assert np.allclose(ev, expected, rtol=0, atol=1e-12)


def test_circulant_diagonalization_explicit_p8():
    # oracle: build the circulant with first column x and diagonalize by hand
    rng = np.random.default_rng(2)
    P = 8
    x = random_complex(rng, P)
    C = x[(np.arange(P)[:, None] - np.arange(P)[None, :]) % P]
    F = unitary_dft_matrix(P)
    D = F @ C @ F.conj().T
    off = D - np.diag(np.diag(D))
    assert np.linalg.norm(off) < 1e-12 * np.linalg.norm(D)
    assert np.allclose(np.diag(D), circulant_eigenvalues(x), rtol=1e-12, atol=1e-12)


def test_frequency_model_identity_noiseless():
    # the package-wide bedrock: Yf = diag(ev(x)) F_L H_L exactly without noise
    rng = np.random.default_rng(3)
    for P in (16, 64, 256):
        L = 4
        x = random_complex(rng, P)
        ch = draw_channel(PowerDelayProfile.geometric(L), 3, rng)
        Yf = DftOperator(P).forward(convolve_channel(x, ch))
        model = circulant_eigenvalues(x)[:, None] * (dft_first_columns(P, L) @ ch.taps)
        assert np.linalg.norm(Yf - model) / np.linalg.norm(Yf) < 1e-10


def test_power_iteration_rank_one():
    rng = np.random.default_rng(4)
    u0 = random_complex(rng, 10)
    u0 /= np.linalg.norm(u0)
    v0 = random_complex(rng, 3)
    u = top_left_singular_vector(np.outer(u0, v0.conj()))
    assert abs(np.vdot(u, u0)) > 1 - 1e-8


def test_power_iteration_dominant_axis():
    Yf = np.zeros((8, 4), dtype=complex)
    Yf[0, 0] = 3.0
    Yf[1, 1] = 1.0
    u = top_left_singular_vector(Yf)
    assert abs(u[0]) > 1 - 1e-9


def test_power_iteration_matches_svd_oracle():
    rng = np.random.default_rng(5)
    for _ in range(20):
        Yf = random_complex(rng, 8, 4)
        u = top_left_singular_vector(Yf)
        u_svd = np.linalg.svd(Yf)[0][:, 0]
        assert abs(np.vdot(u, u_svd)) > 1 - 1e-6
        assert abs(np.linalg.norm(u) - 1.0) < 1e-12


def test_power_iteration_invariant_under_column_permutation():
    rng = np.random.default_rng(6)
    Yf = random_complex(rng, 12, 6)
    u1 = top_left_singular_vector(Yf)
    u2 = top_left_singular_vector(Yf[:, ::-1])
    assert abs(np.vdot(u1, u2)) > 1 - 1e-9


def test_power_iteration_near_tied_spectrum_raises():
    def rot(t):
        return np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])

    A = (rot(0.7) @ np.diag([1.0, 1.0 - 1e-6]) @ rot(0.3)).astype(complex)
    with pytest.raises(ConvergenceError) as info:
        top_left_singular_vector(A)
    estimate = info.value.estimate
    assert estimate.shape == (2,)
    assert abs(np.linalg.norm(estimate) - 1.0) < 1e-9


def test_power_iteration_zero_matrix_rejected():
    with pytest.raises(ValueError):
        top_left_singular_vector(np.zeros((4, 2), dtype=complex))


def test_regularized_ls_projection_for_orthonormal_columns():
    rng = np.random.default_rng(7)
    Q, _ = np.linalg.qr(random_complex(rng, 16, 3))
    Yf = random_complex(rng, 16, 4)
    H = regularized_ls(Q, Yf, 0.0)
    assert np.allclose(H, Q.conj().T @ Yf, rtol=1e-12, atol=1e-12)


def test_regularized_ls_matches_normal_equation_oracle():
    rng = np.random.default_rng(8)
    for _ in range(100):
        A = random_complex(rng, 16, 3)
        Yf = random_complex(rng, 16, 4)
        mu = 0.5
        H = regularized_ls(A, Yf, mu)
        gram = A.conj().T @ A + mu * np.eye(3)
        oracle = np.linalg.inv(gram) @ (A.conj().T @ Yf)
        assert np.linalg.norm(H - oracle) / np.linalg.norm(oracle) < 1e-10


def test_regularized_ls_unregularized_normal_equations_residual():
    rng = np.random.default_rng(9)
    A = random_complex(rng, 20, 4)
    Yf = random_complex(rng, 20, 3)
    H = regularized_ls(A, Yf, 0.0)
    residual = A.conj().T @ (Yf - A @ H)
    assert np.linalg.norm(residual) < 1e-9


def test_regularized_ls_dominated_by_large_mu():
    rng = np.random.default_rng(10)
    A = random_complex(rng, 16, 3)
    Yf = random_complex(rng, 16, 2)
    mu = 1e12
    H = regularized_ls(A, Yf, mu)
    assert np.linalg.norm(H) <= np.linalg.norm(A.conj().T @ Yf) / mu * (1 + 1e-9)


def test_regularized_ls_negative_mu_rejected():
    with pytest.raises(ValueError):
        regularized_ls(np.eye(3, dtype=complex), np.eye(3, dtype=complex), -0.1)


def test_dft_first_columns_bounds_checked():
    with pytest.raises(ValueError):
        dft_first_columns(8, 9)
    with pytest.raises(ValueError):
        dft_first_columns(8, 0)
