import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from commpath.errors import (
    BadParameterError,
    BranchEdgeError,
    NonFiniteError,
    NotHermitianError,
    NotSkewHermitianError,
    NotUnitaryError,
    ShapeMismatchError,
)
from commpath.linalg import (
    DEFAULT_TOL,
    ToleranceConfig,
    full_pinching,
    hermitian_eigen,
    jacobi_eigh,
    norm_exceeds,
    norm_upper_bound,
    operator_norm,
    polar_decompose,
    principal_skew_log,
    simultaneous_diagonalizer,
    unitary_exp,
)

from conftest import haar_unitary, rand_complex, rand_hermitian, rand_skew

TOL = DEFAULT_TOL
seeds = st.integers(0, 2**32 - 1)


def norm(A):
    return np.linalg.norm(A, 2)


# -- tolerances ---------------------------------------------------------------

def test_default_tolerances():
    assert DEFAULT_TOL.to_dict() == {
        "tol_unitary": 1e-10,
        "tol_recon": 1e-10,
        "tol_commute": 1e-9,
        "tol_member": 1e-8,
        "tol_cluster": 1e-6,
    }


@pytest.mark.parametrize("bad", [0.0, -1e-3, float("nan"), float("inf")])
def test_tolerances_must_be_positive(bad):
    with pytest.raises(BadParameterError):
        ToleranceConfig(tol_member=bad)


# -- operator norm ------------------------------------------------------------

def test_operator_norm_zero():
    assert operator_norm(np.zeros((3, 3))) == 0


def test_operator_norm_unitary(rng):
    assert operator_norm(haar_unitary(rng, 5)) == pytest.approx(1, abs=TOL.tol_recon)


def test_operator_norm_nilpotent():
    assert operator_norm([[0, 2], [0, 0]]) == pytest.approx(2, abs=1e-15)


def test_operator_norm_rejects_nonfinite():
    with pytest.raises(NonFiniteError):
        operator_norm([[1, np.nan], [0, 1]])


def test_operator_norm_rejects_nonsquare():
    with pytest.raises(ShapeMismatchError):
        operator_norm(np.ones((2, 3)))


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 7))
def test_operator_norm_adjoint_and_submultiplicative(seed, n):
    rng = np.random.default_rng(seed)
    A, B = rand_complex(rng, n), rand_complex(rng, n)
    assert abs(operator_norm(A) - operator_norm(A.conj().T)) <= TOL.tol_recon * max(1, operator_norm(A))
    assert operator_norm(A @ B) <= operator_norm(A) * operator_norm(B) * (1 + 1e-12) + TOL.tol_recon
    # dilation oracle: the hermitian [[0, A], [A*, 0]] has spectral radius ||A||
    dil = np.block([[np.zeros((n, n)), A], [A.conj().T, np.zeros((n, n))]])
    assert operator_norm(A) == pytest.approx(np.abs(np.linalg.eigvalsh(dil)).max(), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 9))
def test_norm_upper_bound_dominates(seed, n):
    A = rand_complex(np.random.default_rng(seed), n)
    assert norm_upper_bound(A) >= norm(A) * (1 - 1e-12)
    assert norm_exceeds(A, 0.5 * norm(A))
    assert not norm_exceeds(A, 2 * norm(A))


# -- hermitian eigendecomposition --------------------------------------------

def test_eigen_diagonal():
    w, Q = hermitian_eigen(np.diag([2.0, 1.0]))
    assert np.allclose(w, [1, 2])
    assert np.allclose(np.abs(Q), [[0, 1], [1, 0]])


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_eigen_pauli_x(method):
    w, _ = hermitian_eigen(np.array([[0, 1], [1, 0]]), method=method)
    assert np.allclose(w, [-1, 1], atol=1e-14)


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_eigen_reconstruction(rng, method):
    H = rand_hermitian(rng, 5)
    w, Q = hermitian_eigen(H, method=method)
    assert np.all(np.diff(w) >= 0)
    assert norm(Q.conj().T @ Q - np.eye(5)) <= TOL.tol_unitary
    assert norm((Q * w) @ Q.conj().T - H) <= TOL.tol_recon * max(1, norm(H))


def test_eigen_rejects_nonhermitian():
    with pytest.raises(NotHermitianError):
        hermitian_eigen(np.array([[0, 1], [0, 0]]))


def test_eigen_rejects_unknown_method():
    with pytest.raises(BadParameterError):
        hermitian_eigen(np.eye(2), method="qr")


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 24))
def test_jacobi_matches_lapack(seed, n):
    rng = np.random.default_rng(seed)
    H = rand_hermitian(rng, n)
    w, Q = jacobi_eigh(H)
    assert np.allclose(w, np.linalg.eigvalsh(H), atol=1e-12 * max(1, norm(H)))
    assert norm((Q * w) @ Q.conj().T - H) <= TOL.tol_recon * max(1, norm(H))
    assert norm(Q.conj().T @ Q - np.eye(n)) <= TOL.tol_unitary


def test_jacobi_degenerate_spectrum(rng):
    U = haar_unitary(rng, 8)
    H = (U * np.array([1, 1, 1, -1, -1, 0.5, 0.5, 0.5])) @ U.conj().T
    w, Q = jacobi_eigh(H)
    assert np.allclose(w, [-1, -1, 0.5, 0.5, 0.5, 1, 1, 1], atol=1e-12)
    assert norm((Q * w) @ Q.conj().T - H) <= TOL.tol_recon


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 8))
def test_eigenvalues_permutation_invariant(seed, n):
    rng = np.random.default_rng(seed)
    H = rand_hermitian(rng, n)
    Pm = np.eye(n)[rng.permutation(n)]
    for method in ("lapack", "jacobi"):
        w1 = hermitian_eigen(H, method=method).eigenvalues
        w2 = hermitian_eigen(Pm @ H @ Pm.T, method=method).eigenvalues
        assert np.allclose(w1, w2, atol=TOL.tol_recon)


# -- polar decomposition -----------------------------------------------------

def test_polar_identity():
    V, R = polar_decompose(np.eye(2))
    assert np.allclose(V, np.eye(2)) and np.allclose(R, np.eye(2))


def test_polar_scaled_identity():
    V, R = polar_decompose(2 * np.eye(2))
    assert np.allclose(V, np.eye(2)) and np.allclose(R, 2 * np.eye(2))


def test_polar_random_invertible(rng):
    A = rand_complex(rng, 4)
    V, R = polar_decompose(A)
    assert norm(V @ R - A) <= TOL.tol_recon
    assert norm(V.conj().T @ V - np.eye(4)) <= TOL.tol_unitary
    assert np.linalg.eigvalsh(R).min() >= -TOL.tol_recon


def test_polar_singular_gives_unitary_factor():
    A = np.array([[1, 0, 0], [0, 0, 0], [0, 0, 0]], dtype=complex)
    V, R = polar_decompose(A)
    assert norm(V @ R - A) <= TOL.tol_recon
    assert norm(V.conj().T @ V - np.eye(3)) <= TOL.tol_unitary


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_polar_matches_inverse_square_root_oracle(seed):
    rng = np.random.default_rng(seed)
    A = rand_complex(rng, 3)
    w, Q = np.linalg.eigh(A.conj().T @ A)
    if w.min() < 1e-6:
        return
    oracle = A @ (Q * w**-0.5) @ Q.conj().T
    V, _ = polar_decompose(A)
    assert norm(V - oracle) <= 10 * TOL.tol_recon * max(1.0, 1 / np.sqrt(w.min()))


# -- logarithm and exponential -----------------------------------------------

def test_log_identity():
    assert np.array_equal(principal_skew_log(np.eye(3)), np.zeros((3, 3)))


def test_log_quarter_turns():
    K = principal_skew_log(np.diag([1j, -1j]))
    assert np.allclose(K, np.diag([1j * np.pi / 2, -1j * np.pi / 2]), atol=1e-14)


def _right_half_plane_unitary(rng, n):
    U = haar_unitary(rng, n)
    theta = rng.uniform(-np.pi / 2 + 0.01, np.pi / 2 - 0.01, n)
    return (U * np.exp(1j * theta)) @ U.conj().T


def test_log_right_half_plane(rng):
    W = _right_half_plane_unitary(rng, 6)
    K = principal_skew_log(W)
    assert norm(sla.expm(K) - W) <= TOL.tol_recon
    assert norm(K) <= np.pi / 2 * norm(np.eye(6) - W) + TOL.tol_recon
    assert np.array_equal(K.conj().T, -K)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 8))
def test_log_matches_scipy_logm(seed, n):
    rng = np.random.default_rng(seed)
    U = haar_unitary(rng, n)
    theta = rng.uniform(-np.pi + 0.1, np.pi - 0.1, n)
    W = (U * np.exp(1j * theta)) @ U.conj().T
    K = principal_skew_log(W)
    assert norm(K - sla.logm(W)) <= 1e-9
    assert norm(K) <= np.pi + TOL.tol_recon


def test_log_repeated_eigenvalues(rng):
    U = haar_unitary(rng, 6)
    W = (U * np.exp(1j * np.array([0.3, 0.3, 0.3, -2.0, -2.0, 1.0]))) @ U.conj().T
    K = principal_skew_log(W)
    assert norm(sla.expm(K) - W) <= TOL.tol_recon


def test_log_branch_edge():
    with pytest.raises(BranchEdgeError):
        principal_skew_log(np.diag([1.0, -1.0]))
    K = principal_skew_log(np.diag([1.0, -1.0]), allow_branch_edge=True)
    assert norm(sla.expm(K) - np.diag([1.0, -1.0])) <= TOL.tol_recon


def test_log_rejects_nonunitary():
    with pytest.raises(NotUnitaryError):
        principal_skew_log(2 * np.eye(2))


def test_exp_zero_generator():
    for t in (0.0, 0.4, 1.0):
        assert np.array_equal(unitary_exp(np.zeros((2, 2)), t), np.eye(2))


def test_exp_half_turn():
    assert np.allclose(unitary_exp(np.diag([1j * np.pi]), 1.0), [[-1]], atol=1e-15)


def test_exp_at_zero_is_exact_identity(rng):
    assert np.array_equal(unitary_exp(rand_skew(rng, 4), 0.0), np.eye(4))


def test_exp_rejects_nonskew():
    with pytest.raises(NotSkewHermitianError):
        unitary_exp(np.eye(2))


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 8), st.floats(0, 1))
def test_exp_angle_bound(seed, n, t):
    rng = np.random.default_rng(seed)
    K = rand_skew(rng, n, norm=rng.uniform(0, 4))
    E = unitary_exp(K, t)
    assert norm(E.conj().T @ E - np.eye(n)) <= TOL.tol_unitary
    assert norm(E - sla.expm(t * K)) <= 1e-12
    bound = 2 * math.sin(min(t * norm(K), np.pi) / 2)
    assert norm(np.eye(n) - E) <= bound + TOL.tol_recon


def test_exp_angle_bound_example(rng):
    K = rand_skew(rng, 5)
    t = 0.37
    assert norm(np.eye(5) - unitary_exp(K, t)) <= 2 * math.sin(t * norm(K) / 2) + TOL.tol_recon


# -- pinching -----------------------------------------------------------------

def test_pinching_diagonal_fixed():
    D = np.diag([1.0, 2.0, 3.0])
    assert np.array_equal(full_pinching(D), D)


def test_pinching_example():
    assert np.array_equal(full_pinching([[1, 5], [7, 2]]), np.diag([1, 2]))


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 8))
def test_pinching_contractive_and_idempotent(seed, n):
    rng = np.random.default_rng(seed)
    A, B = rand_complex(rng, n), rand_complex(rng, n)
    assert norm(full_pinching(A) - full_pinching(B)) <= norm(A - B) * (1 + 1e-12)
    assert np.array_equal(full_pinching(full_pinching(A)), full_pinching(A))


# -- simultaneous diagonalizer -------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 16), st.integers(1, 4))
def test_simultaneous_diagonalizer_commuting_normal(seed, n, m):
    rng = np.random.default_rng(seed)
    U = haar_unitary(rng, n)
    # few distinct values so eigenspaces are degenerate in every component
    vals = rng.choice(np.array([1, -1, 1j, 0.5 - 0.5j]), size=(n, m))
    mats = [(U * vals[:, j]) @ U.conj().T for j in range(m)]
    Q = simultaneous_diagonalizer(mats, np.random.default_rng(0))
    assert norm(Q.conj().T @ Q - np.eye(n)) <= TOL.tol_unitary
    for A in mats:
        D = Q.conj().T @ A @ Q
        assert norm(D - np.diag(np.diag(D))) <= 1e-10
