import itertools

import numpy as np
import pytest
from scipy.stats import unitary_group

from commpath.tuples import MatrixTuple, MultiPoly, MultiPolySystem, validate_zero_set


def rand_complex(rng, n, k=None):
    shape = (n, n) if k is None else (k, n)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def rand_hermitian(rng, n):
    A = rand_complex(rng, n)
    return (A + A.conj().T) / 2


def rand_skew(rng, n, norm=None):
    A = rand_complex(rng, n)
    K = (A - A.conj().T) / 2
    if norm is not None:
        K *= norm / np.linalg.norm(K, 2)
    return K


def haar_unitary(rng, n):
    # scipy's Haar sampler is independent of the package's Givens generator
    return unitary_group.rvs(n, random_state=rng) if n > 1 else np.exp(2j * np.pi * rng.random((1, 1)))


def commuting_hermitian(rng, n, m, values=(-1.0, 1.0)):
    U = haar_unitary(rng, n)
    rows = rng.choice(np.asarray(values), size=(n, m))
    return MatrixTuple((U * rows[:, j]) @ U.conj().T for j in range(m)), rows, U


def cube_system(m):
    polys = []
    for k in range(m):
        e = [0] * m
        e[k] = 2
        polys.append(MultiPoly(m, {tuple(e): 1, (0,) * m: -1}))
    P = MultiPolySystem(m, tuple(polys))
    return P, validate_zero_set(P, list(itertools.product([-1.0, 1.0], repeat=m)))


def rotation_instance(theta=0.05):
    P, Z = cube_system(1)
    R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    X = MatrixTuple([np.diag([1.0, -1.0])])
    return X, X.conjugate_by(R), P, Z


def quartic_disk():
    """z^4 - 1 with zero set the fourth roots of unity."""
    P = MultiPolySystem(1, (MultiPoly(1, {(4,): 1, (0,): -1}),))
    return P, validate_zero_set(P, [[1], [1j], [-1], [-1j]])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
