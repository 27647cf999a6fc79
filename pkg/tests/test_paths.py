import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from commpath.errors import BadParameterError, DiscontinuousJoinError, NotCrossCommutingError, NotMemberError
from commpath.linalg import DEFAULT_TOL
from commpath.paths import (
    ConjugationSegment,
    LinearSegment,
    MatrixPath,
    concat,
    constant_path,
    flat_path,
    juncture_path,
)
from commpath.tuples import MatrixTuple, juncture, metric, partition

from conftest import commuting_hermitian, haar_unitary, rand_skew

TOL = DEFAULT_TOL


def diag_tuple(*diags):
    return MatrixTuple([np.diag(np.asarray(d, dtype=complex)) for d in diags])


# -- segments ------------------------------------------------------------------

def test_linear_segment_endpoints_exact():
    X, Y = diag_tuple([1, -1]), diag_tuple([0.5, -0.5])
    seg = LinearSegment(X, Y)
    assert seg.sample(0.0) is X and seg.sample(1.0) is Y
    assert np.allclose(seg.sample(0.5)[0], np.diag([0.75, -0.75]))


def test_linear_segment_shape_mismatch():
    with pytest.raises(BadParameterError):
        LinearSegment(diag_tuple([1, -1]), diag_tuple([1, -1, 1]))


def test_conjugation_segment_preserves_spectrum(rng):
    X, rows, _ = commuting_hermitian(rng, 5, 2, values=(-1.0, 0.5, 1.0))
    seg = ConjugationSegment(X, rand_skew(rng, 5, norm=0.3), 1.0, 0.0)
    assert seg.sample(1.0) is X  # tau = 0 returns the base itself
    for s in np.linspace(0, 1, 7):
        T = seg.sample(s)
        for j in range(2):
            assert np.allclose(np.linalg.eigvalsh(T[j]), np.sort(rows[:, j]), atol=1e-12)


def test_conjugation_segment_unitary_matches_expm(rng):
    from scipy.linalg import expm

    K = rand_skew(rng, 4, norm=0.7)
    seg = ConjugationSegment(MatrixTuple([np.eye(4)]), K, 0.2, 0.9)
    assert np.allclose(seg.unitary(0.5), expm(0.55 * K), atol=1e-12)


def test_conjugation_segment_dimension_mismatch(rng):
    with pytest.raises(BadParameterError):
        ConjugationSegment(MatrixTuple([np.eye(3)]), rand_skew(rng, 4), 0.0, 1.0)


# -- MatrixPath and concatenation ----------------------------------------------

def test_path_endpoint_contract():
    X, Y = diag_tuple([1, -1]), diag_tuple([0.5, -0.5])
    path = MatrixPath([LinearSegment(X, Y)])
    assert path.sample(0.0).equals(X) and path.sample(1.0).equals(Y)
    assert path.m == 1 and path.n == 2


@pytest.mark.parametrize("knots", [[0, 1, 1], [0.1, 0.5, 1], [0, 0.5, 0.9], [0, 0.6, 0.4, 1], [0, 1]])
def test_path_rejects_bad_knots(knots):
    X = diag_tuple([1, -1])
    with pytest.raises(BadParameterError):
        MatrixPath([LinearSegment(X, X), LinearSegment(X, X)], knots)


def test_path_rejects_empty_and_out_of_range():
    X = diag_tuple([1, -1])
    with pytest.raises(BadParameterError):
        MatrixPath([])
    with pytest.raises(BadParameterError):
        constant_path(X).sample(1.5)


def test_path_rejects_discontinuous_segments():
    X, Y = diag_tuple([1, -1]), diag_tuple([0.5, -0.5])
    with pytest.raises(DiscontinuousJoinError):
        MatrixPath([LinearSegment(X, X), LinearSegment(Y, Y)])


def test_concat_constants():
    X = diag_tuple([1, -1])
    path = concat(constant_path(X), constant_path(X))
    for t in np.linspace(0, 1, 9):
        assert metric(path.sample(t), X) == 0


def test_concat_midpoint_is_junction():
    X, Y, W = diag_tuple([1, -1]), diag_tuple([0.5, -0.5]), diag_tuple([0, 0])
    path = concat(MatrixPath([LinearSegment(X, Y)]), MatrixPath([LinearSegment(Y, W)]))
    assert metric(path.sample(0.5), Y) <= TOL.tol_recon
    assert list(path.knots) == [0, 0.5, 1]
    assert metric(path.sample(0.25), diag_tuple([0.75, -0.75])) <= 1e-15


def test_concat_rejects_gap():
    X, Y = diag_tuple([1, -1]), diag_tuple([0.5, -0.5])
    with pytest.raises(DiscontinuousJoinError):
        concat(constant_path(X), constant_path(Y))


def three_paths():
    A, B, C, D = (diag_tuple([v, -v]) for v in (1.0, 0.5, 0.0, -0.5))
    return (MatrixPath([LinearSegment(A, B)]), MatrixPath([LinearSegment(B, C)]), MatrixPath([LinearSegment(C, D)]))


def test_concat_associative_up_to_reparametrization():
    a, b, c = three_paths()
    left = concat(concat(a, b), c)
    right = concat(a, concat(b, c))
    # the two parametrizations place a, b, c on [0,1/4,1/2,1] and [0,1/2,3/4,1]
    assert list(left.knots) == [0, 0.25, 0.5, 1]
    assert list(right.knots) == [0, 0.5, 0.75, 1]
    coarse, fine = np.linspace(0, 1, 129), np.linspace(0, 1, 1025)
    # every coarse dyadic sample of one path reappears on the fine dyadic grid of the other
    for one, other in ((left, right), (right, left)):
        dense = [other.sample(t) for t in fine]
        for t in coarse:
            P = one.sample(t)
            assert min(metric(P, Q) for Q in dense) <= TOL.tol_recon


def test_certification_grid_covers_segments():
    a, b, c = three_paths()
    path = concat(concat(a, b), c)
    grid = path.certification_grid(129, 65)
    assert grid[0] == 0 and grid[-1] == 1 and np.all(np.diff(grid) > 0)
    for lo, hi in zip(path.knots[:-1], path.knots[1:]):
        assert np.sum((grid >= lo) & (grid <= hi)) >= 65
    assert len(constant_path(diag_tuple([1])).certification_grid(129, 65)) == 129


# -- flat paths ----------------------------------------------------------------

def test_flat_path_constant():
    X = diag_tuple([1, -1])
    path = flat_path(X, X)
    for t in np.linspace(0, 1, 5):
        assert metric(path.sample(t), X) == 0


def test_flat_path_distance_example():
    X, Y = diag_tuple([1, -1]), diag_tuple([0.5, -0.5])
    path = flat_path(X, Y)
    assert metric(X, Y) == 0.5
    assert metric(path.sample(0.5), Y) == pytest.approx(0.25, abs=1e-15)


def test_flat_path_errors():
    X = diag_tuple([1, -1])
    Y = MatrixTuple([np.array([[0, 1], [1, 0]], dtype=complex)])
    with pytest.raises(NotCrossCommutingError):
        flat_path(X, Y)
    with pytest.raises(NotMemberError):
        flat_path(X, diag_tuple([2, 0]))
    with pytest.raises(BadParameterError):
        flat_path(X, diag_tuple([1, -1, 0]))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.integers(1, 3))
def test_flat_path_monotone_distance(seed, n, m):
    rng = np.random.default_rng(seed)
    U = haar_unitary(rng, n)
    xs, ys = rng.uniform(-1, 1, (2, n, m))
    X = MatrixTuple((U * xs[:, j]) @ U.conj().T for j in range(m))
    Y = MatrixTuple((U * ys[:, j]) @ U.conj().T for j in range(m))
    path = flat_path(X, Y, tol=TOL)
    d0 = metric(X, Y)
    for t in np.linspace(0, 1, 11):
        T = path.sample(t)
        assert metric(T, Y) <= (1 - t) * d0 + TOL.tol_recon
        assert max(np.linalg.norm(A, 2) for A in T) <= 1 + TOL.tol_member


# -- juncture ------------------------------------------------------------------

def test_juncture_path_maps_points(rng):
    U = haar_unitary(rng, 3)
    z = np.array([0.3 + 0.4j, -0.5j, 0.6])
    X = MatrixTuple([(U * z) @ U.conj().T])
    K = rand_skew(rng, 3, norm=0.2)
    H = partition(X)
    hpath = MatrixPath([ConjugationSegment(H, K, 0.0, 1.0)])
    cpath = juncture_path(hpath)
    for t in np.linspace(0, 1, 5):
        assert metric(cpath.sample(t), juncture(hpath.sample(t))) <= 1e-14
    assert cpath.m == 1 and hpath.m == 2
