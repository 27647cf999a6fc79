"""Dense complex linear-algebra kernels.

Hermitian eigensolvers (LAPACK and a parallel-ordered cyclic Jacobi), the
operator norm, polar decomposition, the full pinching, and the principal
logarithm / exponential pair for unitary and skew-hermitian matrices.

All functions are pure: inputs are never modified.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    BadParameterError,
    BranchEdgeError,
    NonFiniteError,
    NotHermitianError,
    NotSkewHermitianError,
    NotUnitaryError,
    ShapeMismatchError,
)


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical gates shared by every module.

    Matrices are assumed pre-scaled to contractions, so all gates are
    absolute unless a docstring says otherwise.
    """

    tol_unitary: float = 1e-10
    tol_recon: float = 1e-10
    tol_commute: float = 1e-9
    tol_member: float = 1e-8
    tol_cluster: float = 1e-6

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not (np.isfinite(value) and value > 0):
                raise BadParameterError(f"{name} must be a finite positive real, got {value!r}")

    def to_dict(self) -> dict:
        return asdict(self)


DEFAULT_TOL = ToleranceConfig()


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    Q: np.ndarray


def as_matrix(A) -> np.ndarray:
    """Return ``A`` as a square complex128 array, rejecting NaN/Inf."""
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeMismatchError(f"expected a square matrix, got shape {M.shape}")
    if not np.isfinite(M).all():
        raise NonFiniteError("matrix has non-finite entries")
    return M


def dagger(A: np.ndarray) -> np.ndarray:
    return A.conj().T


def operator_norm(A) -> float:
    """Largest singular value of ``A`` (spectral norm)."""
    M = as_matrix(A)
    if M.shape[0] == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def _norm(A: np.ndarray) -> float:
    # unchecked variant for internal hot loops
    return float(np.linalg.norm(A, 2)) if A.size else 0.0


def norm_upper_bound(A: np.ndarray) -> float:
    """Cheap upper bound on the spectral norm: min of the Frobenius norm and
    sqrt(||A||_1 ||A||_inf)."""
    if A.size == 0:
        return 0.0
    a = np.abs(A)
    return float(min(np.sqrt(np.sum(a * a)), np.sqrt(a.sum(axis=0).max() * a.sum(axis=1).max())))


def norm_exceeds(A: np.ndarray, bound: float) -> bool:
    """``||A||_2 > bound``, computing the SVD only when the cheap bound is inconclusive."""
    return norm_upper_bound(A) > bound and _norm(A) > bound


def hermitian_defect(A) -> float:
    M = as_matrix(A)
    return _norm(M - dagger(M))


def skew_defect(A) -> float:
    M = as_matrix(A)
    return _norm(M + dagger(M))


def unitary_defect(A) -> float:
    M = as_matrix(A)
    return _norm(dagger(M) @ M - np.eye(M.shape[0]))


def normality_defect(A) -> float:
    M = as_matrix(A)
    return _norm(M @ dagger(M) - dagger(M) @ M)


def commutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return A @ B - B @ A


def full_pinching(A) -> np.ndarray:
    """Diagonal matrix carrying the diagonal of ``A``."""
    M = as_matrix(A)
    return np.diag(np.diag(M))


# ---------------------------------------------------------------------------
# Hermitian eigensolvers
# ---------------------------------------------------------------------------

def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairings for a parallel Jacobi sweep (circle method).

    Each round is a set of disjoint index pairs; together the rounds cover
    every pair (p, q) exactly once.
    """
    players = list(range(n + (n % 2)))
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        ps, qs = [], []
        for i in range(size // 2):
            a, b = players[i], players[size - 1 - i]
            if a < n and b < n:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=int), np.array(qs, dtype=int)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(H, max_sweeps: int = 60, rtol: float = 1e-13) -> EigenDecomposition:
    """Cyclic Jacobi eigensolver for a hermitian matrix.

    Rotations are applied in round-robin order so that the n/2 rotations of a
    round touch disjoint rows and columns and can be applied together.
    Iterates until the off-diagonal Frobenius mass drops below
    ``rtol * ||H||_F`` or ``max_sweeps`` sweeps have run.
    """
    A = as_matrix(H).copy()
    A = (A + dagger(A)) / 2
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    if n <= 1:
        return EigenDecomposition(np.real(np.diag(A)).copy(), V)
    target = rtol * max(np.linalg.norm(A), np.finfo(float).tiny)
    rounds = _round_robin(n)
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off < target:
            break
        for p, q in rounds:
            b = A[p, q]
            mag = np.abs(b)
            active = mag > 0
            if not active.any():
                continue
            p, q, b, mag = p[active], q[active], b[active], mag[active]
            app = A[p, p].real
            aqq = A[q, q].real
            phase = b / mag
            tau = (aqq - app) / (2 * mag)
            t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1 + tau * tau))
            c = 1 / np.sqrt(1 + t * t)
            s = t * c
            # G = diag(1, conj(phase)) @ [[c, s], [-s, c]]
            g11 = c.astype(complex)
            g12 = s.astype(complex)
            g21 = -s * phase.conj()
            g22 = c * phase.conj()
            Ap, Aq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = Ap * g11 + Aq * g21
            A[:, q] = Ap * g12 + Aq * g22
            Ap, Aq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = g11.conj()[:, None] * Ap + g21.conj()[:, None] * Aq
            A[q, :] = g12.conj()[:, None] * Ap + g22.conj()[:, None] * Aq
            A[p, q] = 0
            A[q, p] = 0
            Vp, Vq = V[:, p].copy(), V[:, q].copy()
            V[:, p] = Vp * g11 + Vq * g21
            V[:, q] = Vp * g12 + Vq * g22
    w = np.real(np.diag(A))
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(w[order], V[:, order])


def hermitian_eigen(H, tol: ToleranceConfig = DEFAULT_TOL, method: str = "lapack") -> EigenDecomposition:
    """Eigendecomposition of a hermitian matrix, eigenvalues ascending.

    ``method`` selects LAPACK (``"lapack"``) or the cyclic Jacobi kernel
    (``"jacobi"``); both return ``Q`` unitary with ``Q diag(w) Q* = H``.

    Raises NotHermitianError if ``||H - H*|| > tol_member * max(1, ||H||)``.
    """
    M = as_matrix(H)
    scale = max(1.0, _norm(M))
    if norm_exceeds(M - dagger(M), tol.tol_member * scale):
        raise NotHermitianError("matrix is not hermitian within tol_member")
    M = (M + dagger(M)) / 2
    if method == "jacobi":
        return jacobi_eigh(M)
    if method != "lapack":
        raise BadParameterError(f"unknown eigensolver {method!r}")
    w, Q = np.linalg.eigh(M)
    return EigenDecomposition(w, Q)


# ---------------------------------------------------------------------------
# Simultaneous diagonalization of commuting normal families
# ---------------------------------------------------------------------------

_GROUP_RTOL = 1e-8
_SPREAD_RTOL = 1e-12
_MAX_DEPTH = 8


def _hermitian_parts(mats: Sequence[np.ndarray]) -> list[np.ndarray]:
    parts = []
    for X in mats:
        parts.append((X + dagger(X)) / 2)
        parts.append((X - dagger(X)) / 2j)
    return parts


def _spread(P: np.ndarray) -> float:
    k = P.shape[0]
    return _norm(P - (np.trace(P) / k) * np.eye(k))


def simultaneous_diagonalizer(mats: Sequence[np.ndarray], rng: np.random.Generator) -> np.ndarray:
    """Unitary Q with ``Q* X Q`` (numerically) diagonal for each ``X``.

    Diagonalizes a random real combination of the hermitian and
    skew-hermitian parts of the family.  Inside every cluster of (nearly)
    repeated eigenvalues whose restricted family is not scalar, recurses on the
    restricted family with fresh coefficients, so accidental coincidences of
    the combination are resolved deterministically.
    """
    mats = [np.asarray(X, dtype=complex) for X in mats]
    n = mats[0].shape[0]
    return _joint_basis(_hermitian_parts(mats), rng, 0) if n else np.eye(0, dtype=complex)


def _joint_basis(parts: list[np.ndarray], rng: np.random.Generator, depth: int) -> np.ndarray:
    k = parts[0].shape[0]
    if k == 1:
        return np.eye(1, dtype=complex)
    # centre and normalise so grouping thresholds are relative to the family
    centred = []
    for P in parts:
        P = P - (np.trace(P) / k) * np.eye(k)
        centred.append(P)
    scale = max(_norm(P) for P in centred)
    if scale == 0.0:
        return np.eye(k, dtype=complex)
    centred = [P / scale for P in centred]
    coeffs = rng.standard_normal(len(centred))
    H = sum(c * P for c, P in zip(coeffs, centred))
    H = (H + dagger(H)) / 2
    w, Q = np.linalg.eigh(H)
    if depth >= _MAX_DEPTH:
        return Q
    gate = _GROUP_RTOL * float(np.abs(coeffs).sum())
    start = 0
    for stop in range(1, k + 1):
        if stop < k and w[stop] - w[stop - 1] <= gate:
            continue
        if stop - start > 1:
            B = Q[:, start:stop]
            restricted = [dagger(B) @ P @ B for P in centred]
            if max(_spread(R) for R in restricted) > _SPREAD_RTOL:
                Q[:, start:stop] = B @ _joint_basis(restricted, rng, depth + 1)
        start = stop
    return Q


# ---------------------------------------------------------------------------
# Polar decomposition, unitary logarithm and exponential
# ---------------------------------------------------------------------------

def polar_decompose(A) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(V, R)`` with ``A = V R``, ``V`` unitary, ``R`` positive semidefinite.

    Uses the SVD ``A = U S W*``: ``V = U W*`` and ``R = W S W*``.  On the null
    space of a singular ``A`` the singular vectors already provide an
    orthonormal completion, so ``V`` is always unitary.
    """
    M = as_matrix(A)
    U, s, Wh = np.linalg.svd(M)
    V = U @ Wh
    R = dagger(Wh) @ (s[:, None] * Wh)
    R = (R + dagger(R)) / 2
    return V, R


def _check_unitary(W: np.ndarray, tol: ToleranceConfig) -> None:
    if norm_exceeds(dagger(W) @ W - np.eye(W.shape[0]), tol.tol_unitary):
        raise NotUnitaryError("matrix is not unitary within tol_unitary")


def principal_skew_log(
    W,
    tol: ToleranceConfig = DEFAULT_TOL,
    allow_branch_edge: bool = False,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Principal logarithm of a unitary matrix.

    Returns skew-hermitian ``K`` with ``exp(K) = W`` whose eigenvalues are
    ``i*theta`` with ``theta`` in (-pi, pi].  Consequently
    ``||K|| <= (pi/2) ||1 - W||``.

    Raises BranchEdgeError when an eigenvalue of ``W`` lies within
    ``tol_cluster`` of -1, unless ``allow_branch_edge`` is set.
    """
    M = as_matrix(W)
    _check_unitary(M, tol)
    n = M.shape[0]
    if n == 0:
        return M.copy()
    rng = np.random.default_rng(0x5EED) if rng is None else rng
    Q = simultaneous_diagonalizer([M], rng)
    lam = np.einsum("ij,ik,kj->j", Q.conj(), M, Q)
    if not allow_branch_edge and np.any(np.abs(lam + 1) < tol.tol_cluster):
        raise BranchEdgeError("unitary has an eigenvalue within tol_cluster of -1")
    theta = np.arctan2(lam.imag, lam.real)
    K = (Q * (1j * theta)) @ dagger(Q)
    return (K - dagger(K)) / 2


class SkewExp:
    """Cached ``t -> exp(t K)`` for a fixed skew-hermitian ``K``."""

    def __init__(self, K, tol: ToleranceConfig = DEFAULT_TOL):
        M = as_matrix(K)
        if _norm(M + dagger(M)) > tol.tol_member * max(1.0, _norm(M)):
            raise NotSkewHermitianError("matrix is not skew-hermitian within tol_member")
        H = -1j * M
        H = (H + dagger(H)) / 2
        self.n = M.shape[0]
        self.frequencies, self.basis = np.linalg.eigh(H)

    def __call__(self, t: float) -> np.ndarray:
        if t == 0:
            return np.eye(self.n, dtype=complex)
        phases = np.exp(1j * t * self.frequencies)
        return (self.basis * phases) @ dagger(self.basis)


def unitary_exp(K, t: float = 1.0, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """``exp(t K)`` for skew-hermitian ``K``; exactly the identity at ``t = 0``."""
    return SkewExp(K, tol)(t)
