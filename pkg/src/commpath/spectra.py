"""Joint spectra of commuting normal families and orthogonal partitions of
unity (OPUs): construction from spectra, projective refinement, projective
polar decomposition and joint spectral projectors."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    BadParameterError,
    ClusterOverlapError,
    IndexOutOfRangeError,
    InvalidOPUError,
    NotCommutingError,
    NotCommutingOPUsError,
    NotNormalError,
)
from .linalg import (
    DEFAULT_TOL,
    ToleranceConfig,
    _norm,
    as_matrix,
    norm_exceeds,
    dagger,
    polar_decompose,
    simultaneous_diagonalizer,
)
from .tuples import MatrixTuple

JOINT_SEED = 20160923


@dataclass(frozen=True)
class JointSpectrum:
    """Joint diagonalizer ``Q`` and joint eigenvalue rows ``lam`` (n x m)."""

    Q: np.ndarray
    lam: np.ndarray

    @property
    def n(self) -> int:
        return self.lam.shape[0]

    @property
    def m(self) -> int:
        return self.lam.shape[1]

    def reconstruct(self, values: np.ndarray | None = None) -> MatrixTuple:
        """Tuple ``(Q diag(values[:, j]) Q*)_j``; defaults to the stored rows."""
        values = self.lam if values is None else np.asarray(values)
        Qd = dagger(self.Q)
        return MatrixTuple((self.Q * values[:, j]) @ Qd for j in range(values.shape[1]))


def _tie_ranks(v: np.ndarray, tol: float) -> np.ndarray:
    """Dense ranks of ``v`` where consecutive sorted values within ``tol`` tie."""
    order = np.argsort(v, kind="stable")
    steps = np.concatenate([[0], np.diff(v[order]) > tol]).cumsum()
    ranks = np.empty(len(v), dtype=int)
    ranks[order] = steps
    return ranks


def _lexsort_rows(lam: np.ndarray, tol: float = DEFAULT_TOL.tol_cluster) -> np.ndarray:
    # rank with ties first so rounding noise in a leading key cannot decide the order
    keys = []
    for j in reversed(range(lam.shape[1])):
        keys += [_tie_ranks(lam[:, j].imag, tol), _tie_ranks(lam[:, j].real, tol)]
    return np.lexsort(keys)


def joint_diagonalize(
    X: MatrixTuple, tol: ToleranceConfig = DEFAULT_TOL, rng: np.random.Generator | None = None
) -> JointSpectrum:
    """Simultaneously diagonalize a commuting normal tuple.

    Rows of the joint spectrum are ordered lexicographically on
    (Re lam_1, Im lam_1, Re lam_2, ...).
    """
    for j, A in enumerate(X):
        if norm_exceeds(A @ dagger(A) - dagger(A) @ A, tol.tol_member):
            raise NotNormalError(f"component {j} is not normal within tol_member")
    for j, k in itertools.combinations(range(X.m), 2):
        if norm_exceeds(X[j] @ X[k] - X[k] @ X[j], tol.tol_commute):
            raise NotCommutingError(f"components {j} and {k} do not commute within tol_commute")
    rng = np.random.default_rng(JOINT_SEED) if rng is None else rng
    Q = simultaneous_diagonalizer(X.matrices, rng)
    lam = np.stack([np.einsum("ij,ik,kj->j", Q.conj(), A, Q) for A in X], axis=1)
    order = _lexsort_rows(lam, tol.tol_cluster)
    return JointSpectrum(Q[:, order], lam[order])


# ---------------------------------------------------------------------------
# OPUs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OPU:
    """Pairwise orthogonal nonzero projectors summing to the identity.

    ``labels`` (r x m), when present, holds a representative point of
    ``C^m`` for each projector.
    """

    projectors: tuple[np.ndarray, ...]
    labels: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.projectors)

    @property
    def n(self) -> int:
        return self.projectors[0].shape[0]

    def combination(self, coeffs) -> np.ndarray:
        return sum(c * P for c, P in zip(coeffs, self.projectors))


def opu_defects(opu: OPU) -> dict:
    Ps = opu.projectors
    n = Ps[0].shape[0]
    return {
        "hermitian": max(_norm(P - dagger(P)) for P in Ps),
        "idempotent": max(_norm(P @ P - P) for P in Ps),
        "orthogonal": max((_norm(A @ B) for A, B in itertools.permutations(Ps, 2)), default=0.0),
        "sum": _norm(sum(Ps) - np.eye(n)),
        "min_trace": min(float(np.trace(P).real) for P in Ps),
    }


def validate_opu(opu: OPU, tol: ToleranceConfig = DEFAULT_TOL) -> None:
    if not opu.projectors:
        raise InvalidOPUError("an OPU needs at least one projector")
    Ps = opu.projectors
    checks = {
        "hermitian": (P - dagger(P) for P in Ps),
        "idempotent": (P @ P - P for P in Ps),
        "orthogonal": (A @ B for A, B in itertools.combinations(Ps, 2)),
        "sum": [sum(Ps) - np.eye(opu.n)],
    }
    for key, mats in checks.items():
        if any(norm_exceeds(M, tol.tol_member) for M in mats):
            raise InvalidOPUError(f"OPU {key} defect exceeds tol_member")
    if min(float(np.trace(P).real) for P in Ps) < 0.5:
        raise InvalidOPUError("OPU contains a zero projector")


def _clusters(rows: np.ndarray, cluster_tol: float) -> list[np.ndarray]:
    d = np.linalg.norm(rows[:, None, :] - rows[None, :, :], axis=2)
    ncomp, labels = connected_components(csr_matrix(d <= cluster_tol), directed=False)
    # order clusters by first appearance
    first = {}
    for i, lab in enumerate(labels):
        first.setdefault(lab, i)
    ordered = sorted(first, key=first.get)
    return [np.flatnonzero(labels == lab) for lab in ordered]


def opu_from_spectrum(S: JointSpectrum, cluster_tol: float | None = None) -> OPU:
    """OPU of joint eigenspaces, merging rows closer than ``cluster_tol``
    (single linkage).  Labels are cluster centroids."""
    cluster_tol = DEFAULT_TOL.tol_cluster if cluster_tol is None else cluster_tol
    if not cluster_tol > 0:
        raise BadParameterError("cluster_tol must be positive")
    groups = _clusters(S.lam, cluster_tol)
    centroids = np.array([S.lam[g].mean(axis=0) for g in groups])
    if len(groups) > 1:
        cd = np.linalg.norm(centroids[:, None, :] - centroids[None, :, :], axis=2)
        cd[np.diag_indices(len(groups))] = np.inf
        if cd.min() < 2 * cluster_tol:
            raise ClusterOverlapError("cluster centroids closer than 2*cluster_tol")
    projectors = []
    for g in groups:
        B = S.Q[:, g]
        P = B @ dagger(B)
        projectors.append((P + dagger(P)) / 2)
    return OPU(tuple(projectors), centroids)


def component_opus(S: JointSpectrum, cluster_tol: float | None = None) -> list[OPU]:
    """Spectral OPU of each component separately, in the shared basis."""
    return [opu_from_spectrum(JointSpectrum(S.Q, S.lam[:, [k]]), cluster_tol) for k in range(S.m)]


def _round_projector(R: np.ndarray) -> np.ndarray | None:
    R = (R + dagger(R)) / 2
    w, V = np.linalg.eigh(R)
    B = V[:, w > 0.5]
    if B.shape[1] == 0:
        return None
    P = B @ dagger(B)
    return (P + dagger(P)) / 2


def projective_refinement(parts: list[OPU], tol: ToleranceConfig = DEFAULT_TOL) -> OPU:
    """All nonzero products ``P_{1,j1} P_{2,j2} ... P_{s,js}`` across commuting OPUs.

    Products with norm <= 1/2 are dropped as zero; survivors are rounded to
    exact projectors.  When every input carries labels, each refined projector
    is labelled by the concatenation of its factors' labels.
    """
    if not parts:
        raise BadParameterError("need at least one OPU")
    all_ps = [P for opu in parts for P in opu.projectors]
    for A, B in itertools.combinations(all_ps, 2):
        if norm_exceeds(A @ B - B @ A, tol.tol_commute):
            raise NotCommutingOPUsError("projectors of the OPUs do not commute within tol_commute")
    labelled = all(opu.labels is not None for opu in parts)
    n = parts[0].n
    current: list[tuple[np.ndarray, list]] = [(np.eye(n, dtype=complex), [])]
    for opu in parts:
        nxt = []
        for R, lab in current:
            for i, P in enumerate(opu.projectors):
                prod = R @ P
                if _norm(prod) <= 0.5:
                    continue
                rounded = _round_projector(prod)
                if rounded is None:
                    continue
                extra = list(opu.labels[i]) if labelled else []
                nxt.append((rounded, lab + extra))
        current = nxt
    projectors = tuple(R for R, _ in current)
    labels = np.array([lab for _, lab in current], dtype=complex) if labelled else None
    return OPU(projectors, labels)


def _range_basis(P: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh((P + dagger(P)) / 2)
    return V[:, w > 0.5]


def projective_polar(P: OPU, X, tol: ToleranceConfig = DEFAULT_TOL) -> list[tuple[np.ndarray, np.ndarray]]:
    """Blockwise polar decomposition ``P_j X P_j = V_j R_j``.

    ``V_j`` is a partial isometry with ``V_j V_j* = V_j* V_j = P_j`` and
    ``R_j >= 0`` is supported on the range of ``P_j``.
    """
    validate_opu(P, tol)
    M = as_matrix(X)
    out = []
    for Pj in P.projectors:
        B = _range_basis(Pj)
        Vt, Rt = polar_decompose(dagger(B) @ M @ B)
        Bd = dagger(B)
        R = B @ Rt @ Bd
        out.append((B @ Vt @ Bd, (R + dagger(R)) / 2))
    return out


def joint_spectral_projector(S: JointSpectrum, r: int, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Projector onto the joint eigenspace of row ``r``."""
    if not 0 <= r < S.n:
        raise IndexOutOfRangeError(f"row index {r} outside [0, {S.n})")
    d = np.linalg.norm(S.lam - S.lam[r], axis=1)
    B = S.Q[:, d <= tol.tol_cluster]
    P = B @ dagger(B)
    return (P + dagger(P)) / 2
