"""Path synthesis between algebraic (and nearly algebraic) commuting tuples.

Pipeline for two exact members ``X``, ``Y`` of an algebraic cube:

1. match joint spectra to get a unitary ``Wh`` with ``Wh X Wh* = Y``;
2. pinch ``Wh*`` against the joint spectral OPU of ``Y`` and polar-decompose
   blockwise, giving a unitary ``Zc`` commuting with ``Y`` and close to ``Wh``;
3. ``W = Wh* Zc`` maps ``Y`` back to ``X`` and is close to the identity, so
   its principal logarithm ``K`` is small;
4. the path is ``t -> e^{(1-t)K} Y e^{-(1-t)K}``.

Conjugation preserves joint spectra, so every point of the path annihilates
the constraint polynomials.  The disk case goes through real and imaginary
parts; the nearly algebraic case rounds both endpoints to the zero set and
adds two straight segments.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import (
    BadParameterError,
    DeltaTooLargeError,
    EpsilonTooLargeError,
    InvalidOPUError,
    NoNearbyZeroError,
    NotInCubeError,
    NotInDiskError,
    NotNearlyMemberError,
    NotUnitaryError,
    SpectraOffZeroSetError,
)
from .linalg import DEFAULT_TOL, ToleranceConfig, _norm, as_matrix, norm_exceeds, dagger, principal_skew_log
from .paths import BoundCheck, ConjugationSegment, MatrixPath, concat, flat_path, juncture_path
from .spectra import (
    OPU,
    component_opus,
    joint_diagonalize,
    projective_polar,
    projective_refinement,
    validate_opu,
)
from .tuples import (
    MatrixTuple,
    MultiPoly,
    MultiPolySystem,
    ZeroSet,
    check_membership,
    coordinate_polynomials,
    distinct_values,
    metric,
    partition,
    validate_zero_set,
)

EPSILON_CEILING = 4 * math.sin(1 / 8)


# ---------------------------------------------------------------------------
# almost-unit corrections
# ---------------------------------------------------------------------------

@dataclass
class CorrectionResult:
    Z: np.ndarray
    bound_constant: float
    residual: float
    achieved: float

    @property
    def ratio(self) -> float:
        return self.achieved / self.residual if self.residual > 0 else 0.0

    def bound_holds(self, slack: float = DEFAULT_TOL.tol_recon) -> bool:
        return self.achieved <= self.bound_constant * self.residual + slack


def _check_unitary(W: np.ndarray, tol: ToleranceConfig) -> None:
    if norm_exceeds(dagger(W) @ W - np.eye(W.shape[0]), tol.tol_unitary):
        raise NotUnitaryError("W is not unitary within tol_unitary")


def _pinch_polar(W: np.ndarray, opu: OPU, tol: ToleranceConfig) -> np.ndarray:
    """Unitary sum of the polar factors of the diagonal blocks of ``W``."""
    return sum(V for V, _ in projective_polar(opu, W, tol))


def _min_separation(values: np.ndarray) -> float:
    d = np.abs(values[:, None] - values[None, :])
    d[np.diag_indices(len(values))] = np.inf
    return float(d.min())


def commuting_correction(W, D, opu: OPU, tol: ToleranceConfig = DEFAULT_TOL) -> CorrectionResult:
    """Unitary ``Z`` commuting with ``D = sum alpha_j P_j`` such that
    ``||1 - W Z|| <= 3 r (r - 1) / s * ||W D W* - D||``, ``s`` the minimum
    label separation."""
    W = as_matrix(W)
    D = as_matrix(D)
    _check_unitary(W, tol)
    validate_opu(opu, tol)
    if opu.labels is None:
        raise InvalidOPUError("commuting_correction needs labelled projectors")
    alpha = np.asarray(opu.labels, dtype=complex).reshape(len(opu), -1)[:, 0]
    if norm_exceeds(D - opu.combination(alpha), tol.tol_member):
        raise InvalidOPUError("D is not the labelled combination of the OPU")
    r = len(opu)
    residual = _norm(W @ D @ dagger(W) - D)
    if r == 1:
        Z = dagger(W)
        C = 0.0
    else:
        Z = dagger(_pinch_polar(W, opu, tol))
        C = 3 * r * (r - 1) / _min_separation(alpha)
    achieved = _norm(np.eye(W.shape[0]) - W @ Z)
    return CorrectionResult(Z, C, residual, achieved)


def refined_constant(D: MatrixTuple, refined: OPU, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[float, np.ndarray]:
    """Universal constant ``2 sqrt(2) m N max_k C_k`` for a refined OPU, and the
    per-projector labels recovered as ``tr(P D_k) / tr(P)``."""
    labels = np.array(
        [[np.trace(P @ Dk) / np.trace(P).real for Dk in D] for P in refined.projectors], dtype=complex
    )
    worst = 0.0
    for k, Dk in enumerate(D):
        if norm_exceeds(Dk - refined.combination(labels[:, k]), tol.tol_member):
            raise InvalidOPUError(f"component {k} is not in the span of the refined OPU")
        vals = distinct_values(labels[:, k], tol.tol_cluster)
        r = len(vals)
        if r >= 2:
            worst = max(worst, 3 * r * (r - 1) / _min_separation(vals))
    N = len(refined)
    return 2 * math.sqrt(2) * D.m * N * worst, labels


def refined_commuting_correction(W, D: MatrixTuple, refined: OPU, tol: ToleranceConfig = DEFAULT_TOL) -> CorrectionResult:
    """Pinch-and-polar correction against a refined OPU: ``Z`` commutes with
    every ``D_k`` and ``||1 - W Z||`` is compared with
    ``C max_k ||W D_k W* - D_k||``."""
    W = as_matrix(W)
    _check_unitary(W, tol)
    validate_opu(refined, tol)
    C, _ = refined_constant(D, refined, tol)
    residual = max(_norm(W @ Dk @ dagger(W) - Dk) for Dk in D)
    if len(refined) == 1:
        Z = dagger(W)
    else:
        Z = dagger(_pinch_polar(W, refined, tol))
    achieved = _norm(np.eye(W.shape[0]) - W @ Z)
    return CorrectionResult(Z, C, residual, achieved)


def spectral_refinement(Y: MatrixTuple, tol: ToleranceConfig = DEFAULT_TOL) -> OPU:
    """Projective refinement of the per-component spectral OPUs of ``Y``."""
    S = joint_diagonalize(Y, tol)
    return projective_refinement(component_opus(S, tol.tol_cluster), tol)


# ---------------------------------------------------------------------------
# spectral matching
# ---------------------------------------------------------------------------

def bottleneck_assignment(cost: np.ndarray) -> np.ndarray:
    """Permutation minimising the largest assigned cost, ties broken by the
    smallest total cost.  Returns ``perm`` with row i matched to column perm[i]."""
    n = cost.shape[0]
    levels = np.unique(cost)
    lo, hi = 0, len(levels) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        graph = csr_matrix((cost <= levels[mid]).astype(np.int8))
        if np.all(maximum_bipartite_matching(graph, perm_type="column") >= 0):
            hi = mid
        else:
            lo = mid + 1
    bound = levels[lo]
    big = cost.sum() + 1.0
    rows, cols = linear_sum_assignment(np.where(cost <= bound, cost, big))
    perm = np.empty(n, dtype=int)
    perm[rows] = cols
    return perm


def match_rows(A: np.ndarray, B: np.ndarray) -> tuple[np.ndarray, float]:
    """Match rows of ``A`` to rows of ``B`` minimising the largest Euclidean
    distance; returns the permutation and that distance."""
    cost = np.linalg.norm(A[:, None, :] - B[None, :, :], axis=2)
    perm = bottleneck_assignment(cost)
    return perm, float(cost[np.arange(len(A)), perm].max()) if len(A) else 0.0


def isospectral_match(
    X: MatrixTuple, Y: MatrixTuple, Z: ZeroSet | None = None, tol: ToleranceConfig = DEFAULT_TOL
) -> np.ndarray:
    """Unitary ``Wh`` with ``Wh X_j Wh* ~ Y_j`` obtained by matching joint
    eigenvalue rows.

    With a zero set, rows of both tuples must sit on it and are matched
    point by point (exact matching).  Without one, rows are matched by
    bottleneck assignment.
    """
    SX = joint_diagonalize(X, tol)
    SY = joint_diagonalize(Y, tol)
    if Z is None:
        perm, _ = match_rows(SX.lam, SY.lam)
        return SY.Q[:, perm] @ dagger(SX.Q)
    ix, dx = Z.nearest(SX.lam)
    iy, dy = Z.nearest(SY.lam)
    off = max(dx.max(), dy.max())
    if off > tol.tol_member:
        raise SpectraOffZeroSetError(f"joint spectrum lies {off:.3g} away from the zero set")
    dist = metric(X, Y)
    if dist >= Z.gap / 2:
        raise DeltaTooLargeError(f"tuples are {dist:.3g} apart, zero-set gap is {Z.gap:.3g}")
    perm = np.empty(X.n, dtype=int)
    for z in range(Z.size):
        rx = np.flatnonzero(ix == z)
        ry = np.flatnonzero(iy == z)
        if len(rx) != len(ry):
            raise DeltaTooLargeError("joint eigenvalue multiplicities differ; no consistent matching")
        perm[rx] = ry
    return SY.Q[:, perm] @ dagger(SX.Q)


# ---------------------------------------------------------------------------
# budgets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeltaBudget:
    h_p: float
    K_m: float
    K_prod: float
    L_max: float
    delta: float
    epsilon: float
    m: int
    degenerate: bool = False

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def delta_budget(Z: ZeroSet, epsilon: float, m: int | None = None, K_m: float = 1.0, tol: ToleranceConfig = DEFAULT_TOL) -> DeltaBudget:
    """A-priori closeness threshold below which cube paths are guaranteed.

    ``delta = 2 h_p asin(eps/4) / (3 pi sqrt(2) m K_m K L (L-1))`` with
    ``K = prod_k |Z_k|``, ``L = max_k |Z_k|`` (distinct coordinate counts) and
    ``h_p = min separation of coordinate values / (3 K_m)``.  When every
    coordinate takes a single value the straight-line bound applies and
    ``delta = eps``.
    """
    m = Z.m if m is None else m
    if not 0 < epsilon < EPSILON_CEILING:
        raise EpsilonTooLargeError(f"epsilon must lie in (0, {EPSILON_CEILING:.6f})")
    coords = [distinct_values(Z.points[:, k], tol.tol_cluster) for k in range(Z.m)]
    sizes = [len(c) for c in coords]
    K = float(np.prod(sizes))
    L = float(max(sizes))
    if L < 2:
        return DeltaBudget(0.0, K_m, K, L, float(epsilon), float(epsilon), m, degenerate=True)
    sep = min(_min_separation(c) for c in coords if len(c) >= 2)
    h_p = sep / (3 * K_m)
    delta = 2 * h_p * math.asin(epsilon / 4) / (3 * math.pi * math.sqrt(2) * m * K_m * K * L * (L - 1))
    return DeltaBudget(h_p, K_m, K, L, delta, float(epsilon), m)


def _shifted_terms(p: MultiPoly, x: np.ndarray) -> dict[tuple[int, ...], complex]:
    """Coefficients of ``h -> p(x + h)``."""
    out: dict[tuple[int, ...], complex] = {}
    for exps, c in p.terms.items():
        ranges = [range(e + 1) for e in exps]
        for a in itertools.product(*ranges):
            coef = c
            for e, ak, xk in zip(exps, a, x):
                coef *= comb(e, ak) * xk ** (e - ak)
            out[a] = out.get(a, 0) + coef
    return out


def _ball_bound(P: MultiPolySystem, Z: ZeroSet, rho: float) -> float:
    """Upper bound of ``|p_j|`` on the balls of radius rho around the zeros."""
    worst = 0.0
    for x in Z.points:
        for p in P.polys:
            terms = _shifted_terms(p, x)
            val = abs(terms.get((0,) * P.m, 0)) + sum(
                abs(c) * rho ** sum(a) for a, c in terms.items() if sum(a) > 0
            )
            worst = max(worst, val)
    return worst


@dataclass(frozen=True)
class NearlyBudget:
    delta1: float
    delta_prime: float
    delta2: float
    delta3: float
    delta4: float
    epsilon: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def nearly_budget(P: MultiPolySystem, Z: ZeroSet, epsilon: float, K_m: float = 1.0) -> NearlyBudget:
    """Radii and residual gate for nearly algebraic endpoints.

    ``delta1`` is a third of the zero-set gap, ``delta'`` the residual gate
    ``min(delta1, eps/2)``.  ``delta2`` is twice the largest radius on which a
    Taylor bound keeps every ``|p_j|`` below ``delta'`` around each zero;
    ``delta3 = min(delta1, delta2)`` and ``delta4 = delta3 / (sqrt(m) (K_m + 1))``.
    """
    if not epsilon > 0:
        raise BadParameterError("epsilon must be positive")
    d1 = Z.delta1
    dprime = min(d1, epsilon / 2)
    lo, hi = 0.0, 1.0
    while _ball_bound(P, Z, hi) < dprime and hi < 1e6:
        lo, hi = hi, 2 * hi
    for _ in range(60):
        mid = (lo + hi) / 2
        if _ball_bound(P, Z, mid) < dprime:
            lo = mid
        else:
            hi = mid
    d2 = 2 * lo
    d3 = min(d1, d2)
    d4 = d3 / (math.sqrt(Z.m) * (K_m + 1))
    return NearlyBudget(d1, dprime, d2, d3, d4, float(epsilon))


# ---------------------------------------------------------------------------
# paths
# ---------------------------------------------------------------------------

def homomorphism_path(
    X: MatrixTuple, Y: MatrixTuple, Z: ZeroSet, epsilon: float, tol: ToleranceConfig = DEFAULT_TOL
) -> MatrixPath:
    """Single conjugation segment from ``X`` to ``Y`` through unitary conjugates of ``Y``."""
    if not 0 < epsilon < EPSILON_CEILING:
        raise EpsilonTooLargeError(f"epsilon must lie in (0, {EPSILON_CEILING:.6f})")
    Wh = isospectral_match(X, Y, Z, tol)
    refined = spectral_refinement(Y, tol)
    corr = refined_commuting_correction(dagger(Wh), Y, refined, tol)
    W = dagger(Wh) @ corr.Z
    K = principal_skew_log(W, tol)
    normK = _norm(K)
    gap = _norm(np.eye(X.n) - W)
    checks = [
        BoundCheck("refined_almost_unit", corr.bound_constant, corr.ratio, corr.bound_holds(tol.tol_recon)),
        BoundCheck("log_norm", math.pi / 2, normK / gap if gap > 0 else 0.0, normK <= math.pi / 2 * gap + tol.tol_recon),
        BoundCheck(
            "log_norm_vs_epsilon",
            2 * math.asin(epsilon / 4),
            normK,
            normK <= 2 * math.asin(epsilon / 4) + tol.tol_recon,
        ),
    ]
    notes = {
        "generator_norm": normK,
        "one_minus_W": gap,
        "correction_residual": corr.residual,
        "correction_achieved": corr.achieved,
        "refined_size": len(refined),
    }
    seg = ConjugationSegment(Y, K, 1.0, 0.0, tol)
    return MatrixPath([seg], bound_checks=checks, notes=notes, tol=tol)


def _check_zero_set(P: MultiPolySystem, Z: ZeroSet, tol: ToleranceConfig) -> None:
    if P.m != Z.m:
        raise BadParameterError("constraint system and zero set use different numbers of variables")
    P.check_constraint_system()
    validate_zero_set(P, Z.points, tol)


def connect_cube(
    X: MatrixTuple,
    Y: MatrixTuple,
    P: MultiPolySystem,
    Z: ZeroSet,
    epsilon: float,
    tol: ToleranceConfig = DEFAULT_TOL,
    K_m: float = 1.0,
) -> MatrixPath:
    """Path inside the algebraic cube from ``X`` to ``Y`` staying within
    ``epsilon`` of ``Y``."""
    _check_zero_set(P, Z, tol)
    for name, T in (("X", X), ("Y", Y)):
        rep = check_membership(T, "cube", (P, 0.0), tol)
        if not rep.in_set:
            raise NotInCubeError(f"{name} is not in the algebraic cube: {rep.offending_indices}")
    budget = delta_budget(Z, epsilon, X.m, K_m, tol)
    dist = metric(X, Y)
    if dist > budget.delta:
        warnings.warn(
            f"endpoints are {dist:.3g} apart, above the a-priori budget {budget.delta:.3g}; "
            "the path is certified a posteriori",
            RuntimeWarning,
            stacklevel=2,
        )
    path = homomorphism_path(X, Y, Z, epsilon, tol)
    path.notes.update(
        family="cube",
        distance=dist,
        delta_budget=budget.to_dict(),
        coordinate_polynomial_degrees=[p.degree() for p in coordinate_polynomials(Z, tol)],
    )
    return path


def realify_system(P: MultiPolySystem, Z: ZeroSet | None = None, tol: ToleranceConfig = DEFAULT_TOL):
    """Real and imaginary parts of ``p_j(x_1 + i x_{m+1}, ..., x_m + i x_{2m})``.

    Returns the 2m-variable system (real coefficients, identically zero parts
    dropped) and, when ``Z`` is given, the zero set mapped to
    ``(Re z, Im z)`` and re-validated.
    """
    m = P.m
    polys = []
    for p in P.polys:
        expanded: dict[tuple[int, ...], complex] = {}
        for exps, c in p.terms.items():
            for a in itertools.product(*[range(e + 1) for e in exps]):
                coef = c * (1j ** sum(a))
                for e, ak in zip(exps, a):
                    coef *= comb(e, ak)
                key = tuple(e - ak for e, ak in zip(exps, a)) + tuple(a)
                expanded[key] = expanded.get(key, 0) + coef
        re = {k: v.real for k, v in expanded.items() if v.real != 0}
        im = {k: v.imag for k, v in expanded.items() if v.imag != 0}
        for part in (re, im):
            if part:
                polys.append(MultiPoly(2 * m, part))
    PR = MultiPolySystem(2 * m, tuple(polys))
    if Z is None:
        return PR
    pts = np.concatenate([Z.points.real, Z.points.imag], axis=1)
    return PR, validate_zero_set(PR, pts, tol)


def connect_disk(
    X: MatrixTuple,
    Y: MatrixTuple,
    P: MultiPolySystem,
    Z: ZeroSet,
    epsilon: float,
    tol: ToleranceConfig = DEFAULT_TOL,
    K_m: float = 1.0,
) -> MatrixPath:
    """Path inside the algebraic disk: connect the hermitian partitions in the
    realified cube at ``epsilon/2`` and map back by juncture."""
    _check_zero_set(P, Z, tol)
    for name, T in (("X", X), ("Y", Y)):
        rep = check_membership(T, "disk", (P, 0.0), tol)
        if not rep.in_set:
            raise NotInDiskError(f"{name} is not in the algebraic disk: {rep.offending_indices}")
    PR, ZR = realify_system(P, Z, tol)
    cube = connect_cube(partition(X), partition(Y), PR, ZR, epsilon / 2, tol, K_m)
    path = juncture_path(cube)
    path.notes["family"] = "disk"
    return path


def round_to_zero_set(X: MatrixTuple, Z: ZeroSet, tol: ToleranceConfig = DEFAULT_TOL) -> MatrixTuple:
    """Replace each joint eigenvalue row by its nearest zero-set point."""
    S = joint_diagonalize(X, tol)
    idx, dist = Z.nearest(S.lam)
    if np.any(dist >= Z.gap / 2):
        raise NoNearbyZeroError(f"a joint eigenvalue lies {dist.max():.3g} from the zero set (gap {Z.gap:.3g})")
    hermitian = Z.is_real and all(_norm(A - dagger(A)) <= tol.tol_member for A in X)
    Xr = S.reconstruct(Z.points[idx])
    if hermitian:
        Xr = Xr.map(lambda A: (A + dagger(A)) / 2)
    return Xr


def connect(X, Y, P, Z, epsilon, family: str = "cube", tol: ToleranceConfig = DEFAULT_TOL, K_m: float = 1.0) -> MatrixPath:
    if family == "cube":
        return connect_cube(X, Y, P, Z, epsilon, tol, K_m)
    if family == "disk":
        return connect_disk(X, Y, P, Z, epsilon, tol, K_m)
    raise BadParameterError(f"unknown family {family!r}")


def connect_nearly_algebraic(
    X: MatrixTuple,
    Y: MatrixTuple,
    P: MultiPolySystem,
    Z: ZeroSet,
    epsilon: float,
    family: str = "cube",
    tol: ToleranceConfig = DEFAULT_TOL,
    K_m: float = 1.0,
) -> MatrixPath:
    """Three-piece path for nearly algebraic endpoints: straight segment to
    the rounded ``X``, algebraic path at ``epsilon/2``, straight segment from
    the rounded ``Y``."""
    _check_zero_set(P, Z, tol)
    budget = nearly_budget(P, Z, epsilon, K_m)
    gate = budget.delta_prime
    for name, T in (("X", X), ("Y", Y)):
        rep = check_membership(T, family, (P, gate), tol)
        if not rep.in_set:
            raise NotNearlyMemberError(f"{name} is not within {gate:.3g} of the algebraic {family}")
    Xh = round_to_zero_set(X, Z, tol)
    Yh = round_to_zero_set(Y, Z, tol)
    middle = connect(Xh, Yh, P, Z, epsilon / 2, family, tol, K_m)
    path = concat(concat(flat_path(X, Xh, family, tol), middle, tol), flat_path(Yh, Y, family, tol), tol)
    path.notes.update(
        family=family,
        nearly=True,
        nearly_budget=budget.to_dict(),
        rounding_distances=[metric(X, Xh), metric(Y, Yh)],
    )
    return path
