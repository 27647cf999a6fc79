"""Matrix m-tuples, the max-norm metric, partition/juncture, polynomial
evaluation and tolerance-gated set membership.

Set families:

``cube``  pairwise commuting hermitian contractions
``disk``  pairwise commuting normal contractions

Either family can be intersected with the (nearly) zero set of a polynomial
system: ``||p_j(X)|| <= eps``; ``eps = 0`` is the exact algebraic set, gated at
``tol_member``.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .errors import (
    BadParameterError,
    DuplicatePointError,
    NotAZeroError,
    OddComponentCountError,
    ShapeMismatchError,
)
from .linalg import DEFAULT_TOL, ToleranceConfig, _norm, as_matrix, dagger

FAMILIES = ("cube", "disk")


class MatrixTuple:
    """Immutable m-tuple of n x n complex matrices."""

    __slots__ = ("_mats",)

    def __init__(self, matrices: Iterable):
        mats = tuple(as_matrix(A).copy() for A in matrices)
        if not mats:
            raise ShapeMismatchError("a matrix tuple needs at least one component")
        n = mats[0].shape[0]
        if any(A.shape != (n, n) for A in mats):
            raise ShapeMismatchError("tuple components have different dimensions")
        for A in mats:
            A.setflags(write=False)
        self._mats = mats

    @property
    def m(self) -> int:
        return len(self._mats)

    @property
    def n(self) -> int:
        return self._mats[0].shape[0]

    @property
    def matrices(self) -> tuple[np.ndarray, ...]:
        return self._mats

    def __len__(self) -> int:
        return len(self._mats)

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self._mats)

    def __getitem__(self, j: int) -> np.ndarray:
        return self._mats[j]

    def __repr__(self) -> str:
        return f"MatrixTuple(m={self.m}, n={self.n})"

    def map(self, f) -> "MatrixTuple":
        return MatrixTuple(f(A) for A in self._mats)

    def conjugate_by(self, U: np.ndarray) -> "MatrixTuple":
        Ud = dagger(U)
        return MatrixTuple(U @ A @ Ud for A in self._mats)

    def equals(self, other: "MatrixTuple") -> bool:
        """Exact entrywise equality."""
        return (
            self.m == other.m
            and self.n == other.n
            and all(np.array_equal(A, B) for A, B in zip(self, other))
        )


def _same_shape(X: MatrixTuple, Y: MatrixTuple) -> None:
    if X.m != Y.m or X.n != Y.n:
        raise ShapeMismatchError(f"tuples differ in shape: (m={X.m}, n={X.n}) vs (m={Y.m}, n={Y.n})")


def metric(X: MatrixTuple, Y: MatrixTuple) -> float:
    """max_j ||X_j - Y_j||."""
    _same_shape(X, Y)
    return max(_norm(A - B) for A, B in zip(X, Y))


def partition(X: MatrixTuple) -> MatrixTuple:
    """Hermitian 2m-tuple (Re X_1, ..., Re X_m, Im X_1, ..., Im X_m)."""
    re = [(A + dagger(A)) / 2 for A in X]
    im = [(A - dagger(A)) / 2j for A in X]
    return MatrixTuple(re + im)


def juncture(H: MatrixTuple) -> MatrixTuple:
    """Inverse of :func:`partition`: (H_1 + i H_{m+1}, ..., H_m + i H_{2m})."""
    if H.m % 2:
        raise OddComponentCountError(f"juncture needs an even number of components, got {H.m}")
    m = H.m // 2
    return MatrixTuple(H[j] + 1j * H[m + j] for j in range(m))


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MultiPoly:
    """Sparse polynomial in ``m`` variables: exponent tuple -> coefficient."""

    m: int
    terms: Mapping[tuple[int, ...], complex]

    def __post_init__(self):
        clean = {}
        for exps, c in self.terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.m or any(e < 0 for e in exps):
                raise BadParameterError(f"bad exponent vector {exps} for {self.m} variables")
            c = complex(c)
            if c != 0:
                clean[exps] = clean.get(exps, 0) + c
        object.__setattr__(self, "terms", {k: v for k, v in clean.items() if v != 0})

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def __call__(self, point) -> complex:
        x = np.asarray(point, dtype=complex)
        total = 0j
        for exps, c in self.terms.items():
            total += c * np.prod(x ** np.array(exps))
        return complex(total)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for exps, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(f"x{k + 1}^{e}" if e > 1 else f"x{k + 1}" for k, e in enumerate(exps) if e)
            out.append(f"({c:g})" + (f"*{mono}" if mono else ""))
        return " + ".join(out)


@dataclass(frozen=True)
class MultiPolySystem:
    m: int
    polys: tuple[MultiPoly, ...]

    def __post_init__(self):
        polys = tuple(p if isinstance(p, MultiPoly) else MultiPoly(self.m, p) for p in self.polys)
        if any(p.m != self.m for p in polys):
            raise BadParameterError("all polynomials must use the same number of variables")
        object.__setattr__(self, "polys", polys)

    @property
    def r(self) -> int:
        return len(self.polys)

    def residuals(self, point) -> np.ndarray:
        return np.array([abs(p(point)) for p in self.polys])

    def check_constraint_system(self) -> None:
        if any(p.degree < 1 for p in self.polys):
            raise BadParameterError("constraint polynomials must be non-constant")


def _pairwise_commutator(X: MatrixTuple) -> tuple[float, list]:
    worst, bad = 0.0, []
    for j, k in itertools.combinations(range(X.m), 2):
        c = _norm(X[j] @ X[k] - X[k] @ X[j])
        worst = max(worst, c)
        bad.append(((j, k), c))
    return worst, bad


def eval_poly(p: MultiPoly, X: MatrixTuple, tol: ToleranceConfig = DEFAULT_TOL, check: bool = True) -> np.ndarray:
    """Evaluate ``p`` at a matrix tuple.

    Each monomial is the product ``X_1^e1 X_2^e2 ... X_m^em`` in ascending
    variable order; a constant term contributes ``c * 1_n``.
    """
    if p.m != X.m:
        raise ShapeMismatchError(f"polynomial has {p.m} variables, tuple has {X.m} components")
    if check and X.m > 1:
        worst, _ = _pairwise_commutator(X)
        if worst > tol.tol_commute:
            warnings.warn(
                f"evaluating a polynomial on a non-commuting tuple (commutator {worst:.3g})",
                RuntimeWarning,
                stacklevel=2,
            )
    n = X.n
    powers: dict[tuple[int, int], np.ndarray] = {}

    def power(j: int, e: int) -> np.ndarray:
        if (j, e) not in powers:
            powers[(j, e)] = np.linalg.matrix_power(X[j], e)
        return powers[(j, e)]

    out = np.zeros((n, n), dtype=complex)
    for exps, c in p.terms.items():
        term = np.eye(n, dtype=complex)
        for j, e in enumerate(exps):
            if e:
                term = term @ power(j, e)
        out += c * term
    return out


def eval_univariate(poly: Polynomial, A: np.ndarray) -> np.ndarray:
    """Horner evaluation of a univariate polynomial at a square matrix."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    out = np.zeros((n, n), dtype=complex)
    for c in poly.coef[::-1]:
        out = out @ A + c * np.eye(n)
    return out


# ---------------------------------------------------------------------------
# membership
# ---------------------------------------------------------------------------

@dataclass
class MembershipReport:
    in_set: bool
    worst_commutator: float
    worst_normality: float
    worst_contraction_excess: float
    worst_poly_residual: float
    offending_indices: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "in_set": self.in_set,
            "worst_commutator": self.worst_commutator,
            "worst_normality": self.worst_normality,
            "worst_contraction_excess": self.worst_contraction_excess,
            "worst_poly_residual": self.worst_poly_residual,
            "offending_indices": [list(map(str, o)) for o in self.offending_indices],
        }


def check_membership(
    X: MatrixTuple,
    family: str = "cube",
    constraints: tuple[MultiPolySystem, float] | None = None,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> MembershipReport:
    """Gate-by-gate membership of ``X`` in the cube or disk family.

    ``constraints=(P, eps)`` adds ``||p_j(X)|| <= eps + tol_member``.
    """
    if family not in FAMILIES:
        raise BadParameterError(f"family must be one of {FAMILIES}, got {family!r}")
    offending = []
    worst_comm, pairs = _pairwise_commutator(X)
    offending += [("commutator", j, k) for (j, k), c in pairs if c > tol.tol_commute]

    worst_normal = 0.0
    for j, A in enumerate(X):
        if family == "cube":
            d = _norm(A - dagger(A))
            label = "hermitian"
        else:
            d = _norm(A @ dagger(A) - dagger(A) @ A)
            label = "normal"
        worst_normal = max(worst_normal, d)
        if d > tol.tol_member:
            offending.append((label, j))

    worst_contr = 0.0
    for j, A in enumerate(X):
        excess = max(0.0, _norm(A) - 1.0)
        worst_contr = max(worst_contr, excess)
        if excess > tol.tol_member:
            offending.append(("contraction", j))

    worst_poly = 0.0
    if constraints is not None:
        P, eps = constraints
        if eps < 0:
            raise BadParameterError("eps must be nonnegative")
        for j, p in enumerate(P.polys):
            res = _norm(eval_poly(p, X, tol, check=False))
            worst_poly = max(worst_poly, res)
            if res > eps + tol.tol_member:
                offending.append(("poly", j))

    return MembershipReport(
        in_set=not offending,
        worst_commutator=worst_comm,
        worst_normality=worst_normal,
        worst_contraction_excess=worst_contr,
        worst_poly_residual=worst_poly,
        offending_indices=offending,
    )


# ---------------------------------------------------------------------------
# zero sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroSet:
    """Finite, residual-validated zero set of a polynomial system.

    Build with :func:`validate_zero_set`; path synthesis only accepts these.
    """

    points: np.ndarray  # (L, m) complex
    gap: float

    @property
    def m(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def delta1(self) -> float:
        """One third of the minimum separation between zero-set points."""
        return self.gap / 3

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.points.imag == 0))

    def nearest(self, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Index of (and distance to) the nearest point for each row.

        Equidistant candidates resolve to the lexicographically smallest point.
        """
        rows = np.atleast_2d(np.asarray(rows, dtype=complex))
        d = np.linalg.norm(rows[:, None, :] - self.points[None, :, :], axis=2)
        best = d.min(axis=1)
        idx = np.empty(len(rows), dtype=int)
        lex = _lex_rank(self.points)
        for i in range(len(rows)):
            ties = np.flatnonzero(d[i] == best[i])
            idx[i] = ties[np.argmin(lex[ties])]
        return idx, best


def _lex_rank(points: np.ndarray) -> np.ndarray:
    keys = []
    for k in reversed(range(points.shape[1])):
        keys += [points[:, k].imag, points[:, k].real]
    order = np.lexsort(keys)
    rank = np.empty(len(points), dtype=int)
    rank[order] = np.arange(len(points))
    return rank


def validate_zero_set(P: MultiPolySystem, candidate_points: Sequence, tol: ToleranceConfig = DEFAULT_TOL) -> ZeroSet:
    """Check that each candidate is a zero of every polynomial and that the
    candidates are pairwise distinct; cache the minimum pairwise distance."""
    pts = np.array(candidate_points, dtype=complex)
    if pts.ndim == 1:
        pts = pts[:, None] if P.m == 1 else pts[None, :]
    if pts.size == 0 or pts.shape[1] != P.m:
        raise BadParameterError(f"candidate points must be a nonempty list of length-{P.m} vectors")
    if not np.isfinite(pts).all():
        raise BadParameterError("candidate points must be finite")
    for i, x in enumerate(pts):
        res = P.residuals(x)
        if res.size and res.max() > tol.tol_member:
            raise NotAZeroError(f"candidate {i} has residual {res.max():.3g}")
    if len(pts) == 1:
        return ZeroSet(pts, math.inf)
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    d[np.diag_indices(len(pts))] = np.inf
    gap = float(d.min())
    if gap < tol.tol_cluster:
        raise DuplicatePointError(f"zero-set candidates are not distinct (separation {gap:.3g})")
    return ZeroSet(pts, gap)


def distinct_values(values: np.ndarray, tol: float) -> np.ndarray:
    """Distinct entries of ``values`` up to ``tol`` (first representative kept)."""
    out: list[complex] = []
    for v in np.asarray(values, dtype=complex):
        if all(abs(v - u) > tol for u in out):
            out.append(complex(v))
    return np.array(out, dtype=complex)


def coordinate_polynomials(Z: ZeroSet, tol: ToleranceConfig = DEFAULT_TOL) -> list[Polynomial]:
    """For each coordinate k, the monic polynomial with roots the distinct
    k-th coordinates of the zero set."""
    polys = []
    for k in range(Z.m):
        roots = distinct_values(Z.points[:, k], tol.tol_cluster)
        coef = Polynomial.fromroots(roots).coef
        if np.all(np.imag(coef) == 0):
            coef = np.real(coef)
        polys.append(Polynomial(coef))
    return polys
