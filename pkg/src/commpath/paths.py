"""Piecewise matrix-tuple paths.

A :class:`MatrixPath` is an ordered list of segments on a knot vector
``0 = k_0 < k_1 < ... < k_s = 1``.  Segments are either linear
interpolations or conjugation orbits ``t -> e^{tau K} B e^{-tau K}``.
:func:`concat` follows the usual path concatenation: the first path runs on
[0, 1/2] and the second on [1/2, 1].
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import BadParameterError, DiscontinuousJoinError, NotCrossCommutingError, NotMemberError
from .linalg import DEFAULT_TOL, SkewExp, ToleranceConfig, as_matrix, norm_exceeds
from .tuples import MatrixTuple, check_membership, juncture, metric


@dataclass(frozen=True)
class BoundCheck:
    """Informational comparison of a measured ratio against a claimed constant."""

    name: str
    claimed_constant: float
    measured_ratio: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "claimed_constant": self.claimed_constant,
            "measured_ratio": self.measured_ratio,
            "pass": self.passed,
        }


class LinearSegment:
    kind = "linear"

    def __init__(self, start: MatrixTuple, end: MatrixTuple):
        if start.m != end.m or start.n != end.n:
            raise BadParameterError("linear segment endpoints differ in shape")
        self.start = start
        self.end = end

    def sample(self, s: float) -> MatrixTuple:
        if s == 0:
            return self.start
        if s == 1:
            return self.end
        return MatrixTuple((1 - s) * A + s * B for A, B in zip(self.start, self.end))

    def juncture(self) -> "LinearSegment":
        return LinearSegment(juncture(self.start), juncture(self.end))


class ConjugationSegment:
    """``s -> e^{tau K} base e^{-tau K}`` with ``tau = a + (b - a) s``."""

    kind = "conjugation"

    def __init__(self, base: MatrixTuple, K, a: float, b: float, tol: ToleranceConfig = DEFAULT_TOL):
        self.base = base
        self.K = as_matrix(K)
        if self.K.shape[0] != base.n:
            raise BadParameterError("generator and base tuple differ in dimension")
        self.a = float(a)
        self.b = float(b)
        self._exp = SkewExp(self.K, tol)

    def unitary(self, s: float) -> np.ndarray:
        return self._exp(self.a + (self.b - self.a) * s)

    def sample(self, s: float) -> MatrixTuple:
        tau = self.a + (self.b - self.a) * s
        if tau == 0:
            return self.base
        return self.base.conjugate_by(self._exp(tau))

    def juncture(self) -> "ConjugationSegment":
        return ConjugationSegment(juncture(self.base), self.K, self.a, self.b)


@dataclass
class MatrixPath:
    segments: list
    knots: np.ndarray | None = None
    bound_checks: list[BoundCheck] = field(default_factory=list)
    notes: dict = field(default_factory=dict)
    tol: ToleranceConfig = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        if not self.segments:
            raise BadParameterError("a path needs at least one segment")
        s = len(self.segments)
        if self.knots is None:
            self.knots = np.linspace(0.0, 1.0, s + 1)
        self.knots = np.asarray(self.knots, dtype=float)
        if len(self.knots) != s + 1 or self.knots[0] != 0 or self.knots[-1] != 1 or np.any(np.diff(self.knots) <= 0):
            raise BadParameterError("knots must increase strictly from 0 to 1, one interval per segment")
        for left, right in zip(self.segments, self.segments[1:]):
            gap = metric(left.sample(1.0), right.sample(0.0))
            if gap > self.tol.tol_recon:
                raise DiscontinuousJoinError(f"segments disagree at a junction by {gap:.3g}")

    @property
    def m(self) -> int:
        return self.start.m

    @property
    def n(self) -> int:
        return self.start.n

    @property
    def start(self) -> MatrixTuple:
        return self.segments[0].sample(0.0)

    @property
    def end(self) -> MatrixTuple:
        return self.segments[-1].sample(1.0)

    def locate(self, t: float) -> tuple[int, float]:
        if not 0 <= t <= 1:
            raise BadParameterError(f"path parameter {t} outside [0, 1]")
        i = int(np.searchsorted(self.knots, t, side="right")) - 1
        i = min(max(i, 0), len(self.segments) - 1)
        lo, hi = self.knots[i], self.knots[i + 1]
        return i, min(1.0, (t - lo) / (hi - lo))

    def sample(self, t: float) -> MatrixTuple:
        i, s = self.locate(t)
        return self.segments[i].sample(s)

    def certification_grid(self, samples: int = 129, per_segment: int = 65) -> np.ndarray:
        """Union of a uniform global grid and a uniform grid in every segment."""
        pts = [np.linspace(0.0, 1.0, samples)]
        for lo, hi in zip(self.knots[:-1], self.knots[1:]):
            pts.append(np.linspace(lo, hi, per_segment))
        grid = np.unique(np.concatenate(pts))
        # merge points closer than rounding noise
        keep = np.concatenate([[True], np.diff(grid) > 1e-14])
        return grid[keep]


def concat(a: MatrixPath, b: MatrixPath, tol: ToleranceConfig | None = None) -> MatrixPath:
    """Run ``a`` on [0, 1/2] and ``b`` on [1/2, 1]."""
    tol = a.tol if tol is None else tol
    gap = metric(a.end, b.start)
    if gap > tol.tol_recon:
        raise DiscontinuousJoinError(f"paths do not meet: endpoint gap {gap:.3g}")
    knots = np.concatenate([a.knots / 2, 0.5 + b.knots[1:] / 2])
    knots[-1] = 1.0
    notes = {"parts": [a.notes, b.notes]}
    return MatrixPath(a.segments + b.segments, knots, a.bound_checks + b.bound_checks, notes, tol)


def juncture_path(path: MatrixPath) -> MatrixPath:
    """Apply juncture to every point of a path over hermitian 2m-tuples."""
    segs = [seg.juncture() for seg in path.segments]
    return MatrixPath(segs, path.knots.copy(), list(path.bound_checks), dict(path.notes), path.tol)


def constant_path(X: MatrixTuple, tol: ToleranceConfig = DEFAULT_TOL) -> MatrixPath:
    return MatrixPath([LinearSegment(X, X)], tol=tol)


def flat_path(X: MatrixTuple, Y: MatrixTuple, family: str = "cube", tol: ToleranceConfig = DEFAULT_TOL) -> MatrixPath:
    """Straight-line path between cross-commuting members of a family.

    Every point stays in the family and ``metric(path(t), Y) = (1 - t) metric(X, Y)``.
    """
    for name, T in (("X", X), ("Y", Y)):
        if not check_membership(T, family, tol=tol).in_set:
            raise NotMemberError(f"{name} is not in the {family} family")
    if X.m != Y.m or X.n != Y.n:
        raise BadParameterError("endpoints differ in shape")
    for j, k in itertools.product(range(X.m), repeat=2):
        if norm_exceeds(X[j] @ Y[k] - Y[k] @ X[j], tol.tol_commute):
            raise NotCrossCommutingError(f"X_{j} and Y_{k} do not commute")
    return MatrixPath([LinearSegment(X, Y)], tol=tol)
