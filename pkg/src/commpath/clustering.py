"""Clustered pseudospectral approximants.

Joint eigenvalues are snapped to the midpoints of a uniform grid on
[-1, 1] through one shared joint diagonalizer, so the approximant commutes
with the input exactly in the diagonalizer basis and every component is
annihilated by a polynomial whose degree is bounded by the number of grid
cells, whatever the matrix size.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from .errors import BadDeltaError, BadParameterError, EmptyTargetError, NotInCubeError, NotInDiskError
from .linalg import DEFAULT_TOL, ToleranceConfig, dagger
from .spectra import JointSpectrum, joint_diagonalize
from .tuples import MatrixTuple, check_membership, distinct_values, metric


@dataclass(frozen=True)
class Grid:
    """Uniform partition of [-1, 1] into ``ceil(2/delta)`` cells.

    Cell k is ``[edges[k], edges[k+1])``; the last cell is closed.
    """

    delta: float
    edges: np.ndarray
    midpoints: np.ndarray

    @property
    def cells(self) -> list[tuple[float, float]]:
        return list(zip(self.edges[:-1].tolist(), self.edges[1:].tolist()))

    @property
    def size(self) -> int:
        return len(self.midpoints)

    @property
    def width(self) -> float:
        return 2.0 / self.size


def build_grid(delta: float) -> Grid:
    if not (np.isfinite(delta) and 0 < delta <= 2):
        raise BadDeltaError(f"delta must lie in (0, 2], got {delta!r}")
    # guard against 2/delta landing a hair above an integer
    N = max(1, math.ceil(2.0 / delta - 1e-12))
    edges = np.linspace(-1.0, 1.0, N + 1)
    midpoints = (edges[:-1] + edges[1:]) / 2
    return Grid(float(delta), edges, midpoints)


def cell_index(g: Grid, x) -> np.ndarray:
    x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
    k = np.floor((x + 1.0) / g.width).astype(int)
    return np.clip(k, 0, g.size - 1)


def quantize_scalar(g: Grid, x):
    """Midpoint of the cell containing ``x`` (clamped into [-1, 1])."""
    q = g.midpoints[cell_index(g, x)]
    return float(q) if np.ndim(q) == 0 else q


@dataclass
class CpaResult:
    approximant: MatrixTuple
    minimal_polys: list[Polynomial]
    delta_used: float
    achieved_distance: float
    spectrum: JointSpectrum | None = field(default=None, repr=False)

    @property
    def degrees(self) -> list[int]:
        return [p.degree() for p in self.minimal_polys]


def minimal_polynomial(values: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> Polynomial:
    """Monic polynomial with the distinct ``values`` as simple roots."""
    roots = distinct_values(values, tol.tol_cluster)
    coef = Polynomial.fromroots(roots).coef
    if np.all(np.imag(coef) == 0):
        coef = np.real(coef)
    return Polynomial(coef)


def _rebuild(X: MatrixTuple, S: JointSpectrum, values: np.ndarray, hermitian: bool, tol: ToleranceConfig):
    """Tuple with joint eigenvalues ``values`` in the basis of ``S``.

    Returns ``X`` itself when no eigenvalue moves by more than tol_recon, which
    makes quantization exactly idempotent.
    """
    if np.max(np.abs(values - S.lam)) <= tol.tol_recon:
        return X, 0.0
    Q, Qd = S.Q, dagger(S.Q)
    mats = []
    for j in range(X.m):
        A = (Q * values[:, j]) @ Qd
        if hermitian:
            A = (A + dagger(A)) / 2
        mats.append(A)
    Xt = MatrixTuple(mats)
    return Xt, metric(X, Xt)


def cpa_hermitian(X: MatrixTuple, delta: float, tol: ToleranceConfig = DEFAULT_TOL) -> CpaResult:
    """Grid-midpoint quantization of a cube tuple; distance at most delta/2."""
    g = build_grid(delta)
    if not check_membership(X, "cube", tol=tol).in_set:
        raise NotInCubeError("input is not a commuting hermitian contraction tuple")
    S = joint_diagonalize(X, tol)
    q = g.midpoints[cell_index(g, S.lam.real)].astype(complex)
    Xt, dist = _rebuild(X, S, q, True, tol)
    polys = [minimal_polynomial(q[:, j].real, tol) for j in range(X.m)]
    return CpaResult(Xt, polys, float(delta), dist, S)


def cpa_normal(X: MatrixTuple, delta: float, tol: ToleranceConfig = DEFAULT_TOL) -> CpaResult:
    """Quantize real and imaginary parts of the joint eigenvalues on the
    delta/2 grid; eigenvalues pushed outside the unit disk are rescaled to
    modulus 1.  Distance at most delta.

    A component whose real (or imaginary) part vanishes keeps it at zero.
    """
    g = build_grid(delta / 2)
    if not check_membership(X, "disk", tol=tol).in_set:
        raise NotInDiskError("input is not a commuting normal contraction tuple")
    S = joint_diagonalize(X, tol)
    re, im = S.lam.real, S.lam.imag
    qre = g.midpoints[cell_index(g, re)]
    qim = g.midpoints[cell_index(g, im)]
    # a vanishing real or imaginary part stays zero, so hermitian input matches cpa_hermitian
    qre = np.where(np.all(np.abs(re) <= tol.tol_member, axis=0), 0.0, qre)
    qim = np.where(np.all(np.abs(im) <= tol.tol_member, axis=0), 0.0, qim)
    q = qre + 1j * qim
    mod = np.abs(q)
    q = np.where(mod > 1, q / np.where(mod > 1, mod, 1), q)
    Xt, dist = _rebuild(X, S, q, False, tol)
    polys = [minimal_polynomial(q[:, j], tol) for j in range(X.m)]
    return CpaResult(Xt, polys, float(delta), dist, S)


def retract_to_grid(X: MatrixTuple, source: Grid, target, tol: ToleranceConfig = DEFAULT_TOL) -> MatrixTuple:
    """Send every joint eigenvalue of a cube tuple to its nearest target value
    (ties to the smaller value).

    ``target`` must avoid the grid points (cell edges) of ``source``.
    """
    t = np.sort(np.asarray(list(target), dtype=float))
    if t.size == 0:
        raise EmptyTargetError("retraction target is empty")
    if np.any(np.min(np.abs(t[:, None] - source.edges[None, :]), axis=1) <= tol.tol_cluster):
        raise BadParameterError("target values must avoid the source grid points")
    if not check_membership(X, "cube", tol=tol).in_set:
        raise NotInCubeError("input is not a commuting hermitian contraction tuple")
    S = joint_diagonalize(X, tol)
    lam = S.lam.real
    # argmin returns the first minimiser; t is ascending so ties go to the smaller value
    idx = np.argmin(np.abs(lam[..., None] - t), axis=-1)
    Xt, _ = _rebuild(X, S, t[idx].astype(complex), True, tol)
    return Xt
