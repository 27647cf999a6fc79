"""Sampled path certificates, seeded test-tuple generators and the
uniformity-in-n sweep."""
from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field

import numpy as np

from .clustering import cpa_hermitian, cpa_normal
from .errors import BadParameterError, CommPathError, ShapeMismatchError
from .linalg import DEFAULT_TOL, ToleranceConfig, _norm, _round_robin, dagger, norm_upper_bound
from .paths import BoundCheck, MatrixPath
from .synthesis import connect, delta_budget
from .tuples import MatrixTuple, MultiPoly, MultiPolySystem, ZeroSet, coordinate_polynomials, eval_poly, metric


def _residual_mats(T: MatrixTuple, P: MultiPolySystem | None, family: str, tol: ToleranceConfig) -> dict:
    m = T.m
    return {
        "commutator": [T[j] @ T[k] - T[k] @ T[j] for j, k in itertools.combinations(range(m), 2)],
        "normality": [A - dagger(A) for A in T] if family == "cube" else [A @ dagger(A) - dagger(A) @ A for A in T],
        "poly": [eval_poly(p, T, tol, check=False) for p in P.polys] if P is not None else [],
        "contraction": list(T.matrices),
    }


def _gated_norm(M: np.ndarray, gate: float) -> float:
    """Spectral norm of ``M`` or a rigorous upper bound on it; the exact value
    is computed whenever the cheap bound does not clear ``gate``."""
    ub = norm_upper_bound(M)
    return ub if ub < gate else _norm(M)


def _sample_residuals(T: MatrixTuple, Y: MatrixTuple, P, family: str, gates: dict, tol: ToleranceConfig) -> dict:
    mats = _residual_mats(T, P, family, tol)
    return {
        "distance": metric(T, Y),
        "contraction": max(_norm(A) for A in mats["contraction"]) - 1.0,
        **{
            key: max((_gated_norm(M, gates[key]) for M in mats[key]), default=0.0)
            for key in ("commutator", "normality", "poly")
        },
    }


@dataclass
class PathCertificate:
    endpoint_residuals: tuple[float, float]
    max_ball_excess: float
    max_distance: float
    max_poly_residual: float
    max_commutator: float
    max_normality: float
    max_contraction_excess: float
    bound_checks: list[BoundCheck]
    samples: int
    verdict: str
    epsilon: float
    family: str
    gates: dict
    failures: list[str] = field(default_factory=list)
    trace: dict = field(default_factory=dict, repr=False)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self, with_trace: bool = True) -> dict:
        out = {
            "verdict": self.verdict,
            "epsilon": self.epsilon,
            "family": self.family,
            "samples": self.samples,
            "endpoint_residuals": list(self.endpoint_residuals),
            "max_ball_excess": self.max_ball_excess,
            "max_distance": self.max_distance,
            "max_poly_residual": self.max_poly_residual,
            "max_commutator": self.max_commutator,
            "max_normality": self.max_normality,
            "max_contraction_excess": self.max_contraction_excess,
            "gates": dict(self.gates),
            "failures": list(self.failures),
            "bound_checks": [b.to_dict() for b in self.bound_checks],
        }
        if with_trace:
            out["trace"] = {k: list(map(float, v)) for k, v in self.trace.items()}
        return out


def certify_path(
    path: MatrixPath,
    X: MatrixTuple,
    Y: MatrixTuple,
    P: MultiPolySystem | None,
    epsilon: float,
    family: str = "cube",
    samples: int = 129,
    tol: ToleranceConfig = DEFAULT_TOL,
    poly_gate: float | None = None,
    strict_poly: bool = False,
) -> PathCertificate:
    """Check a path on a deterministic grid.

    Hard gates: both endpoint residuals <= tol_recon; every sample within
    ``epsilon`` of ``Y``; ``||p_j(sample)|| <= poly_gate`` (strictly below it
    when ``strict_poly``; default gate tol_member); pairwise commutators <=
    tol_commute; hermitian (cube) or normality (disk) defect and contraction
    excess <= tol_member.  Bound checks carried by the path are reported but do
    not affect the verdict.

    Distances and contraction norms are exact.  Commutator, normality and
    polynomial residuals are rigorous upper bounds on the spectral norm that
    become exact whenever the cheap bound does not clear its gate, so the
    verdict is the same as with exact norms everywhere.
    """
    if samples < 3:
        raise BadParameterError("a certificate needs at least 3 samples")
    if family not in ("cube", "disk"):
        raise BadParameterError(f"unknown family {family!r}")
    for T in (X, Y):
        if T.m != path.m or T.n != path.n:
            raise ShapeMismatchError("endpoint tuples do not match the path shape")
    if P is not None and P.m != path.m:
        raise ShapeMismatchError("constraint system does not match the tuple length")
    poly_gate = tol.tol_member if poly_gate is None else poly_gate

    gates = {
        "endpoint": tol.tol_recon,
        "ball_slack": tol.tol_recon,
        "poly": poly_gate,
        "poly_strict": strict_poly,
        "commutator": tol.tol_commute,
        "normality": tol.tol_member,
        "contraction": tol.tol_member,
    }
    grid = path.certification_grid(samples)
    rows = [_sample_residuals(path.sample(float(t)), Y, P, family, gates, tol) for t in grid]
    dist = np.array([r["distance"] for r in rows])
    poly, comm, normal = (max(r[k] for r in rows) for k in ("poly", "commutator", "normality"))
    contr = max(0.0, max(r["contraction"] for r in rows))
    ends = (metric(path.sample(0.0), X), metric(path.sample(1.0), Y))
    excess = max(0.0, float(dist.max()) - epsilon)
    failures = []
    if max(ends) > tol.tol_recon:
        failures.append("endpoint")
    if excess > tol.tol_recon:
        failures.append("ball")
    worst_poly = float(poly)
    if (worst_poly >= poly_gate) if strict_poly else (worst_poly > poly_gate):
        failures.append("poly")
    if comm > tol.tol_commute:
        failures.append("commutator")
    if normal > tol.tol_member:
        failures.append("normality")
    if contr > tol.tol_member:
        failures.append("contraction")
    return PathCertificate(
        endpoint_residuals=(float(ends[0]), float(ends[1])),
        max_ball_excess=excess,
        max_distance=float(dist.max()),
        max_poly_residual=worst_poly,
        max_commutator=float(comm),
        max_normality=float(normal),
        max_contraction_excess=float(contr),
        bound_checks=list(path.bound_checks),
        samples=len(grid),
        verdict="fail" if failures else "pass",
        epsilon=float(epsilon),
        family=family,
        gates=gates,
        failures=failures,
        trace={"t": grid, "distance": dist},
    )


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def random_unitary(n: int, rng: np.random.Generator, passes: int = 2) -> np.ndarray:
    """Product of random complex Givens rotations over every index pair,
    applied ``passes`` times, times a random diagonal phase."""
    U = np.diag(np.exp(2j * np.pi * rng.random(n)))
    rounds = _round_robin(n)
    for _ in range(passes):
        for p, q in rounds:
            if len(p) == 0:
                continue
            theta = 2 * np.pi * rng.random(len(p))
            phi = 2 * np.pi * rng.random(len(p))
            c, s = np.cos(theta), np.sin(theta) * np.exp(1j * phi)
            Up, Uq = U[:, p].copy(), U[:, q].copy()
            U[:, p] = c * Up - s.conj() * Uq
            U[:, q] = s * Up + c * Uq
    return U


def random_skew(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random skew-hermitian matrix of unit operator norm."""
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    S = (G - dagger(G)) / 2
    return S / np.linalg.norm(S, 2)


def tuple_from_rows(rows: np.ndarray, U: np.ndarray, hermitian: bool) -> MatrixTuple:
    Ud = dagger(U)
    mats = []
    for j in range(rows.shape[1]):
        A = (U * rows[:, j]) @ Ud
        if hermitian:
            A = (A + dagger(A)) / 2
        mats.append(A)
    return MatrixTuple(mats)


def random_member(Z: ZeroSet, n: int, rng: np.random.Generator) -> tuple[MatrixTuple, np.ndarray, np.ndarray]:
    """Seeded member of the algebraic set: joint eigenvalues drawn from the
    zero set with replacement, conjugated by a random Givens product.

    Returns the tuple, its joint eigenvalue rows and the conjugating unitary.
    """
    rows = Z.points[rng.integers(Z.size, size=n)]
    U = random_unitary(n, rng)
    return tuple_from_rows(rows, U, Z.is_real), rows, U


def conjugation_perturb(X: MatrixTuple, magnitude: float, rng: np.random.Generator) -> MatrixTuple:
    """Conjugate ``X`` by ``exp(s S)`` with ``s`` chosen so the metric distance
    is just below ``magnitude``.  The result has the same joint spectrum."""
    if magnitude <= 0:
        return X
    S = random_skew(X.n, rng)
    w, V = np.linalg.eigh(-1j * S)
    Vd = dagger(V)

    def conj(s):
        U = (V * np.exp(1j * s * w)) @ Vd
        return X.conjugate_by(U)

    slope = max(np.linalg.norm(S @ A - A @ S, 2) for A in X)
    if slope == 0:
        return X
    s = magnitude / slope
    Y = conj(s)
    for _ in range(20):
        d = metric(X, Y)
        if d <= magnitude:
            break
        s *= 0.999 * magnitude / d
        Y = conj(s)
    return Y


def eigen_perturb(rows: np.ndarray, size: float, rng: np.random.Generator, real: bool) -> np.ndarray:
    """Move every joint eigenvalue by at most ``size`` per coordinate, keeping
    it in [-1, 1] (real) or the closed unit disk (complex)."""
    if size <= 0:
        return rows.copy()
    if real:
        out = rows.real + size * rng.uniform(-1, 1, rows.shape)
        return np.clip(out, -1, 1).astype(complex)
    r = size * np.sqrt(rng.random(rows.shape))
    out = rows + r * np.exp(2j * np.pi * rng.random(rows.shape))
    mod = np.abs(out)
    return np.where(mod > 1, out / np.maximum(mod, 1), out)


def coordinate_system(Z: ZeroSet, tol: ToleranceConfig = DEFAULT_TOL) -> MultiPolySystem:
    """Constraint system made of the coordinate polynomials of ``Z``, each
    in its own variable; vanishes on every joint spectrum drawn from ``Z``."""
    polys = []
    for k, q in enumerate(coordinate_polynomials(Z, tol)):
        terms = {}
        for e, c in enumerate(q.coef):
            if c != 0:
                exps = [0] * Z.m
                exps[k] = e
                terms[tuple(exps)] = complex(c)
        polys.append(MultiPoly(Z.m, terms))
    return MultiPolySystem(Z.m, tuple(polys))


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

MARGIN_KEYS = ("ball", "poly", "endpoint", "commutator")


@dataclass
class SweepRow:
    n: int
    delta_used: float
    success: bool
    margins: dict
    cpa_max_degree: int
    error: str = ""

    @property
    def worst_margin(self) -> float:
        return min(self.margins.values()) if self.margins else float("nan")


@dataclass
class SweepReport:
    rows: list[SweepRow]
    epsilon: float
    seed: int
    family: str

    @property
    def all_success(self) -> bool:
        return all(r.success for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "delta_used", "success"] + [f"margin_{k}" for k in MARGIN_KEYS] + ["cpa_max_degree", "error"])
        for r in self.rows:
            w.writerow(
                [r.n, repr(r.delta_used), str(r.success).lower()]
                + [repr(float(r.margins.get(k, float("nan")))) for k in MARGIN_KEYS]
                + [r.cpa_max_degree, r.error]
            )
        return buf.getvalue()


def uniformity_sweep(
    Z: ZeroSet,
    epsilon: float,
    dims,
    seed: int = 0,
    P: MultiPolySystem | None = None,
    magnitude: float | None = None,
    cpa_delta: float = 0.5,
    samples: int = 129,
    tol: ToleranceConfig = DEFAULT_TOL,
    K_m: float = 1.0,
) -> SweepReport:
    """Connect and certify one seeded pair per dimension at a fixed
    perturbation magnitude.

    The magnitude defaults to the a-priori ``delta_budget``; it is identical
    for every ``n``.  Each row is reproducible from ``(seed, n)`` alone.
    """
    dims = sorted(int(n) for n in dims)
    if not dims:
        raise BadParameterError("dims must be nonempty")
    family = "cube" if Z.is_real else "disk"
    P = coordinate_system(Z, tol) if P is None else P
    if magnitude is None:
        magnitude = delta_budget(Z, epsilon, Z.m, K_m, tol).delta
    rows = []
    for n in dims:
        rng = np.random.default_rng([seed, n])
        X, _, _ = random_member(Z, n, rng)
        Y = conjugation_perturb(X, magnitude, rng)
        try:
            path = connect(X, Y, P, Z, epsilon, family, tol, K_m)
            cert = certify_path(path, X, Y, P, epsilon, family, samples, tol)
        except CommPathError as exc:
            rows.append(SweepRow(n, magnitude, False, {}, -1, f"{type(exc).__name__}: {exc}"))
            continue
        margins = {
            "ball": epsilon - cert.max_distance,
            "poly": tol.tol_member - cert.max_poly_residual,
            "endpoint": tol.tol_recon - max(cert.endpoint_residuals),
            "commutator": tol.tol_commute - cert.max_commutator,
        }
        cpa = cpa_hermitian(X, cpa_delta, tol) if family == "cube" else cpa_normal(X, cpa_delta, tol)
        rows.append(SweepRow(n, magnitude, cert.passed, margins, max(cpa.degrees)))
    return SweepReport(rows, float(epsilon), seed, family)
