"""Numerical core for commuting nonnegative matrix families.

Spectral radii, sub-invariance tests, Riesz splits into invariant and
decaying parts, the full 2^k decomposition of a sub-invariant vector, and
resolvent sums.  Vectors are plain numpy arrays in the graph's vertex
order; tolerances follow the package-wide conventions (relative 1e-9 for
equality checks, 1e-12 iteration steps, 1e-8 verdicts).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg

from .errors import (
    ConvergenceError,
    DimensionError,
    NotSubinvariantError,
    SpectralRadiusError,
)

STEP_TOL = 1e-12
VERDICT_TOL = 1e-8
EQ_TOL = 1e-9
ITER_CAP = 10**6


@dataclass(frozen=True)
class Query:
    """Dynamics parameters: inverse temperature and the one-parameter group vector.

    ``weight(i)`` is e^(beta * r_i) for the 1-based color i.  At beta = 0 all
    weights are 1, which is exactly the tracial reduction (the beta = 0 states
    coincide with the beta = 1 states for r = 0), so no special casing is
    needed downstream.  ``r_bases`` optionally keeps the exact rational bases
    when r was supplied as logarithms, for symbolic endpoints in tables.
    """

    beta: float
    r: tuple[float, ...]
    r_bases: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        if not all(math.isfinite(x) for x in self.r) or not math.isfinite(self.beta):
            raise ValueError("beta and r must be finite")

    @property
    def k(self):
        return len(self.r)

    def weight(self, color):
        return math.exp(self.beta * self.r[color - 1])

    def weights(self):
        return tuple(self.weight(c) for c in range(1, self.k + 1))


@dataclass(frozen=True)
class MatrixFamily:
    """Pairwise commuting nonnegative square matrices over a common index set."""

    matrices: tuple[np.ndarray, ...]

    def __post_init__(self):
        mats = tuple(np.asarray(m, dtype=float) for m in self.matrices)
        object.__setattr__(self, "matrices", mats)
        size = mats[0].shape[0] if mats else 0
        for m in mats:
            if m.ndim != 2 or m.shape != (size, size):
                raise DimensionError("family matrices must be square and equally sized")
            if m.size and m.min() < 0:
                raise ValueError("family matrices must be nonnegative")
        for a, b in itertools.combinations(mats, 2):
            lhs, rhs = a @ b, b @ a
            scale = max(1.0, abs(lhs).max() if lhs.size else 0.0)
            if lhs.size and abs(lhs - rhs).max() > EQ_TOL * scale:
                raise ValueError("family matrices do not commute within tolerance")

    def __len__(self):
        return len(self.matrices)

    def __iter__(self):
        return iter(self.matrices)

    @property
    def size(self):
        return self.matrices[0].shape[0] if self.matrices else 0


@dataclass(frozen=True)
class SubinvarianceResult:
    ok: bool
    witness_set: frozenset[int] | None = None
    witness_index: int | None = None
    witness_value: float | None = None

    def __bool__(self):
        return self.ok


def scaled_family(graph, query, subset=None, colors=None):
    """The family e^(-beta r_i) A_i, optionally restricted to a vertex subset or color list."""
    idx = None
    if subset is not None:
        idx = sorted(graph.vindex[v] for v in subset)
    use = sorted(colors) if colors is not None else range(1, graph.k + 1)
    mats = []
    for c in use:
        m = graph.matrices[c - 1].astype(float) / query.weight(c)
        if idx is not None:
            m = m[np.ix_(idx, idx)]
        mats.append(m)
    return MatrixFamily(tuple(mats))


def spectral_radius(matrix):
    """Perron root of a nonnegative square matrix; 0 for the empty matrix."""
    m = np.asarray(matrix, dtype=float)
    if m.size == 0:
        return 0.0
    if m.shape == (1, 1):
        return float(m[0, 0])
    return float(max(abs(np.linalg.eigvals(m))))


def exact_rational_eigenvalue(int_matrix, rho):
    """The value of ``rho`` as an exact Fraction if it is a rational eigenvalue, else None.

    Only integer matrices are considered; the candidate from the float is
    verified by exact singularity of A - c*I over the rationals.
    """
    a = np.asarray(int_matrix)
    if a.size == 0 or not np.issubdtype(a.dtype, np.integer):
        return None
    cand = Fraction(rho).limit_denominator(10**6)
    if abs(float(cand) - rho) > 1e-6 * max(1.0, abs(rho)):
        return None
    n = a.shape[0]
    rows = [[Fraction(int(a[i, j])) - (cand if i == j else 0) for j in range(n)] for i in range(n)]
    # exact Gaussian elimination: singular iff some pivot column vanishes
    col = 0
    for r in range(n):
        pivot = next((i for i in range(r, n) if rows[i][r] != 0), None)
        if pivot is None:
            return cand
        rows[r], rows[pivot] = rows[pivot], rows[r]
        for i in range(r + 1, n):
            f = rows[i][r] / rows[r][r]
            rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
    return None


def clamp_nonnegative(vec, hard=-EQ_TOL, exc=NotSubinvariantError, what="vector"):
    """Zero out roundoff negatives; entries below the hard floor raise."""
    v = np.asarray(vec, dtype=float)
    low = v.min(initial=0.0)
    if low < hard:
        raise exc(f"{what} has a negative entry {low:.3e} below tolerance {hard:.1e}")
    return np.where(v < 0, 0.0, v)


def is_subinvariant(family, psi):
    """Check prod_{i in I}(1 - B_i) psi >= 0 for every subset I of the family."""
    psi = np.asarray(psi, dtype=float)
    if psi.shape != (family.size,):
        raise DimensionError(f"vector has shape {psi.shape}, family size is {family.size}")
    indices = range(1, len(family) + 1)
    for r in range(len(family) + 1):
        for subset in itertools.combinations(indices, r):
            vec = psi.copy()
            for i in subset:
                vec = vec - family.matrices[i - 1] @ vec
            if vec.size and vec.min() < -EQ_TOL:
                j = int(np.argmin(vec))
                return SubinvarianceResult(False, frozenset(subset), j, float(vec[j]))
    return SubinvarianceResult(True)


def _iterate_limit(matrix, psi):
    """Monotone limit of B^n psi for B psi <= psi; nonnegativity is preserved.

    The iteration runs on the support of psi only: sub-invariance forces
    B to map that span into itself, and there the powers of B stay bounded,
    so the stride-doubling acceleration below cannot overflow.
    """
    psi = np.asarray(psi, dtype=float)
    idx = np.flatnonzero(psi > 0)
    if idx.size == 0:
        return np.zeros_like(psi)
    mat = np.asarray(matrix, dtype=float)[np.ix_(idx, idx)]
    cur = psi[idx]
    stride = 1
    steps = 0
    while steps < ITER_CAP:
        nxt = mat @ cur
        steps += stride
        step_size = abs(nxt - cur).max(initial=0.0)
        if step_size < STEP_TOL:
            out = np.zeros_like(psi)
            out[idx] = np.maximum(nxt, 0.0)
            return out
        cur = nxt
        # slow decay: square the matrix to stride through the tail of the sequence
        if steps >= 1024 * stride:
            mat = mat @ mat
            stride *= 2
    raise ConvergenceError(
        f"power iteration did not settle within {ITER_CAP} steps (last step {step_size:.3e})"
    )


def riesz_split(matrix, psi):
    """Split psi with B psi <= psi into the invariant limit part and the decaying rest."""
    b = np.asarray(matrix, dtype=float)
    psi = np.asarray(psi, dtype=float)
    if b.shape != (psi.size, psi.size):
        raise DimensionError("matrix and vector sizes disagree")
    slack = (b @ psi) - psi
    if slack.size and slack.max(initial=0.0) > EQ_TOL:
        raise NotSubinvariantError(f"B psi exceeds psi by {slack.max():.3e}")
    inv = _iterate_limit(b, psi)
    rest = psi - inv
    rest = clamp_nonnegative(rest, hard=-EQ_TOL, what="Riesz remainder")
    return inv, rest


def decompose_subinvariant(family, psi, order=None):
    """Split a sub-invariant psi into the 2^k pieces h^I (invariant on I, decaying off I).

    Splits along one matrix at a time in ``order`` (default 1..k); the result
    is independent of the order, which the uniqueness tests exercise.
    Returns a dict keyed by frozenset of 1-based matrix indices.
    """
    check = is_subinvariant(family, psi)
    if not check:
        raise NotSubinvariantError(
            f"input vector is not sub-invariant: subset {sorted(check.witness_set)} "
            f"entry {check.witness_index} = {check.witness_value:.3e}"
        )
    order = list(order) if order is not None else list(range(1, len(family) + 1))
    if sorted(order) != list(range(1, len(family) + 1)):
        raise ValueError(f"order {order} is not a permutation of 1..{len(family)}")
    pieces = {frozenset(): np.asarray(psi, dtype=float)}
    for i in order:
        nxt = {}
        for key, vec in pieces.items():
            inv, rest = riesz_split(family.matrices[i - 1], vec)
            nxt[key | {i}] = inv
            nxt[key] = rest
        pieces = nxt
    _verify_decomposition(family, psi, pieces)
    return pieces


def _verify_decomposition(family, psi, pieces):
    total = sum(pieces.values())
    if abs(total - psi).max(initial=0.0) > EQ_TOL:
        raise ConvergenceError("decomposition pieces do not sum back to the input")
    for key, vec in pieces.items():
        if not vec.any():
            continue
        for i in key:
            if abs(family.matrices[i - 1] @ vec - vec).max() > VERDICT_TOL:
                raise ConvergenceError(f"piece {sorted(key)} is not invariant along {i}")
        for j in range(1, len(family) + 1):
            if j in key:
                continue
            if _iterate_limit(family.matrices[j - 1], vec).max(initial=0.0) > VERDICT_TOL:
                raise ConvergenceError(f"piece {sorted(key)} does not decay along {j}")


def neumann_sum(family, psi):
    """prod_j (1 - B_j)^(-1) psi for a family with all spectral radii below 1."""
    psi = np.asarray(psi, dtype=float)
    for m in family:
        rho = spectral_radius(m)
        if rho >= 1.0 - EQ_TOL:
            raise SpectralRadiusError(f"spectral radius {rho} is not below 1")
    out = psi
    eye = np.eye(family.size)
    for m in family:
        out = scipy.linalg.solve(eye - m, out)
    return out


def support(vec, tol=1e-12):
    """Indices carrying mass above tol."""
    v = np.asarray(vec, dtype=float)
    return tuple(int(i) for i in np.flatnonzero(v > tol))
