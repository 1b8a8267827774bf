"""Classification of KMS states over a finite k-graph for a fixed dynamics.

For a query (beta, r) the extreme equilibrium states correspond to
subharmonic components: classes C of the mutual color-I reachability
relation whose restricted spectral radii match e^(beta r_i) on I, dominate
the other classes in their I-closure, and stay strictly subcritical on the
full closure in the complementary colors.  Each such pair (C, I) carries

* ``harmonic_vector``: the normalized joint Perron vector x supported on
  the I-closure of C,
* ``kms_vector``: its resolvent inflation xt over the complementary colors
  and the unit vector y = xt / |xt|_1, which is the state's vertex vector,
* a periodicity group describing the degree shifts that act trivially on
  infinite color-I paths in C; its dual parameterizes the non
  gauge-invariant extreme states over C.

``simplex`` assembles the full answer, ``beta_table`` solves for the
critical temperature sets symbolically in beta, ``decompose_kms`` writes an
arbitrary sub-invariant unit vector as a convex combination of extreme
vectors, and ``state_eval`` evaluates states on generators S_lam S_mu*.
"""

from __future__ import annotations

import itertools
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import (
    CertificationError,
    ComposabilityError,
    DegenerateKernelError,
    IncompletePeriodicityWarning,
    MatricesOnlyError,
    NegativeMassError,
    NotSubinvariantError,
    ResidualError,
)
from .kgraph import degree_add, degree_join, degree_sub, unit_degree
from .spectral import (
    EQ_TOL,
    Query,
    clamp_nonnegative,
    decompose_subinvariant,
    exact_rational_eigenvalue,
    is_subinvariant,
    neumann_sum,
    scaled_family,
    spectral_radius,
)

WEIGHT_FLOOR = 1e-10
RESIDUAL_TOL = 1e-7


# -- result types --------------------------------------------------------


@dataclass(frozen=True)
class SubharmonicComponent:
    component: tuple[str, ...]
    colors: frozenset[int]
    closure_colors: tuple[str, ...]
    closure_full: tuple[str, ...]
    rho_component: dict[int, float]
    rho_closure: dict[int, float]
    dominated: tuple[tuple[str, ...], ...]

    def key(self):
        return (len(self.colors), tuple(sorted(self.colors)), self.component)


@dataclass(frozen=True)
class CertificationResult:
    ok: bool
    component: SubharmonicComponent | None = None
    reason: str | None = None

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class PeriodicityGroup:
    colors: frozenset[int]
    generators: tuple[tuple[int, ...], ...]
    rank: int
    search_bound: int
    complete: bool


@dataclass(frozen=True, eq=False)
class ExtremeState:
    component: SubharmonicComponent
    y: np.ndarray
    per: PeriodicityGroup | None
    factors_through_ck: bool
    character: tuple[float, ...] | None = None

    def with_character(self, theta):
        theta = tuple(float(t) for t in theta)
        if self.per is None:
            raise MatricesOnlyError("no periodicity data on this state")
        if len(theta) != self.per.rank:
            raise ValueError(f"character needs {self.per.rank} angles, got {len(theta)}")
        return replace(self, character=theta)


@dataclass(frozen=True)
class SimplexDescription:
    query: Query
    vertices: tuple[str, ...]
    states: tuple[ExtremeState, ...]

    def mixture_vector(self, weights):
        """The vertex vector of the convex combination given by weights (one per state)."""
        w = np.asarray(list(weights), dtype=float)
        if len(w) != len(self.states) or w.min(initial=0.0) < 0:
            raise ValueError("weights must be nonnegative, one per state")
        if abs(w.sum() - 1.0) > EQ_TOL:
            raise ValueError("weights must sum to 1")
        out = np.zeros(len(self.vertices))
        for f, st in zip(w, self.states):
            out += f * st.y
        return out

    def to_payload(self):
        return {
            "beta": self.query.beta,
            "r": [float(x) for x in self.query.r],
            "vertices": list(self.vertices),
            "states": [
                {
                    "I": sorted(st.component.colors),
                    "component": list(st.component.component),
                    "y": [float(x) for x in st.y],
                    "per_generators": (
                        None if st.per is None else [list(g) for g in st.per.generators]
                    ),
                    "per_complete": bool(st.per.complete) if st.per is not None else False,
                    "factors_through_ck": bool(st.factors_through_ck),
                }
                for st in self.states
            ],
        }


@dataclass(frozen=True)
class BetaSet:
    """A set of inverse temperatures: empty, a point, an open interval, or all of R."""

    kind: str  # "empty" | "point" | "interval" | "all"
    value: float | None = None
    lo: float | None = None
    hi: float | None = None
    value_exact: str | None = None
    lo_exact: str | None = None
    hi_exact: str | None = None

    def to_payload(self):
        out = {"kind": self.kind}
        if self.kind == "point":
            out["value"] = self.value
            if self.value_exact:
                out["value_exact"] = self.value_exact
        elif self.kind == "interval":
            out["lo"] = self.lo
            out["hi"] = self.hi
            if self.lo_exact:
                out["lo_exact"] = self.lo_exact
            if self.hi_exact:
                out["hi_exact"] = self.hi_exact
        return out

    def render(self):
        if self.kind == "empty":
            return "{}"
        if self.kind == "all":
            return "R"
        if self.kind == "point":
            return "{%s}" % (self.value_exact or _fmt(self.value))
        lo = self.lo_exact or ("-oo" if self.lo is None else _fmt(self.lo))
        hi = self.hi_exact or ("oo" if self.hi is None else _fmt(self.hi))
        return f"({lo}, {hi})"


@dataclass(frozen=True)
class BetaRow:
    colors: frozenset[int]
    component: tuple[str, ...]
    beta_set: BetaSet


@dataclass(frozen=True)
class BetaTable:
    r: tuple[float, ...]
    vertices: tuple[str, ...]
    rows: tuple[BetaRow, ...]

    def row(self, colors, component):
        colors = frozenset(colors)
        component = tuple(sorted(component))
        for row in self.rows:
            if row.colors == colors and row.component == component:
                return row
        raise KeyError((sorted(colors), component))

    def to_payload(self):
        return {
            "r": [float(x) for x in self.r],
            "vertices": list(self.vertices),
            "rows": [
                {
                    "I": sorted(row.colors),
                    "component": list(row.component),
                    "beta_set": row.beta_set.to_payload(),
                }
                for row in self.rows
            ],
        }


def _fmt(x):
    return "%.10g" % x


# -- certification -------------------------------------------------------


def _restrict(graph, color, vertex_set):
    idx = sorted(graph.vindex[v] for v in vertex_set)
    return graph.matrices[color - 1][np.ix_(idx, idx)]


def _rho_margin(rho, target):
    return EQ_TOL * max(1.0, target)


def is_subharmonic(graph, component, colors, query):
    """Certify the class ``component`` of ~_colors against the three defining conditions.

    Returns a CertificationResult; on success it carries the certified
    SubharmonicComponent with its spectral data.  For an empty color set
    only the strict subcriticality on the full closure is checked.
    """
    colors = graph.color_set(colors)
    part = graph.require_class(component, colors)
    comp = tuple(sorted(component))
    comp_j = frozenset(range(1, graph.k + 1)) - colors
    closure_colors = tuple(sorted(graph.closure(comp, colors)))
    closure_full = tuple(sorted(graph.closure(comp, range(1, graph.k + 1))))
    rho_component = {i: spectral_radius(_restrict(graph, i, comp)) for i in sorted(colors)}
    rho_closure = {j: spectral_radius(_restrict(graph, j, closure_full)) for j in sorted(comp_j)}

    dominated = []
    closure_set = set(closure_colors)
    for cls in part.classes:
        if tuple(sorted(cls)) == comp or not set(cls).issubset(closure_set):
            continue
        rho_d = {i: spectral_radius(_restrict(graph, i, cls)) for i in sorted(colors)}
        weak = all(rho_d[i] <= rho_component[i] + _rho_margin(rho_d[i], rho_component[i]) for i in colors)
        strict = any(rho_d[i] < rho_component[i] - _rho_margin(rho_d[i], rho_component[i]) for i in colors)
        if not (weak and strict):
            return CertificationResult(
                False,
                reason=f"class {sorted(cls)} in the I-closure is not strictly dominated",
            )
        dominated.append(tuple(sorted(cls)))

    for i in sorted(colors):
        target = query.weight(i)
        if abs(rho_component[i] - target) > _rho_margin(rho_component[i], target):
            return CertificationResult(
                False,
                reason=(
                    f"rho(A_{i} on {sorted(comp)}) = {rho_component[i]:.12g} "
                    f"!= e^(beta r_{i}) = {target:.12g}"
                ),
            )
    for j in sorted(comp_j):
        target = query.weight(j)
        if not rho_closure[j] < target - _rho_margin(rho_closure[j], target):
            return CertificationResult(
                False,
                reason=(
                    f"rho(A_{j} on closure {sorted(closure_full)}) = {rho_closure[j]:.12g} "
                    f"is not strictly below e^(beta r_{j}) = {target:.12g}"
                ),
            )

    return CertificationResult(
        True,
        component=SubharmonicComponent(
            comp,
            colors,
            closure_colors,
            closure_full,
            rho_component,
            rho_closure,
            tuple(dominated),
        ),
    )


def find_subharmonic(graph, query, threads=1):
    """All certified (I, beta, r)-subharmonic components, sorted by (|I|, I, component)."""
    tasks = []
    all_colors = list(range(1, graph.k + 1))
    for size in range(graph.k + 1):
        for colors in itertools.combinations(all_colors, size):
            part = graph.components(colors)
            for cls in part.classes:
                tasks.append((cls, frozenset(colors)))

    def run(task):
        cls, colors = task
        return is_subharmonic(graph, cls, colors, query)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]
    found = [r.component for r in results if r]
    return sorted(found, key=lambda sc: sc.key())


# -- extreme vectors ------------------------------------------------------


def _joint_kernel(mats, eigenvalues, rcond=1e-9):
    """Orthonormal basis of the intersection of the eigenspaces ker(M - lam)."""
    size = mats[0].shape[0]
    basis = np.eye(size)
    for m, lam in zip(mats, eigenvalues):
        if basis.shape[1] == 0:
            return basis
        shifted = (m - lam * np.eye(size)) @ basis
        basis = basis @ scipy.linalg.null_space(shifted, rcond=rcond)
    return basis


def harmonic_vector(graph, sc, query):
    """The unit 1-norm joint eigenvector x supported (and positive) on the I-closure.

    Solved on the I-closure with the computed class radii as eigenvalues:
    successive nullspace extraction, then a sign fix (1-dimensional kernel)
    or a linear feasibility program picking the nonnegative direction.
    """
    cert = is_subharmonic(graph, sc.component, sc.colors, query)
    if not cert:
        raise CertificationError(f"component is not subharmonic here: {cert.reason}")
    n = graph.n
    if not sc.colors:
        x = np.zeros(n)
        x[graph.vindex[sc.component[0]]] = 1.0
        return x
    closure = sc.closure_colors
    idx = [graph.vindex[v] for v in closure]
    mats = [_restrict(graph, i, closure).astype(float) for i in sorted(sc.colors)]
    eigenvalues = [sc.rho_component[i] for i in sorted(sc.colors)]
    scale = max(abs(m).max() for m in mats)
    basis = _joint_kernel(mats, eigenvalues, rcond=1e-9 * max(1.0, scale))
    if basis.shape[1] == 0:
        raise DegenerateKernelError(
            f"joint eigenspace on {list(closure)} is empty at eigenvalues {eigenvalues}"
        )
    if basis.shape[1] == 1:
        vec = basis[:, 0]
        if vec.sum() < 0:
            vec = -vec
        vec = clamp_nonnegative(vec, hard=-1e-9, exc=DegenerateKernelError, what="eigenvector")
    else:
        ones = np.ones(len(idx))
        res = scipy.optimize.linprog(
            c=np.zeros(basis.shape[1]),
            A_ub=-basis,
            b_ub=np.zeros(len(idx)),
            A_eq=(ones @ basis)[None, :],
            b_eq=[1.0],
            bounds=[(None, None)] * basis.shape[1],
            method="highs",
        )
        if not res.success:
            raise DegenerateKernelError(
                f"no nonnegative direction in the {basis.shape[1]}-dimensional joint eigenspace"
            )
        vec = clamp_nonnegative(
            basis @ res.x, hard=-1e-9, exc=DegenerateKernelError, what="eigenvector"
        )
    total = vec.sum()
    if total <= 0:
        raise DegenerateKernelError("joint eigenvector has no mass")
    vec = vec / total
    if vec.min() <= 1e-12:
        raise DegenerateKernelError(
            f"eigenvector is not strictly positive on the I-closure (min {vec.min():.3e})"
        )
    x = np.zeros(n)
    x[idx] = vec
    return x


def kms_vector(graph, sc, query):
    """The inflated vector xt (resolvent sum over complementary colors) and y = xt/|xt|_1."""
    x = harmonic_vector(graph, sc, query)
    comp_j = sorted(frozenset(range(1, graph.k + 1)) - sc.colors)
    closure = sc.closure_full
    idx = [graph.vindex[v] for v in closure]
    xt = np.zeros(graph.n)
    if comp_j:
        fam = scaled_family(graph, query, subset=closure, colors=comp_j)
        xt[idx] = neumann_sum(fam, x[idx])
    else:
        xt[:] = x
    y = xt / xt.sum()
    return xt, y


def boundary_vector(graph, psi, colors, query):
    """Inclusion-exclusion mass of paths that are infinite exactly in the I directions.

    psi' = sum over L subset of the complement of (-1)^|L| e^(-beta r e_L) A^(e_L) psi.
    """
    colors = graph.color_set(colors)
    psi = np.asarray(psi, dtype=float)
    comp_j = sorted(frozenset(range(1, graph.k + 1)) - colors)
    out = np.zeros_like(psi)
    for size in range(len(comp_j) + 1):
        for subset in itertools.combinations(comp_j, size):
            vec = psi
            for j in subset:
                vec = (graph.matrices[j - 1] @ vec) / query.weight(j)
            out = out + ((-1) ** size) * vec
    return clamp_nonnegative(out, hard=-EQ_TOL, exc=NegativeMassError, what="boundary mass")


# -- decomposition ---------------------------------------------------------


def _classes_top_down(graph, part):
    """Classes of the partition ordered so that anything above comes first; ties by vertex order."""
    classes = list(part.classes)
    reps = [graph.vindex[cls[0]] for cls in classes]
    above = {
        a: {
            b
            for b in range(len(classes))
            if b != a and part.reach[reps[a], reps[b]]
        }
        for a in range(len(classes))
    }
    ordered = []
    remaining = set(range(len(classes)))
    while remaining:
        ready = [a for a in remaining if not (above[a] & remaining)]
        ready.sort(key=lambda a: reps[a])
        pick = ready[0]
        ordered.append(classes[pick])
        remaining.remove(pick)
    return ordered


def decompose_kms(graph, psi, query):
    """Write a unit sub-invariant vector as sum of t_C y^C over subharmonic components.

    The 2^k split isolates, per color set I, the part that is invariant on I
    and decaying off I; its boundary mass is then peeled over the ~_I classes
    from the top of the reachability order downward.
    """
    psi = np.asarray(psi, dtype=float)
    fam = scaled_family(graph, query)
    check = is_subinvariant(fam, psi)
    if not check:
        raise NotSubinvariantError(
            f"vector is not sub-invariant for this query (subset {sorted(check.witness_set)})"
        )
    if abs(psi.sum() - 1.0) > EQ_TOL:
        raise ValueError(f"vector must have unit 1-norm, got {psi.sum():.12g}")
    pieces = decompose_subinvariant(fam, psi)
    out = []
    for colors in sorted(pieces, key=lambda s: (len(s), tuple(sorted(s)))):
        h = pieces[colors]
        if h.max(initial=0.0) <= 1e-11:
            continue
        mass = boundary_vector(graph, h, colors, query)
        part = graph.components(colors)
        residual = mass.copy()
        for cls in _classes_top_down(graph, part):
            cls_idx = [graph.vindex[v] for v in cls]
            peak = float(abs(residual[cls_idx]).max())
            if peak <= WEIGHT_FLOOR:
                continue
            cert = is_subharmonic(graph, cls, colors, query)
            if not cert:
                raise ResidualError(
                    f"boundary mass {peak:.3e} sits on {sorted(cls)} which is not "
                    f"(I={sorted(colors)}) subharmonic: {cert.reason}"
                )
            x = harmonic_vector(graph, cert.component, query)
            at = max(cls_idx, key=lambda i: x[i])
            t_prime = float(residual[at] / x[at])
            if t_prime < -1e-8:
                raise ResidualError(f"negative weight {t_prime:.3e} while peeling {sorted(cls)}")
            if t_prime > 0:
                residual = residual - t_prime * x
                xt, _ = kms_vector(graph, cert.component, query)
                weight = t_prime * float(xt.sum())
                if weight > WEIGHT_FLOOR:
                    out.append((cert.component, weight))
        if abs(residual).max(initial=0.0) > RESIDUAL_TOL:
            raise ResidualError(
                f"peeling the I={sorted(colors)} part leaves residual {abs(residual).max():.3e}; "
                "the vector is not a KMS vector for this query"
            )
    return sorted(out, key=lambda pair: pair[0].key())


# -- periodicity ------------------------------------------------------------


def _hermite_basis(vectors, dim):
    """Column-echelon basis over the integers of the lattice the vectors generate."""
    cols = [list(map(int, v)) for v in vectors if any(v)]
    basis = []
    for row in range(dim):
        live = [c for c in cols if c[row] != 0]
        if not live:
            continue
        while len(live) > 1:
            live.sort(key=lambda c: abs(c[row]))
            a = live[0]
            for b in live[1:]:
                f = b[row] // a[row]
                for t in range(dim):
                    b[t] -= f * a[t]
            cols = [c for c in cols if any(c)]
            live = [c for c in cols if c[row] != 0]
        piv = live[0]
        if piv[row] < 0:
            piv[:] = [-x for x in piv]
        basis.append(tuple(piv))
        cols = [c for c in cols if c is not piv]
    return tuple(basis)


def _lattice_solve(basis, vec):
    """Integer coordinates of vec in the echelon basis, or None if outside the lattice."""
    residual = list(map(int, vec))
    coeffs = []
    for b in basis:
        pivot = next(i for i, x in enumerate(b) if x != 0)
        if residual[pivot] % b[pivot] != 0:
            return None
        c = residual[pivot] // b[pivot]
        residual = [x - c * y for x, y in zip(residual, b)]
        coeffs.append(c)
    if any(residual):
        return None
    return coeffs


def periodicity_group(graph, component, colors, bound=None):
    """Shift periods of the infinite color-I paths inside the class, by bounded search.

    A candidate p (decomposed into positive and negative parts) passes when
    for every color i in I all paths in the class of degree p+ + p- + e_i
    have equal color-i factors at offsets p+ and p-.  Passing candidates
    generate the reported subgroup; completeness cannot be certified for a
    finite bound, so ``complete`` is False whenever a search ran.
    """
    colors = frozenset(colors)
    if not colors:
        return PeriodicityGroup(colors, (), 0, 0, True)
    graph._require_paths("periodicity_group")
    graph.require_class(component, colors)
    comp = set(component)
    bound = int(bound) if bound is not None else len(comp)
    if bound < 1:
        raise ValueError("bound must be positive")

    sorted_colors = sorted(colors)
    ranges = [range(-bound, bound + 1) if c in colors else (0,) for c in range(1, graph.k + 1)]
    candidates = [p for p in itertools.product(*ranges) if any(p)]
    candidates.sort(key=lambda p: (sum(abs(x) for x in p), p))

    def passes(p):
        plus = tuple(max(x, 0) for x in p)
        minus = tuple(max(-x, 0) for x in p)
        for i in sorted_colors:
            degree = degree_add(degree_add(plus, minus), unit_degree(graph.k, i))
            step = unit_degree(graph.k, i)
            for v in sorted(comp):
                for lam in graph.enumerate_paths(v, degree):
                    if lam.source not in comp:
                        continue
                    if graph.segment(lam, plus, degree_add(plus, step)) != graph.segment(
                        lam, minus, degree_add(minus, step)
                    ):
                        return False
        return True

    found = []
    basis = ()
    for p in candidates:
        if basis and _lattice_solve(basis, p) is not None:
            continue
        if passes(p):
            found.append(p)
            basis = _hermite_basis(found, graph.k)
    return PeriodicityGroup(colors, basis, len(basis), bound, False)


# -- full simplex, tables, evaluation ---------------------------------------


def factors_through_ck(graph, sc):
    """Whether the state factors through the quotient algebra: some class above C emits no J-colors."""
    comp_j = sorted(frozenset(range(1, graph.k + 1)) - sc.colors)
    part = graph.components(sc.colors)
    target = set(sc.component)
    for cls in part.classes:
        if not target.issubset(graph.closure(cls, sc.colors)):
            continue
        idx = [graph.vindex[v] for v in cls]
        if all(graph.matrices[j - 1][idx, :].sum() == 0 for j in comp_j):
            return True
    return False


def simplex(graph, query, per_bound=None, threads=1):
    """All extreme states at the query: vectors, periodicity data, quotient flags."""
    states = []
    for sc in find_subharmonic(graph, query, threads=threads):
        _, y = kms_vector(graph, sc, query)
        if not sc.colors:
            per = PeriodicityGroup(sc.colors, (), 0, 0, True)
        elif graph.matrices_only:
            per = None
        else:
            per = periodicity_group(graph, sc.component, sc.colors, bound=per_bound)
        states.append(
            ExtremeState(
                component=sc,
                y=y,
                per=per,
                factors_through_ck=factors_through_ck(graph, sc),
            )
        )
    return SimplexDescription(query, graph.vertices, tuple(states))


def _exact_log_ratio(num: Fraction, den: Fraction):
    """Render ln(num)/ln(den) exactly, simplified to a rational when num = den^(u/w)."""
    if num <= 0 or den <= 0 or den == 1:
        return None
    approx = math.log(float(num)) / math.log(float(den))
    cand = Fraction(approx).limit_denominator(64)
    if cand.denominator <= 64 and num**cand.denominator == den**cand.numerator:
        return str(cand)
    return f"ln({num})/ln({den})"


def _critical_beta(rho, rho_exact, r_value, base):
    value = math.log(rho) / r_value
    exact = None
    if rho_exact is not None and base is not None:
        exact = _exact_log_ratio(rho_exact, base)
    return value, exact


def beta_table(graph, r, r_bases=None):
    """For every color set I and ~_I class, the set of beta at which it certifies.

    Colors in I with r_i nonzero each pin beta to ln(rho_i)/r_i (all must
    agree); colors with r_i = 0 demand rho_i = 1 and leave beta free.  The
    complementary colors contribute strict open half-lines.  The domination
    condition inside the I-closure gates the row independently of beta.
    """
    r = tuple(float(x) for x in r)
    if len(r) != graph.k:
        raise ValueError(f"r must have {graph.k} entries")
    bases = tuple(r_bases) if r_bases is not None else (None,) * graph.k
    rows = []
    all_colors = list(range(1, graph.k + 1))
    for size in range(graph.k + 1):
        for colors in itertools.combinations(all_colors, size):
            colors_set = frozenset(colors)
            part = graph.components(colors)
            for cls in part.classes:
                rows.append(
                    BetaRow(colors_set, tuple(sorted(cls)), _beta_set_for(graph, cls, colors_set, r, bases))
                )
    return BetaTable(r, graph.vertices, tuple(rows))


def _beta_set_for(graph, cls, colors, r, bases):
    comp = tuple(sorted(cls))
    comp_j = sorted(frozenset(range(1, graph.k + 1)) - colors)
    closure_full = tuple(sorted(graph.closure(comp, range(1, graph.k + 1))))
    closure_colors = set(graph.closure(comp, colors))
    part = graph.components(colors)
    rho_component = {i: spectral_radius(_restrict(graph, i, comp)) for i in sorted(colors)}

    # domination gate, independent of beta
    for other in part.classes:
        if tuple(sorted(other)) == comp or not set(other).issubset(closure_colors):
            continue
        rho_d = {i: spectral_radius(_restrict(graph, i, other)) for i in sorted(colors)}
        weak = all(rho_d[i] <= rho_component[i] + _rho_margin(rho_d[i], rho_component[i]) for i in colors)
        strict = any(rho_d[i] < rho_component[i] - _rho_margin(rho_d[i], rho_component[i]) for i in colors)
        if not (weak and strict):
            return BetaSet("empty")

    # matching conditions on I pin beta (or leave it free when r_i = 0)
    point = None
    point_exact = None
    for i in sorted(colors):
        rho = rho_component[i]
        if rho <= 0:
            return BetaSet("empty")
        if r[i - 1] == 0.0:
            if abs(rho - 1.0) > EQ_TOL:
                return BetaSet("empty")
            continue
        exact_rho = exact_rational_eigenvalue(_restrict(graph, i, comp), rho)
        value, exact = _critical_beta(rho, exact_rho, r[i - 1], bases[i - 1])
        if point is None:
            point, point_exact = value, exact
        elif abs(value - point) > EQ_TOL:
            return BetaSet("empty")
        elif point_exact is None:
            point_exact = exact

    # strict subcriticality on the full closure bounds beta from one side per color
    lo, hi = None, None
    lo_exact, hi_exact = None, None
    for j in comp_j:
        rho = spectral_radius(_restrict(graph, j, closure_full))
        if rho <= 0:
            continue
        if r[j - 1] == 0.0:
            if not rho < 1.0 - EQ_TOL:
                return BetaSet("empty")
            continue
        exact_rho = exact_rational_eigenvalue(
            _restrict(graph, j, closure_full).astype(np.int64), rho
        )
        value, exact = _critical_beta(rho, exact_rho, r[j - 1], bases[j - 1])
        if r[j - 1] > 0:
            if lo is None or value > lo:
                lo, lo_exact = value, exact
        else:
            if hi is None or value < hi:
                hi, hi_exact = value, exact

    if point is not None:
        # the point survives iff every one-sided constraint holds with margin
        for j in comp_j:
            rho = spectral_radius(_restrict(graph, j, closure_full))
            target = math.exp(point * r[j - 1])
            if not rho < target - _rho_margin(rho, target):
                return BetaSet("empty")
        return BetaSet("point", value=point, value_exact=point_exact)
    if lo is None and hi is None:
        return BetaSet("all")
    if lo is not None and hi is not None and lo >= hi:
        return BetaSet("empty")
    return BetaSet("interval", lo=lo, hi=hi, lo_exact=lo_exact, hi_exact=hi_exact)


def _degree_weight(query, degree):
    return math.exp(-query.beta * sum(ri * ni for ri, ni in zip(query.r, degree)))


def state_eval(graph, state, lam, mu, query):
    """Value of the state on the generator S_lam S_mu* (complex).

    ``state`` is an ExtremeState or a list of (ExtremeState, weight) pairs;
    mixtures must carry no characters and evaluate diagonally.  A state
    without a character is the gauge-invariant state of its component, so
    its off-diagonal values vanish; with a character theta the off-diagonal
    value is nonzero exactly when the degree difference is a period.
    """
    if lam.source != mu.source:
        raise ComposabilityError(
            "generators S_lam S_mu* require s(lam) = s(mu); this pair is the zero operator"
        )
    if isinstance(state, (list, tuple)):
        total = sum(w for _, w in state)
        if abs(total - 1.0) > EQ_TOL or any(w < 0 for _, w in state):
            raise ValueError("mixture weights must be nonnegative and sum to 1")
        if any(st.character is not None for st, _ in state):
            raise ValueError("mixtures are only defined over states without characters")
        if lam != mu:
            return 0j
        s_idx = graph.vindex[lam.source]
        value = sum(w * st.y[s_idx] for st, w in state)
        return complex(_degree_weight(query, lam.degree) * value)

    s_idx = graph.vindex[lam.source]
    if lam == mu:
        return complex(_degree_weight(query, lam.degree) * state.y[s_idx])
    if state.character is None:
        return 0j
    if graph.matrices_only:
        raise MatricesOnlyError("off-diagonal evaluation needs squares")
    per = state.per
    if per is None:
        raise MatricesOnlyError("no periodicity data on this state")
    diff = degree_sub(lam.degree, mu.degree)
    comp_j = frozenset(range(1, graph.k + 1)) - state.component.colors
    if any(diff[j - 1] for j in comp_j):
        return 0j
    if not per.complete:
        warnings.warn(
            "periodicity group came from a bounded search; zeros may be spurious",
            IncompletePeriodicityWarning,
            stacklevel=2,
        )
    coeffs = _lattice_solve(per.generators, diff) if per.generators else (None if any(diff) else [])
    if coeffs is None:
        return 0j
    phase = complex(math.cos(sum(t * c for t, c in zip(state.character, coeffs))),
                    math.sin(sum(t * c for t, c in zip(state.character, coeffs))))
    join = degree_join(lam.degree, mu.degree)
    mass = sum(state.y[graph.vindex[kappa.source]] for kappa, _ in graph.lambda_min(lam, mu))
    return phase * _degree_weight(query, join) * mass
