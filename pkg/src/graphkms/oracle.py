"""Brute-force and stochastic cross-checks backing the test suite and the check command.

Randomness always flows through counter-based Philox streams keyed on the
caller's seed, so every result is reproducible and independent of batching.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import GenerationError, SupportError
from .kms import (
    boundary_vector,
    decompose_kms,
    harmonic_vector,
    kms_vector,
    simplex,
    state_eval,
)
from .spectral import (
    MatrixFamily,
    decompose_subinvariant,
    is_subinvariant,
    neumann_sum,
    scaled_family,
    spectral_radius,
)


def _rng(*key):
    # Philox takes a 2-word key; fold any extra components into the second word
    first = key[0] % 2**64
    second = 0
    for part in key[1:]:
        second = (second * 0x9E3779B97F4A7C15 + part + 1) % 2**64
    return np.random.Generator(
        np.random.Philox(key=np.array([first, second], dtype=np.uint64))
    )


def random_commuting_family(seed, size, k):
    """k commuting nonnegative integer matrices: polynomials of one random matrix.

    Coefficients are drawn from 0..3 and the degree is at most 2, so
    commutation is structural; it is still re-verified exactly.
    """
    if size < 1 or k < 1:
        raise ValueError("size and k must be positive")
    rng = _rng(seed, 0x636F6D6D)
    base = rng.integers(0, 3, size=(size, size))
    powers = [np.eye(size, dtype=np.int64), base, base @ base]
    mats = []
    for _ in range(k):
        coeffs = rng.integers(0, 4, size=3)
        while not coeffs.any():
            coeffs = rng.integers(0, 4, size=3)
        mats.append(sum(int(c) * p for c, p in zip(coeffs, powers)))
    for a, b in itertools.combinations(mats, 2):
        assert np.array_equal(a @ b, b @ a)
    return MatrixFamily(tuple(m.astype(float) for m in mats))


def _perron_direction(matrix):
    """Unit 1-norm eigenvector at the spectral radius, clamped nonnegative."""
    values, vectors = np.linalg.eig(matrix)
    rho = max(abs(values))
    vec = vectors[:, int(np.argmin(abs(values - rho)))]
    vec = vec * np.exp(-1j * np.angle(vec[int(np.argmax(abs(vec)))]))
    vec = np.where(np.real(vec) < 0, 0.0, np.real(vec))
    total = vec.sum()
    return vec / total if total > 0 else np.ones(matrix.shape[0]) / matrix.shape[0]


def random_subinvariant(seed, family):
    """A unit 1-norm sub-invariant vector for the family, by rejection sampling.

    Candidate pieces: the joint Perron direction of the summed family and
    resolvent-smoothed random vectors over the strictly subcritical members;
    random nonnegative combinations are resampled until the check passes.
    """
    rng = _rng(seed, 0x73756276)
    size = family.size
    radii = [spectral_radius(m) for m in family]

    perron = _perron_direction(sum(family.matrices))
    subcrit = [m for m, rho in zip(family.matrices, radii) if rho < 1 - 1e-6]

    for trial in range(1000):
        pieces = [perron]
        if subcrit and trial % 3 != 2:
            raw = rng.random(size)
            smooth = neumann_sum(MatrixFamily(tuple(subcrit)), raw)
            pieces.append(smooth / smooth.sum())
        weights = rng.random(len(pieces))
        psi = sum(w * p for w, p in zip(weights, pieces))
        if psi.sum() <= 0:
            continue
        psi = psi / psi.sum()
        if is_subinvariant(family, psi):
            return psi
    raise GenerationError(
        f"no sub-invariant vector found in 1000 draws (spectral radii {radii})"
    )


MC_BLOCK = 4096


def mc_cylinder_estimate(graph, state, lam, samples, seed, query, threads=1):
    """Monte-Carlo frequency of the cylinder of ``lam`` under the state's path measure.

    Path prefixes of degree 8 per color of I (joined with d(lam)) are grown
    edge by edge with kernel P(e | at v, color i) = e^(-beta r_i) y_s(e) / y_v,
    starting from r(lam); the first steps follow the color pattern of d(lam)
    so the degree-d(lam) head of the sample is literal.  Estimates are
    conditional on the start vertex: the absolute measure of the cylinder is
    y_r(lam) times the returned estimate.

    Sampling is split into fixed blocks of MC_BLOCK samples, each on its own
    (seed, block) stream; block results merge by summation, so the estimate
    does not depend on how many workers ran them.
    """
    graph._require_paths("mc_cylinder_estimate")
    if samples < 1000:
        raise ValueError("use at least 1000 samples")
    colors = state.component.colors
    if not colors:
        raise SupportError("the state gives no mass to infinite paths (I is empty)")
    comp_j = [j for j in range(1, graph.k + 1) if j not in colors]
    if any(lam.degree[j - 1] for j in comp_j):
        raise SupportError(
            "cylinder degree must vanish off the state's color set; "
            "sampled prefixes only extend in the I directions"
        )
    y = state.y
    support = set(graph.vertices[i] for i in np.flatnonzero(y > 1e-12))
    if lam.range not in support:
        raise SupportError(f"cylinder root {lam.range!r} is outside the state's support")
    at = lam.range
    for eid in lam.word:
        edge = graph.edge_by_id[eid]
        if edge.source not in support:
            raise SupportError(f"the path exits the support of y at edge {eid!r}")

    target_degree = tuple(
        max(8, lam.degree[c - 1]) if c in colors else 0 for c in range(1, graph.k + 1)
    )
    # step colors: the pattern of d(lam) first, the remainder in ascending color order
    step_colors = [c for c in sorted(colors) for _ in range(lam.degree[c - 1])]
    head_len = len(step_colors)
    for c in sorted(colors):
        step_colors.extend([c] * (target_degree[c - 1] - lam.degree[c - 1]))

    # per (vertex, color): edge list with the exact kernel probabilities
    kernel = {}
    for v in support:
        vi = graph.vindex[v]
        for c in sorted(colors):
            ids = [e for e in graph.edges_from(v, c) if graph.edge_by_id[e].source in support]
            probs = np.array(
                [
                    math.exp(-query.beta * query.r[c - 1]) * y[graph.vindex[graph.edge_by_id[e].source]]
                    for e in ids
                ]
            )
            probs = probs / y[vi]
            kernel[(v, c)] = (ids, probs / probs.sum())

    lam_word = lam.word
    cum = {key: (ids, np.cumsum(probs)) for key, (ids, probs) in kernel.items()}

    def run_block(block_index, count):
        rng = _rng(seed, 0x6D63, block_index)
        draws = rng.random((count, len(step_colors)))
        hits = 0
        for s in range(count):
            at = lam.range
            head = []
            ok = True
            for t, c in enumerate(step_colors):
                ids, cdf = cum[(at, c)]
                pick = min(int(np.searchsorted(cdf, draws[s, t], side="right")), len(ids) - 1)
                eid = ids[pick]
                if t < head_len:
                    head.append(eid)
                at = graph.edge_by_id[eid].source
                if t == head_len - 1:
                    ok = tuple(graph._normalize(head)) == lam_word
                    if not ok:
                        break
            if ok:
                hits += 1
        return hits

    blocks = [
        (index, min(MC_BLOCK, samples - index * MC_BLOCK))
        for index in range((samples + MC_BLOCK - 1) // MC_BLOCK)
    ]
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            hits = sum(pool.map(lambda b: run_block(*b), blocks))
    else:
        hits = sum(run_block(*b) for b in blocks)

    estimate = hits / samples
    stderr = math.sqrt(max(estimate * (1 - estimate), 1e-300) / samples)
    return estimate, stderr


@dataclass(frozen=True)
class CheckEntry:
    name: str
    passed: bool
    error: float
    tolerance: float
    seed: int
    note: str = ""


@dataclass(frozen=True)
class CheckReport:
    entries: tuple[CheckEntry, ...]

    @property
    def all_passed(self):
        return all(e.passed for e in self.entries)

    def to_payload(self):
        return {
            "all_passed": self.all_passed,
            "checks": [
                {
                    "name": e.name,
                    "passed": e.passed,
                    "error": e.error,
                    "tolerance": e.tolerance,
                    "seed": e.seed,
                    "note": e.note,
                }
                for e in self.entries
            ],
        }

    def render(self):
        lines = ["check                     status  error        tolerance    note"]
        for e in self.entries:
            status = "pass" if e.passed else "FAIL"
            lines.append(
                f"{e.name:<25} {status:<7} {e.error:<12.3e} {e.tolerance:<12.3e} {e.note}"
            )
        lines.append("overall: " + ("pass" if self.all_passed else "FAIL"))
        return "\n".join(lines)


def check_suite(graph, query, seed=0):
    """Cross-validate the classification at this query; failures become report rows."""
    entries = []
    desc = simplex(graph, query)
    states = desc.states
    fam = scaled_family(graph, query)

    def add(name, error, tol, note=""):
        entries.append(CheckEntry(name, bool(error <= tol), float(error), tol, seed, note))

    # invariance of y along I and decay along the complement
    err_inv, err_dec = 0.0, 0.0
    for st in states:
        sc = st.component
        for i in sorted(sc.colors):
            err_inv = max(
                err_inv,
                float(abs(graph.matrices[i - 1] @ st.y - query.weight(i) * st.y).max()),
            )
        for j in range(1, graph.k + 1):
            if j in sc.colors:
                continue
            vec = st.y.copy()
            for _ in range(200):
                vec = graph.matrices[j - 1] @ vec / query.weight(j)
            err_dec = max(err_dec, float(vec.max(initial=0.0)))
    add("eigen_invariance", err_inv, 1e-8, f"{len(states)} states")
    add("complement_decay", err_dec, 1e-6)

    # recovering the harmonic vector from the boundary mass
    err = 0.0
    for st in states:
        sc = st.component
        xt, y = kms_vector(graph, sc, query)
        x = harmonic_vector(graph, sc, query)
        err = max(err, float(abs(boundary_vector(graph, y, sc.colors, query) * xt.sum() - x).max()))
    add("boundary_recovery", err, 1e-8)

    # resolvent sum against its truncated series
    err = 0.0
    for st in states:
        sc = st.component
        phi = st.y.copy()
        comp_j = [j for j in range(1, graph.k + 1) if j not in sc.colors]
        for j in comp_j:
            phi = phi - graph.matrices[j - 1] @ phi / query.weight(j)
        # accumulate the multi-geometric series by nested single-color sweeps
        acc = phi.copy()
        for j in comp_j:
            sweep = np.zeros_like(acc)
            vec = acc.copy()
            for _ in range(201):
                sweep += vec
                vec = graph.matrices[j - 1] @ vec / query.weight(j)
            acc = sweep
        err = max(err, float(abs(acc - st.y).max()))
    add("neumann_truncation", err, 1e-6)

    # round-trip decomposition of random mixtures
    err = 0.0
    if states:
        rng = _rng(seed, 0x6D6978)
        for trial in range(5):
            w = rng.random(len(states))
            w = w / w.sum()
            psi = desc.mixture_vector(w)
            got = decompose_kms(graph, psi, query)
            recon = {sc.key(): t for sc, t in got}
            for weight, st in zip(w, states):
                err = max(err, abs(recon.pop(st.component.key(), 0.0) - weight))
            for leftover in recon.values():
                err = max(err, leftover)
    add("roundtrip_decomposition", err, 1e-8, "5 mixtures")

    # the 2^k split does not depend on the processing order
    err = 0.0
    if states:
        rng = _rng(seed, 0x6F726465)
        w = rng.random(len(states))
        w = w / w.sum()
        psi = desc.mixture_vector(w)
        reference = decompose_subinvariant(fam, psi)
        for order in itertools.permutations(range(1, graph.k + 1)):
            other = decompose_subinvariant(fam, psi, order=order)
            for key in reference:
                err = max(err, float(abs(reference[key] - other[key]).max(initial=0.0)))
    add("order_permutation", err, 1e-8)

    # algebra relation on generators, and a sampling spot check (need squares)
    if not graph.matrices_only:
        err = 0.0
        degree_cap = tuple(1 for _ in range(graph.k))
        paths = []
        for v in graph.vertices:
            for deg in itertools.product(*(range(x + 1) for x in degree_cap)):
                paths.extend(graph.enumerate_paths(v, deg))
        evaluables = [st for st in states] + [
            st.with_character(tuple(0.7 * (t + 1) for t in range(st.per.rank)))
            for st in states
            if st.per is not None and st.per.rank > 0
        ]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for st in evaluables:
                for lam, mu in itertools.product(paths, paths):
                    if lam.source != mu.source:
                        continue
                    lhs = state_eval(graph, st, lam, mu, query)
                    rhs = 0j
                    for kappa, eta in graph.lambda_min(mu, lam):
                        rhs += state_eval(graph, st, kappa, eta, query)
                    rhs *= math.exp(
                        -query.beta * sum(r * d for r, d in zip(query.r, lam.degree))
                    )
                    err = max(err, abs(lhs - rhs))
        add("tck_consistency", err, 1e-9, f"{len(evaluables)} states")

        spot = next((st for st in states if st.component.colors), None)
        if spot is not None:
            v = spot.component.component[0]
            i = sorted(spot.component.colors)[0]
            edges = graph.edges_from(v, i)
            if edges:
                lam = graph.path_from_edges([edges[0]])
                est, se = mc_cylinder_estimate(graph, spot, lam, 20_000, seed, query)
                exact = (
                    math.exp(-query.beta * query.r[i - 1])
                    * spot.y[graph.vindex[lam.source]]
                    / spot.y[graph.vindex[lam.range]]
                )
                deviation = abs(est - exact) / se if se > 0 else 0.0
                entries.append(
                    CheckEntry(
                        "mc_spot", bool(deviation <= 3.0), float(deviation), 3.0, seed,
                        "standard errors",
                    )
                )
    return CheckReport(tuple(entries))
