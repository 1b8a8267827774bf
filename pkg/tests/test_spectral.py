import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphkms import (
    DimensionError,
    MatrixFamily,
    NotSubinvariantError,
    Query,
    SpectralRadiusError,
    decompose_subinvariant,
    is_subinvariant,
    neumann_sum,
    parse_graph,
    riesz_split,
    scaled_family,
    spectral_radius,
)
from graphkms.spectral import exact_rational_eigenvalue
from conftest import ex2_doc


class TestSpectralRadius:
    def test_ex1_blocks(self, ex1):
        idx = {v: i for i, v in enumerate(ex1.vertices)}
        w = idx["w"]
        assert spectral_radius(ex1.matrices[0][[w]][:, [w]]) == 5.0

    def test_antidiagonal(self):
        assert spectral_radius(np.array([[0, 2], [8, 0]])) == pytest.approx(4.0, abs=1e-10)

    def test_zero_and_empty(self):
        assert spectral_radius(np.zeros((3, 3))) == 0.0
        assert spectral_radius(np.zeros((0, 0))) == 0.0


class TestQuery:
    def test_weights(self):
        q = Query(2.0, (math.log(3), 0.5))
        assert q.weight(1) == pytest.approx(9.0)
        assert q.weights() == (q.weight(1), q.weight(2))

    def test_beta_zero_is_tracial(self):
        q = Query(0.0, (5.0, -7.0))
        assert q.weights() == (1.0, 1.0)

    def test_finite_required(self):
        with pytest.raises(ValueError):
            Query(float("nan"), (1.0,))


class TestMatrixFamily:
    def test_commutation_enforced(self):
        a = np.array([[0.0, 1.0], [0.0, 0.0]])
        b = np.array([[0.0, 0.0], [1.0, 0.0]])
        with pytest.raises(ValueError, match="commute"):
            MatrixFamily((a, b))

    def test_scaled_family_restriction(self, ex1, ex1_query):
        fam = scaled_family(ex1, ex1_query, subset=("u", "w"), colors=[2])
        assert fam.size == 2
        assert fam.matrices[0][1, 1] == pytest.approx(1.0)  # A_2(w,w)/4


class TestSubinvariance:
    def test_simple_pass(self):
        fam = MatrixFamily((np.array([[0.5]]), np.array([[1.0]])))
        assert is_subinvariant(fam, np.array([1.0]))

    def test_fail_with_witness(self):
        fam = MatrixFamily((np.array([[2.0]]),))
        res = is_subinvariant(fam, np.array([1.0]))
        assert not res
        assert res.witness_set == frozenset({1})
        assert res.witness_value == pytest.approx(-1.0)

    def test_dimension_error(self):
        fam = MatrixFamily((np.array([[1.0]]),))
        with pytest.raises(DimensionError):
            is_subinvariant(fam, np.array([1.0, 2.0]))


class TestRieszSplit:
    def test_zero_matrix(self):
        inv, rest = riesz_split(np.array([[0.0]]), np.array([1.0]))
        assert inv == pytest.approx([0.0]) and rest == pytest.approx([1.0])

    def test_invariant_vector(self):
        inv, rest = riesz_split(np.array([[1.0]]), np.array([1.0]))
        assert inv == pytest.approx([1.0]) and rest == pytest.approx([0.0])

    def test_limit_against_iteration_oracle(self):
        b = np.array([[0.5, 0.5], [0.0, 1.0]])
        psi = np.array([2.0, 1.0])
        expected = psi.copy()
        for _ in range(200):
            expected = b @ expected
        inv, rest = riesz_split(b, psi)
        assert np.allclose(inv, expected, atol=1e-10)
        assert np.allclose(inv, [1.0, 1.0], atol=1e-10)
        assert np.allclose(rest, [1.0, 0.0], atol=1e-10)
        assert np.allclose(inv + rest, psi)
        assert np.allclose(b @ inv, inv, atol=1e-9)

    def test_remainder_has_no_invariant_part(self):
        b = np.array([[0.5, 0.5], [0.0, 1.0]])
        _, rest = riesz_split(b, np.array([2.0, 1.0]))
        inv2, _ = riesz_split(b, rest)
        assert inv2.max() < 1e-8

    def test_precondition(self):
        with pytest.raises(NotSubinvariantError):
            riesz_split(np.array([[2.0]]), np.array([1.0]))


class TestDecomposeSubinvariant:
    def test_two_matrices(self):
        fam = MatrixFamily((np.array([[0.5]]), np.array([[1.0]])))
        pieces = decompose_subinvariant(fam, np.array([1.0]))
        assert pieces[frozenset({2})] == pytest.approx([1.0])
        for key in (frozenset(), frozenset({1}), frozenset({1, 2})):
            assert pieces[key] == pytest.approx([0.0])

    def test_extreme_vector_is_pure(self, ex1, ex1_query):
        from graphkms import find_subharmonic, kms_vector

        sc = [s for s in find_subharmonic(ex1, ex1_query) if s.colors == {1, 2}][0]
        _, y = kms_vector(ex1, sc, ex1_query)
        fam = scaled_family(ex1, ex1_query)
        pieces = decompose_subinvariant(fam, y)
        assert np.allclose(pieces[frozenset({1, 2})], y, atol=1e-9)
        for key, vec in pieces.items():
            if key != frozenset({1, 2}):
                assert vec.max(initial=0.0) < 1e-9

    def test_order_independence(self, ex1, ex1_query):
        fam = scaled_family(ex1, ex1_query)
        psi = np.array([0.5, 0.3, 0.2])
        assert is_subinvariant(fam, psi)
        base = decompose_subinvariant(fam, psi)
        for order in [(2, 1), (1, 2)]:
            other = decompose_subinvariant(fam, psi, order=order)
            for key in base:
                assert np.allclose(base[key], other[key], atol=1e-8)

    def test_sum_restores_input(self, ex1, ex1_query):
        fam = scaled_family(ex1, ex1_query)
        psi = np.array([0.5, 0.3, 0.2])
        pieces = decompose_subinvariant(fam, psi)
        assert np.allclose(sum(pieces.values()), psi, atol=1e-9)

    def test_rejects_bad_vector(self, ex1, ex1_query):
        fam = scaled_family(ex1, ex1_query)
        with pytest.raises(NotSubinvariantError):
            decompose_subinvariant(fam, np.array([0.0, 0.0, 1.0]))


class TestNeumann:
    def test_empty_family(self):
        fam = MatrixFamily(())
        # empty product acts as the identity
        assert neumann_sum(fam, np.array([])).size == 0

    def test_geometric_series(self):
        fam = MatrixFamily((np.array([[0.5]]),))
        assert neumann_sum(fam, np.array([1.0])) == pytest.approx([2.0])

    def test_critical_rejected(self):
        graph = parse_graph(ex2_doc(2, 1, 4, squares=False))
        q = Query(1.0, (math.log(2), math.log(4)))
        fam = scaled_family(graph, q, colors=[1])  # exactly critical coordinate
        with pytest.raises(SpectralRadiusError):
            neumann_sum(fam, np.array([1.0, 1.0]))

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=10**6))
    def test_matches_truncated_series(self, seed):
        rng = np.random.default_rng(seed)
        size = int(rng.integers(1, 5))
        mat = rng.random((size, size))
        mat *= 0.9 / max(spectral_radius(mat), 1e-9)
        psi = rng.random(size)
        fam = MatrixFamily((mat,))
        direct = neumann_sum(fam, psi)
        partial = np.zeros(size)
        term = psi.copy()
        for _ in range(201):
            partial += term
            term = mat @ term
        assert abs(direct - partial).max() < 1e-6


class TestExactEigenvalue:
    def test_diagonal_entry(self):
        assert exact_rational_eigenvalue(np.array([[4]]), 4.0) == Fraction(4)

    def test_antidiagonal_rational_root(self):
        assert exact_rational_eigenvalue(np.array([[0, 2], [8, 0]]), 4.0) == Fraction(4)

    def test_irrational_root(self):
        assert exact_rational_eigenvalue(np.array([[0, 1], [2, 0]]), math.sqrt(2)) is None
