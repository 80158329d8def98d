import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mqsense import oracle
from mqsense.basis import (
    SX,
    SY,
    SZ,
    SymOperator,
    anticommutator_superop,
    basis_size,
    collective,
    commutator_superop,
    enumerate_basis,
    hs_inner,
    identity,
    label_norm,
    left_mult_superop,
    local_sum,
    multiply,
    right_mult_superop,
    structure_constants,
)
from mqsense.errors import BasisMismatchError, LabelError, SizeError


@pytest.mark.parametrize("n", [1, 2, 3, 7, 20, 40])
def test_dimension_formula(n):
    assert enumerate_basis(n).dim == basis_size(n) == (n + 1) * (n + 2) * (n + 3) // 6


def test_labels_are_contiguous_per_block():
    b = enumerate_basis(5)
    for m in range(6):
        for n in range(6):
            lab = b.labels[b.block(m, n)]
            assert np.all(lab[:, 0] == m) and np.all(lab[:, 1] == n)
            assert np.all(np.diff(lab[:, 2]) == 2)


def test_norm_gives_unit_hs_norm():
    b = enumerate_basis(4)
    for i in range(b.dim):
        e = np.zeros(b.dim, dtype=complex)
        e[i] = 1
        m = oracle.embed(SymOperator(b, e))
        assert np.isclose(np.sum(np.abs(m) ** 2), 1.0)


def test_label_norm_known_value():
    # N=2, one sigma+ and one |0><0|: two strings, norm sqrt(2)
    assert np.isclose(label_norm(2, 2, 1, 1), np.sqrt(2))


def test_size_and_label_errors():
    with pytest.raises(SizeError):
        enumerate_basis(0)
    b = enumerate_basis(3)
    with pytest.raises(LabelError):
        b.label_index((1, 1, 1))  # parity mismatch
    with pytest.raises(LabelError):
        b.label_index((4, 0, 4))


def test_structure_constants_two_spins():
    b = enumerate_basis(2)
    chi = structure_constants((1, 0, 1), (0, 1, 1), b)
    assert chi.keys() == {0, 2}
    assert np.allclose(list(chi.values()), [1 / np.sqrt(2)] * 2)
    assert structure_constants((1, 0, 1), (1, 0, 1), b) == {}


def test_multiply_basis_mismatch():
    with pytest.raises(BasisMismatchError):
        multiply(identity(enumerate_basis(2)), identity(enumerate_basis(3)))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_multiply_matches_dense(n, small_op):
    a, c = small_op(n), small_op(n)
    assert np.allclose(oracle.embed(a @ c), oracle.embed(a) @ oracle.embed(c), atol=1e-12)


@pytest.mark.parametrize("n", [3, 5])
def test_associativity(n, small_op):
    a, b_, c = small_op(n), small_op(n), small_op(n)
    lhs = multiply(multiply(a, b_), c).coeffs
    rhs = multiply(a, multiply(b_, c)).coeffs
    assert np.allclose(lhs, rhs, atol=1e-10 * np.abs(lhs).max())


def test_dagger_and_trace(small_op):
    a = small_op(4)
    dense = oracle.embed(a)
    assert np.allclose(oracle.embed(a.dag()), dense.conj().T)
    assert np.isclose(a.trace(), np.trace(dense))
    assert np.isclose(hs_inner(a, a), np.sum(np.abs(dense) ** 2))


def test_identity_and_collective():
    b = enumerate_basis(4)
    assert np.allclose(oracle.embed(identity(b)), np.eye(16))
    for axis in "xyz+-":
        assert np.allclose(oracle.embed(collective(b, axis)), oracle.collective_op(4, axis))


def test_local_sum_two_body():
    b = enumerate_basis(3)
    op = local_sum(b, [SY, SZ])
    ref = sum(oracle.site_op(SY, i, 3) @ oracle.site_op(SZ, j, 3)
              for i, j in itertools.permutations(range(3), 2))
    assert np.allclose(oracle.embed(op), ref)


def test_superoperators(small_op):
    a, x = small_op(3, hermitian=True), small_op(3)
    da, dx = oracle.embed(a), oracle.embed(x)
    assert np.allclose(oracle.embed(left_mult_superop(a).apply(x)), da @ dx)
    assert np.allclose(oracle.embed(right_mult_superop(a).apply(x)), dx @ da)
    assert np.allclose(oracle.embed(commutator_superop(a).apply(x)), da @ dx - dx @ da)
    assert np.allclose(oracle.embed(anticommutator_superop(a).apply(x)), da @ dx + dx @ da)
    c = commutator_superop(a).toarray()
    assert np.allclose(c, c.conj().T)  # Hermitian, since a is


def test_superoperator_storage_choice():
    b = enumerate_basis(10)
    assert commutator_superop(collective(b, "x")).is_sparse


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 4), seed=st.integers(0, 2 ** 32 - 1))
def test_product_of_hermitians_is_consistent(n, seed):
    rng = np.random.default_rng(seed)
    b = enumerate_basis(n)
    a = SymOperator(b, rng.normal(size=b.dim) + 1j * rng.normal(size=b.dim))
    a = (a + a.dag()) * 0.5
    sq = a @ a
    assert sq.is_hermitian(atol=1e-10)
    assert sq.trace().real >= -1e-10
    assert np.isclose(sq.trace().real, a.norm() ** 2)
