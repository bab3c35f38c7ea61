import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ttg.errors import UsageError
from ttg.linalg import Matrix, kernel_basis, kron, rank, rref, solve


def all_vectors(n, p):
    return [np.array(v) for v in itertools.product(range(p), repeat=n)]


def test_rref_zero_matrix():
    red, pivots = rref(Matrix.zeros(2, 2, 2))
    assert red == Matrix.zeros(2, 2, 2)
    assert pivots == []


def test_rref_identity():
    red, pivots = rref(Matrix.identity(3, 3))
    assert red == Matrix.identity(3, 3)
    assert pivots == [0, 1, 2]


def test_rref_all_ones_f2():
    # by hand: subtract row 0 from row 1
    red, pivots = rref(Matrix([[1, 1], [1, 1]], 2))
    assert red == Matrix([[1, 1], [0, 0]], 2)
    assert pivots == [0]
    assert rank(Matrix([[1, 1], [1, 1]], 2)) == 1


def test_kernel_identity_and_zero():
    assert kernel_basis(Matrix.identity(3, 2)) == []
    assert len(kernel_basis(Matrix.zeros(2, 3, 2))) == 3


def test_kernel_row_of_ones_by_enumeration():
    m = Matrix([[1, 1]], 2)
    kernel = [tuple(v) for v in all_vectors(2, 2) if not np.any((m.data @ v) % 2)]
    assert kernel == [(0, 0), (1, 1)]
    basis = kernel_basis(m)
    assert [tuple(v) for v in basis] == [(1, 1)]


def test_solve_identity_and_zero():
    x = solve(Matrix.identity(2, 5), [3, 4])
    assert x.tolist() == [3, 4]
    assert solve(Matrix.zeros(2, 2, 2), [1, 0]) is None


def test_solve_upper_triangular_by_search():
    m = Matrix([[1, 1], [0, 1]], 2)
    b = np.array([0, 1])
    found = [tuple(v) for v in all_vectors(2, 2) if np.array_equal((m.data @ v) % 2, b)]
    assert found == [(1, 1)]
    assert tuple(solve(m, b)) == (1, 1)


def test_solve_dimension_mismatch():
    with pytest.raises(UsageError):
        solve(Matrix.identity(2, 2), [1, 0, 1])


def test_kron_triple_loop_oracle():
    a = Matrix([[1, 1]], 2)
    b = Matrix([[1], [1]], 2)
    out = kron(a, b)
    oracle = np.zeros((a.rows * b.rows, a.cols * b.cols), dtype=int)
    for i, j, k, l in itertools.product(range(a.rows), range(a.cols), range(b.rows), range(b.cols)):
        oracle[i * b.rows + k, j * b.cols + l] = a.data[i, j] * b.data[k, l] % 2
    assert out.tolist() == oracle.tolist() == [[1, 1], [1, 1]]


def test_kron_identities_and_zero():
    assert kron(Matrix.identity(2, 3), Matrix.identity(3, 3)) == Matrix.identity(6, 3)
    assert kron(Matrix([[1, 2]], 3), Matrix.zeros(2, 2, 3)) == Matrix.zeros(2, 4, 3)


def test_kron_characteristic_mismatch():
    with pytest.raises(UsageError):
        kron(Matrix.identity(1, 2), Matrix.identity(1, 3))


def test_matrix_is_immutable():
    m = Matrix.identity(2, 2)
    with pytest.raises((AttributeError, ValueError)):
        m.data[0, 0] = 0


primes = st.sampled_from([2, 3, 5, 7])


@st.composite
def matrices(draw, max_dim=5):
    p = draw(primes)
    r = draw(st.integers(0, max_dim))
    c = draw(st.integers(1, max_dim))
    entries = draw(st.lists(st.integers(0, p - 1), min_size=r * c, max_size=r * c))
    return Matrix(np.array(entries, dtype=np.int64).reshape(r, c), p)


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_rank_nullity(m):
    kernel = kernel_basis(m)
    assert rank(m) + len(kernel) == m.cols
    for v in kernel:
        assert not np.any((m.data @ v) % m.p)


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_rref_idempotent_and_row_equivalent(m):
    red, pivots = rref(m)
    again, pivots2 = rref(red)
    assert again == red and pivots == pivots2
    assert pivots == sorted(set(pivots))
    # row equivalence: same row space, so same kernel
    for v in kernel_basis(m):
        assert not np.any((red.data @ v) % m.p)
    assert rank(red) == rank(m)


@settings(max_examples=40, deadline=None)
@given(matrices(max_dim=3), st.data())
def test_solve_returns_solution_when_consistent(m, data):
    x0 = np.array(data.draw(st.lists(st.integers(0, m.p - 1), min_size=m.cols, max_size=m.cols)))
    b = (m.data @ x0) % m.p
    x = solve(m, b)
    assert x is not None
    assert np.array_equal((m.data @ x) % m.p, b)


@settings(max_examples=30, deadline=None)
@given(matrices(max_dim=2), matrices(max_dim=2), matrices(max_dim=2))
def test_kron_associative(a, b, c):
    b = Matrix(b.data, a.p)
    c = Matrix(c.data, a.p)
    assert kron(kron(a, b), c) == kron(a, kron(b, c))
    assert kron(Matrix.identity(1, a.p), a) == a
