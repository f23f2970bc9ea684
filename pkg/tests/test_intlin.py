import random

import pytest

from torinv.intlin import (
    AbelianGroupStructure,
    IntMatrix,
    cokernel_structure,
    det,
    format_matrix,
    hermite_decompose,
    homology_structure,
    in_column_span,
    invariant_factors,
    kernel_basis,
    matrix_rank,
    parse_matrix,
    smith_decompose,
    solve_columns,
    unimodular_inverse,
)


def M(rows):
    return IntMatrix.from_rows(rows)


def test_dense_sparse_equality():
    a = M([[0, 2], [3, 0]])
    b = IntMatrix.from_triples(2, 2, [(0, 1, 2), (1, 0, 3)])
    assert a == b
    assert b == a
    assert a != M([[0, 2], [3, 1]])
    assert IntMatrix.zeros(2, 2) == M([[0, 0], [0, 0]])


def test_sparse_stores_no_zeros():
    b = IntMatrix.from_triples(2, 2, [(0, 0, 5), (0, 0, -5)])
    assert b.nnz == 0


def test_out_of_range_triple_rejected():
    with pytest.raises(ValueError):
        IntMatrix.from_triples(2, 2, [(2, 0, 1)])


def test_matmul_and_arith():
    a = M([[1, 2], [3, 4]])
    b = M([[0, 1], [1, 0]])
    assert a @ b == M([[2, 1], [4, 3]])
    assert (a @ b.sparsified()) == M([[2, 1], [4, 3]])
    assert a - a == IntMatrix.zeros(2, 2)
    assert 2 * a == M([[2, 4], [6, 8]])
    # degenerate shapes
    z = IntMatrix.zeros(0, 3)
    assert (z @ IntMatrix.zeros(3, 2)).rows == 0
    assert (M([[1], [2]]) @ IntMatrix.zeros(1, 0)).cols == 0


def test_smith_identity():
    dec = smith_decompose(IntMatrix.identity(2).densified())
    assert dec.diagonal == (1, 1)


def test_smith_2468():
    # determinantal-divisor oracle: d1 = gcd of entries = 2,
    # d1*d2 = gcd of 2x2 minors = |det| = 8, so S = diag(2, 4)
    a = M([[2, 4], [6, 8]])
    dec = smith_decompose(a)
    assert dec.diagonal == (2, 4)
    assert dec.U @ a @ dec.V == dec.S
    assert det(dec.U) in (1, -1)
    assert det(dec.V) in (1, -1)


def test_smith_zero_1x1():
    dec = smith_decompose(M([[0]]))
    assert dec.S == M([[0]])


def test_smith_empty():
    dec = smith_decompose(IntMatrix.zeros(0, 3))
    assert dec.S.rows == 0 and dec.S.cols == 3
    dec = smith_decompose(IntMatrix.zeros(3, 0))
    assert dec.S.rows == 3 and dec.S.cols == 0


def test_kernel_examples():
    # [[1, 0]] -> (0, 1)
    k = kernel_basis(M([[1, 0]]))
    assert k.cols == 1
    assert [k.entry(0, 0), k.entry(1, 0)] in ([0, 1], [0, -1])
    # [[2, -2]] -> (1, 1), by exhaustive small solve the kernel is Z*(1,1)
    k = kernel_basis(M([[2, -2]]))
    assert k.cols == 1
    col = [k.entry(0, 0), k.entry(1, 0)]
    assert col in ([1, 1], [-1, -1])
    # identity -> empty
    assert kernel_basis(IntMatrix.identity(4)).cols == 0


def test_kernel_is_saturated():
    a = M([[2, 4, 6], [0, 2, 2]])
    k = kernel_basis(a)
    assert (a @ k).is_zero()
    assert all(d == 1 for d in invariant_factors(k))
    assert k.cols == 3 - matrix_rank(a)


def test_cokernel_examples():
    assert cokernel_structure(IntMatrix.diagonal(2, 2, [1, 1])) == AbelianGroupStructure(0, ())
    assert cokernel_structure(M([[2]])) == AbelianGroupStructure(0, (2,))
    assert cokernel_structure(M([[2, 4], [6, 8]])) == AbelianGroupStructure(0, (2, 4))


def test_cokernel_free_part():
    # Z^3 / span((1,1,0)) = Z^2
    a = M([[1], [1], [0]])
    assert cokernel_structure(a) == AbelianGroupStructure(2, ())


def test_structure_canonical():
    s = AbelianGroupStructure.from_diagonal(1, [6, 4])
    # diag(6,4) rebalances to the chain 2 | 12
    assert s == AbelianGroupStructure(1, (2, 12))
    with pytest.raises(ValueError):
        AbelianGroupStructure(0, (4, 6))
    with pytest.raises(ValueError):
        AbelianGroupStructure(0, (1,))
    assert str(AbelianGroupStructure(0, ())) == "0"
    assert str(AbelianGroupStructure(1, (2,))) == "Z (+) Z/2"
    assert AbelianGroupStructure(0, (3,)).odd_part() == AbelianGroupStructure(0, (3,))
    assert AbelianGroupStructure(0, (2, 6)).odd_part() == AbelianGroupStructure(0, (3,))
    assert AbelianGroupStructure(0, (2,)).power(3) == AbelianGroupStructure(0, (2, 2, 2))


def test_hermite():
    a = M([[4, 2, 1], [6, 2, 0]])
    h, v = hermite_decompose(a)
    assert a @ v == h
    assert det(v) in (1, -1)
    # echelon shape: pivot rows strictly increase, pivots positive
    pivots = []
    for j in range(h.cols):
        col = [h.entry(i, j) for i in range(h.rows)]
        nz = [i for i, x in enumerate(col) if x]
        if nz:
            pivots.append(nz[0])
            assert col[nz[0]] > 0
    assert pivots == sorted(pivots)


def test_solve_and_span():
    a = M([[2, 0], [0, 3]])
    b = M([[4], [3]])
    x = solve_columns(a, b)
    assert a @ x == b
    assert not in_column_span(a, M([[1], [0]]))
    assert in_column_span(M([[2, 3]]), M([[1]]))  # gcd(2,3) = 1


def test_homology_structure():
    # Z --x2--> Z in degrees 1 -> 0: H_0 = Z/2, H_1 = 0
    d1 = M([[2]])
    assert homology_structure(None, d1) == AbelianGroupStructure(0, (2,))
    assert homology_structure(d1, None) == AbelianGroupStructure(0, ())


def test_unimodular_inverse():
    u = M([[1, 2], [0, 1]])
    assert unimodular_inverse(u) @ u == IntMatrix.identity(2)


def test_text_format_roundtrip():
    a = M([[1, 0, -3], [0, 0, 7]])
    assert parse_matrix(format_matrix(a, sparse=False)) == a
    assert parse_matrix(format_matrix(a, sparse=True)) == a
    with pytest.raises(ValueError):
        parse_matrix("2 2\nsparse\n0 0 0\n")
    with pytest.raises(ValueError):
        parse_matrix("1 1\ndense\n1 2\n")


def _random_matrix(rng, m, n, bound=10):
    return IntMatrix.from_rows(
        [[rng.randint(-bound, bound) for _ in range(n)] for _ in range(m)]
    )


def test_random_smith_properties():
    rng = random.Random(20240811)
    for _ in range(40):
        m = rng.randint(1, 8)
        n = rng.randint(1, 8)
        a = _random_matrix(rng, m, n)
        dec = smith_decompose(a)
        assert dec.U @ a @ dec.V == dec.S
        assert det(dec.U) in (1, -1)
        assert det(dec.V) in (1, -1)
        d = [x for x in dec.diagonal if x]
        assert all(d[i + 1] % d[i] == 0 for i in range(len(d) - 1))
        assert all(x >= 0 for x in dec.diagonal)
        # invariant factors agree with the sparse no-transform engine
        assert list(d) == invariant_factors(a)


def test_random_kernel_properties():
    rng = random.Random(77)
    for _ in range(40):
        m = rng.randint(1, 7)
        n = rng.randint(1, 7)
        a = _random_matrix(rng, m, n, bound=6)
        k = kernel_basis(a)
        assert (a @ k).is_zero()
        assert k.cols == n - matrix_rank(a)
        if k.cols:
            assert all(d == 1 for d in invariant_factors(k))


def test_cokernel_unimodular_invariance():
    rng = random.Random(5)
    a = _random_matrix(rng, 4, 3)
    base = cokernel_structure(a)
    u = M([[1, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 5], [0, 0, 0, 1]])
    v = M([[1, 0, 0], [-2, 1, 0], [0, 3, 1]])
    assert cokernel_structure(u @ a) == base
    assert cokernel_structure(a @ v) == base


def test_determinism():
    rng = random.Random(9)
    a = _random_matrix(rng, 6, 6)
    d1 = smith_decompose(a)
    d2 = smith_decompose(a)
    assert d1.U == d2.U and d1.V == d2.V and d1.S == d2.S
