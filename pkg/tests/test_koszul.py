import pytest

from torinv.intlin import AbelianGroupStructure, IntMatrix
from torinv.glattice import (
    InvalidSpec,
    LatticeMorphism,
    ShortExactSequenceZ,
    builtin_group,
    quotient_lattice,
    regular_lattice,
    trivial_lattice,
)
from torinv.koszul import (
    build_koszul,
    complex_homology,
    verify_koszul_quasi_iso,
)


def norm_one_sequence(name):
    """0 -> Z --norm--> Z[G] --> Z[G]/(norm) -> 0."""
    g = builtin_group(name)
    reg = regular_lattice(g)
    triv = trivial_lattice(g, 1)
    norm = LatticeMorphism(triv, reg, IntMatrix.from_rows([[1]] * len(g)))
    section = IntMatrix.from_triples(len(g), len(g) - 1,
                                     [(i, i, 1) for i in range(len(g) - 1)])
    quot, proj = quotient_lattice(norm, section=section)
    return ShortExactSequenceZ(norm, proj)


def test_weight_zero():
    ses = norm_one_sequence("C2")
    cx = build_koszul(ses, 0)
    assert cx.top_degree == 0
    assert cx.lattices[0].rank == 1
    assert complex_homology(cx, 0) == AbelianGroupStructure(1, ())
    assert verify_koszul_quasi_iso(ses, 0).ok


def test_weight_one_is_alpha():
    ses = norm_one_sequence("C2")
    cx = build_koszul(ses, 1)
    assert cx.top_degree == 1
    assert cx.boundary(1).matrix == ses.left.matrix


def test_c2_weight_two_boundary():
    # boundary image in basis {e^2, e sigma, sigma^2} is (1,1,0) and (0,1,1)
    ses = norm_one_sequence("C2")
    cx = build_koszul(ses, 2)
    assert [l.rank for l in cx.lattices] == [3, 2, 0]
    assert cx.boundary(1).matrix == IntMatrix.from_rows([[1, 0], [1, 1], [0, 1]])
    assert complex_homology(cx, 0) == AbelianGroupStructure(1, ())
    assert complex_homology(cx, 1).is_trivial
    v = verify_koszul_quasi_iso(ses, 2)
    assert v.ok
    assert v.h0 == AbelianGroupStructure(1, ())


def test_c3_weights():
    ses = norm_one_sequence("C3")
    for q in range(4):
        v = verify_koszul_quasi_iso(ses, q)
        assert v.ok, (q, v)
        # H_0 has the rank of S^q of the rank-2 quotient: q+1
        assert v.h0 == AbelianGroupStructure(q + 1, ())


def test_s3_weight_two():
    ses = norm_one_sequence("S3")
    v = verify_koszul_quasi_iso(ses, 2)
    assert v.ok
    assert v.h0 == AbelianGroupStructure(15, ())  # rank S^2(Z^5)


def test_bad_complex_rejected():
    ses = norm_one_sequence("C2")
    cx = build_koszul(ses, 2)
    from torinv.koszul import ChainComplexZ
    bad = LatticeMorphism(cx.lattices[1], cx.lattices[0],
                          IntMatrix.from_rows([[1, 0], [0, 1], [0, 0]]))
    with pytest.raises(InvalidSpec):
        ChainComplexZ(cx.lattices, {1: bad})
