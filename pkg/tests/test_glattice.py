import pytest

from torinv.intlin import IntMatrix, cokernel_structure, invariant_factors
from torinv.glattice import (
    ClosureCapExceeded,
    LatticeMorphism,
    NotInvertible,
    NotSaturated,
    RankOverflow,
    ShortExactSequenceZ,
    build_group,
    builtin_group,
    cosets,
    direct_sum,
    dual_lattice,
    enumerate_subgroups,
    explicit_lattice,
    invariants_sublattice,
    is_permutation_matrix,
    perm_lattice,
    quotient_lattice,
    regular_lattice,
    restrict_lattice,
    subgroup_group,
    sym2_into_tensor,
    sym_power,
    sym_power_morphism,
    tensor_lattice,
    tensor_onto_sym2,
    trivial_lattice,
    verify_equivariant_map,
    wedge_power,
)


def test_build_group_c2():
    g = build_group([(1, 0)])
    assert len(g) == 2
    assert g.inv[1] == 1


def test_build_group_trivial():
    g = build_group([])
    assert len(g) == 1


def test_build_group_q8():
    q8 = builtin_group("Q8")
    assert len(q8) == 8
    assert not q8.is_abelian()
    # exactly one element of order 2 (the center's nontrivial element)
    assert sum(1 for i in range(8) if q8.element_order(i) == 2) == 1
    # i^2 = j^2 (= -1)
    i, j = q8.generator_indices
    assert q8.mul[i][i] == q8.mul[j][j]


def test_closure_cap():
    with pytest.raises(ClosureCapExceeded):
        build_group([tuple((x + 1) % 9 for x in range(9))], cap=5)


def test_matrix_generator_not_invertible():
    with pytest.raises(NotInvertible):
        build_group([IntMatrix.from_rows([[2, 0], [0, 1]])])


def test_subgroups_counts():
    assert len(enumerate_subgroups(builtin_group("C2"))) == 2
    assert len(enumerate_subgroups(builtin_group("Q8"))) == 6
    assert len(enumerate_subgroups(builtin_group("S3"))) == 6
    subs = enumerate_subgroups(builtin_group("Q8"))
    assert sorted(len(s) for s in subs) == [1, 2, 4, 4, 4, 8]


def test_subgroup_group_roundtrip():
    s3 = builtin_group("S3")
    subs = enumerate_subgroups(s3)
    c3 = next(s for s in subs if len(s) == 3)
    h, embed = subgroup_group(s3, c3)
    assert len(h) == 3
    assert h.is_cyclic()
    assert set(embed) == set(c3)


def test_trivial_and_perm():
    c2 = builtin_group("C2")
    t = trivial_lattice(c2, 3)
    assert t.rank == 3
    reg = regular_lattice(c2)
    assert reg.rank == 2
    assert all(is_permutation_matrix(m) for m in reg.action)
    q8 = builtin_group("Q8")
    center = next(s for s in enumerate_subgroups(q8) if len(s) == 2)
    p = perm_lattice(q8, center)
    assert p.rank == 4


def test_cosets_ordering():
    q8 = builtin_group("Q8")
    center = next(s for s in enumerate_subgroups(q8) if len(s) == 2)
    cs = cosets(q8, center)
    assert [c[0] for c in cs] == sorted(c[0] for c in cs)


def test_dual_double_dual():
    c2 = builtin_group("C2")
    reg = regular_lattice(c2)
    dd = dual_lattice(dual_lattice(reg))
    assert dd.action == reg.action
    # dual of a permutation lattice is the same permutation lattice
    assert dual_lattice(reg).action == reg.action


def test_sign_lattice_via_explicit():
    c2 = builtin_group("C2")
    sign = explicit_lattice(c2, [[[-1]]])
    assert sign.rank == 1
    assert sign.action[1] == IntMatrix.from_rows([[-1]])
    assert dual_lattice(sign).action == sign.action


def test_tensor_and_sum_ranks():
    c2 = builtin_group("C2")
    reg = regular_lattice(c2)
    t = tensor_lattice(reg, reg)
    assert t.rank == 4
    s = direct_sum(reg, trivial_lattice(c2, 1))
    assert s.rank == 3


def test_sym_wedge_basics():
    c2 = builtin_group("C2")
    reg = regular_lattice(c2)
    assert sym_power(reg, 0).rank == 1
    assert sym_power(reg, 2).rank == 3
    assert wedge_power(reg, 2).rank == 1
    assert wedge_power(reg, 3).rank == 0
    # sym(L,1) and wedge(L,1) both recover L
    assert sym_power(reg, 1).action == reg.action
    assert wedge_power(reg, 1).action == reg.action


def test_sym_rank_formula():
    q8 = builtin_group("Q8")
    reg = regular_lattice(q8)
    assert sym_power(reg, 2).rank == 36  # 8*9/2
    assert sym_power(reg, 3).rank == 120  # C(10,3)
    assert wedge_power(reg, 2).rank == 28


def test_rank_overflow():
    q8 = builtin_group("Q8")
    with pytest.raises(RankOverflow):
        sym_power(regular_lattice(q8), 3, max_rank=100)


def test_wedge_sign():
    # swap on Z^2: e0 wedge e1 -> e1 wedge e0 = -(e0 wedge e1)
    c2 = builtin_group("C2")
    reg = regular_lattice(c2)
    w = wedge_power(reg, 2)
    assert w.action[1] == IntMatrix.from_rows([[-1]])


def test_invariants():
    c2 = builtin_group("C2")
    t = trivial_lattice(c2, 2)
    assert invariants_sublattice(t) == IntMatrix.identity(2)
    reg = regular_lattice(c2)
    inv = invariants_sublattice(reg)
    assert inv.cols == 1
    assert [abs(inv.entry(0, 0)), abs(inv.entry(1, 0))] == [1, 1]
    sign = explicit_lattice(c2, [[[-1]]])
    assert invariants_sublattice(sign).cols == 0


def test_equivariance_verdicts():
    c2 = builtin_group("C2")
    reg = regular_lattice(c2)
    triv = trivial_lattice(c2, 1)
    ident = LatticeMorphism(reg, reg, IntMatrix.identity(2))
    assert verify_equivariant_map(ident).ok
    norm = LatticeMorphism(triv, reg, IntMatrix.from_rows([[1], [1]]))
    assert verify_equivariant_map(norm).ok
    section = LatticeMorphism(triv, reg, IntMatrix.from_rows([[1], [0]]))
    v = verify_equivariant_map(section)
    assert not v.ok
    assert v.element == 1


def test_quotient_norm_one_c2():
    c2 = builtin_group("C2")
    reg = regular_lattice(c2)
    triv = trivial_lattice(c2, 1)
    norm = LatticeMorphism(triv, reg, IntMatrix.from_rows([[1], [1]]))
    quot, proj = quotient_lattice(norm)
    assert quot.rank == 1
    assert quot.action[1] == IntMatrix.from_rows([[-1]])
    assert (proj.matrix @ norm.matrix).is_zero()


def test_quotient_not_saturated():
    c1 = builtin_group("C1")
    z = trivial_lattice(c1, 1)
    two = LatticeMorphism(z, z, IntMatrix.from_rows([[2]]))
    with pytest.raises(NotSaturated) as e:
        quotient_lattice(two)
    assert e.value.factors == (2,)


def test_quotient_zero_sublattice():
    c2 = builtin_group("C2")
    reg = regular_lattice(c2)
    zero_src = trivial_lattice(c2, 0)
    empty = LatticeMorphism(zero_src, reg, IntMatrix.zeros(2, 0))
    quot, proj = quotient_lattice(empty)
    assert quot.rank == 2
    assert quot.action == reg.action


def test_short_exact_sequence():
    c2 = builtin_group("C2")
    reg = regular_lattice(c2)
    triv = trivial_lattice(c2, 1)
    norm = LatticeMorphism(triv, reg, IntMatrix.from_rows([[1], [1]]))
    quot, proj = quotient_lattice(norm)
    ses = ShortExactSequenceZ(norm, proj)
    assert ses.sub.rank == 1 and ses.mid.rank == 2 and ses.quot.rank == 1


def test_sym_power_morphism():
    c2 = builtin_group("C2")
    reg = regular_lattice(c2)
    sign = explicit_lattice(c2, [[[-1]]])
    beta = LatticeMorphism(reg, sign, IntMatrix.from_rows([[1, -1]]))
    assert verify_equivariant_map(beta).ok
    s2 = sym_power_morphism(beta, 2)
    # on basis ee, e sigma, sigma sigma the squared map is (1, -1, 1)
    assert s2.matrix == IntMatrix.from_rows([[1, -1, 1]])
    assert verify_equivariant_map(s2).ok


def test_sym2_tensor_roundtrip_is_multiplication_by_2():
    q8 = builtin_group("Q8")
    center = next(s for s in enumerate_subgroups(q8) if len(s) == 2)
    p = perm_lattice(q8, center)
    comp = tensor_onto_sym2(p).compose(sym2_into_tensor(p))
    assert comp.matrix == 2 * IntMatrix.identity(comp.matrix.rows)


def test_restrict_lattice():
    q8 = builtin_group("Q8")
    reg = regular_lattice(q8)
    center = next(s for s in enumerate_subgroups(q8) if len(s) == 2)
    res = restrict_lattice(reg, center)
    assert len(res.group) == 2
    assert res.rank == 8
