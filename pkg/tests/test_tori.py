from torinv.intlin import AbelianGroupStructure, IntMatrix
from torinv.glattice import (
    builtin_group,
    enumerate_subgroups,
    explicit_lattice,
    perm_lattice,
    regular_lattice,
    trivial_lattice,
)
from torinv.tori import (
    coflasque_resolution,
    flasque_resolution,
    flasqueness,
    is_permutation_in_basis,
    norm_one_lattice,
    norm_one_sequence,
    weil_restriction_lattice,
)


def test_norm_one_c2_is_sign():
    t = norm_one_lattice(builtin_group("C2"))
    assert t.rank == 1
    assert t.lattice.action[1] == IntMatrix.from_rows([[-1]])
    assert t.family.n == 1


def test_norm_one_trivial_group():
    t = norm_one_lattice(builtin_group("C1"))
    assert t.rank == 0


def test_norm_one_c3_action():
    t = norm_one_lattice(builtin_group("C3"))
    assert t.rank == 2
    g = t.lattice.action[1]
    assert g == IntMatrix.from_rows([[0, -1], [1, -1]])


def test_flasqueness_trivial_lattice():
    c2 = builtin_group("C2")
    z = trivial_lattice(c2, 1)
    assert flasqueness(z, "flasque").ok
    assert flasqueness(z, "coflasque").ok


def test_flasqueness_perm_q8():
    q8 = builtin_group("Q8")
    for sub in enumerate_subgroups(q8):
        p = perm_lattice(q8, sub)
        assert flasqueness(p, "flasque").ok
        assert flasqueness(p, "coflasque").ok


def test_sign_is_neither():
    c2 = builtin_group("C2")
    sign = explicit_lattice(c2, [[[-1]]])
    f = flasqueness(sign, "flasque")
    cf = flasqueness(sign, "coflasque")
    assert not f.ok and not cf.ok
    bad = [v for (sub, v) in cf.certificate if not v.is_trivial]
    assert bad == [AbelianGroupStructure(0, (2,))]


def test_flasque_coflasque_duality():
    q8 = builtin_group("Q8")
    t = norm_one_lattice(q8).lattice
    from torinv.glattice import dual_lattice
    assert flasqueness(t, "flasque").ok == flasqueness(dual_lattice(t), "coflasque").ok
    assert flasqueness(t, "coflasque").ok == flasqueness(dual_lattice(t), "flasque").ok


def test_coflasque_resolution_trivial():
    c2 = builtin_group("C2")
    ses, cert = coflasque_resolution(trivial_lattice(c2, 1))
    assert cert.ok
    assert ses.mid.rank == 1  # Z_triv suffices, nothing else is added
    assert ses.sub.rank == 0


def test_coflasque_resolution_regular():
    c2 = builtin_group("C2")
    ses, cert = coflasque_resolution(regular_lattice(c2))
    assert cert.ok
    assert is_permutation_in_basis(ses.mid)


def test_coflasque_resolution_sign():
    c2 = builtin_group("C2")
    sign = explicit_lattice(c2, [[[-1]]])
    ses, cert = coflasque_resolution(sign)
    assert cert.ok
    assert is_permutation_in_basis(ses.mid)


def test_flasque_resolution_sign_is_the_expected_one():
    # 0 -> sign -> Z[C2] -> Z_triv -> 0
    c2 = builtin_group("C2")
    sign = explicit_lattice(c2, [[[-1]]])
    res = flasque_resolution(sign)
    assert res.certificate.ok
    assert res.ses.sub.action == sign.action
    assert res.ses.mid.rank == 2
    assert is_permutation_in_basis(res.ses.mid)
    assert res.flasque_quotient.rank == 1
    assert res.flasque_quotient.action[1] == IntMatrix.identity(1)


def test_flasque_resolution_norm_one_c3():
    res = flasque_resolution(norm_one_lattice(builtin_group("C3")))
    assert res.certificate.ok
    assert is_permutation_in_basis(res.ses.mid)


def test_flasque_resolution_trivial_lattice():
    c3 = builtin_group("C3")
    res = flasque_resolution(trivial_lattice(c3, 1))
    assert res.certificate.ok
    assert res.flasque_quotient.rank == 0


def test_norm_one_duality_sequence():
    # dual(norm_one) embeds in Z[G] with quotient Z (the augmentation)
    ses = norm_one_sequence(builtin_group("C3"))
    assert ses.sub.rank == 1 and ses.mid.rank == 3 and ses.quot.rank == 2


def test_weil_restriction():
    q8 = builtin_group("Q8")
    center = next(s for s in enumerate_subgroups(q8) if len(s) == 2)
    w = weil_restriction_lattice(q8, center)
    assert w.rank == 4
    assert is_permutation_in_basis(w)


def test_torus_direct_sum_family():
    c3 = builtin_group("C3")
    t = norm_one_lattice(c3)
    tt = t.direct_sum(t)
    assert tt.rank == 4
    assert tt.family.n == 2
    assert tt.family.is_regular_free()
