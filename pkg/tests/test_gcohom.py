import pytest

from torinv.intlin import AbelianGroupStructure
from torinv.glattice import (
    builtin_group,
    enumerate_subgroups,
    explicit_lattice,
    perm_lattice,
    regular_lattice,
    sym_power,
    trivial_lattice,
)
from torinv.gcohom import (
    CancelledError,
    DegreeCapExceeded,
    SizeExceeded,
    brute_force_cohomology,
    cohomology,
    cohomology_qz,
    shapiro_compare,
)


def sign_lattice():
    return explicit_lattice(builtin_group("C2"), [[[-1]]])


def test_h1_c2_sign():
    # cocycle enumeration: Z^1 = Z (any value on sigma), B^1 = 2Z
    c2 = builtin_group("C2")
    assert cohomology(c2, sign_lattice(), 1).value == AbelianGroupStructure(0, (2,))
    assert brute_force_cohomology(c2, sign_lattice(), 1).value == \
        AbelianGroupStructure(0, (2,))


def test_h2_c3_trivial():
    c3 = builtin_group("C3")
    assert cohomology(c3, trivial_lattice(c3), 2).value == AbelianGroupStructure(0, (3,))


def test_trivial_group():
    c1 = builtin_group("C1")
    m = trivial_lattice(c1, 3)
    assert cohomology(c1, m, 0).value == AbelianGroupStructure(3, ())
    for i in (1, 2, 3):
        assert cohomology(c1, m, i).value.is_trivial


def test_h1_s3_regular():
    s3 = builtin_group("S3")
    reg = regular_lattice(s3)
    assert cohomology(s3, reg, 1).value.is_trivial
    assert brute_force_cohomology(s3, reg, 1).value.is_trivial


def test_h0_is_invariants():
    q8 = builtin_group("Q8")
    reg = regular_lattice(q8)
    assert cohomology(q8, reg, 0).value == AbelianGroupStructure(1, ())
    assert brute_force_cohomology(q8, reg, 0).value == AbelianGroupStructure(1, ())


def test_q8_low_degrees():
    q8 = builtin_group("Q8")
    z = trivial_lattice(q8)
    assert cohomology(q8, z, 1).value.is_trivial
    # H^2(Q8, Z) = Hom(Q8, Q/Z) = Z/2 x Z/2
    assert cohomology(q8, z, 2).value == AbelianGroupStructure(0, (2, 2))
    assert brute_force_cohomology(q8, z, 2).value == AbelianGroupStructure(0, (2, 2))
    assert cohomology(q8, z, 3).value.is_trivial


def test_cyclic_periodicity_sample():
    for n in (2, 3, 4, 6, 12):
        g = builtin_group(f"C{n}")
        z = trivial_lattice(g)
        for k in (1, 2, 3):
            assert cohomology(g, z, 2 * k).value == AbelianGroupStructure.cyclic(n)
            assert cohomology(g, z, 2 * k + 1).value.is_trivial


def test_qz_shift():
    c2 = builtin_group("C2")
    # H^1(C2, sign (x) Q/Z) = H^2(C2, sign) = 0
    assert cohomology_qz(c2, sign_lattice(), 1).value.is_trivial
    # H^3(C3, Z (x) Q/Z) = H^4(C3, Z) = Z/3
    c3 = builtin_group("C3")
    r = cohomology_qz(c3, trivial_lattice(c3), 3)
    assert r.value == AbelianGroupStructure(0, (3,))
    assert r.divisible_rank == 0


def test_qz_degree_zero():
    c1 = builtin_group("C1")
    m = trivial_lattice(c1, 2)
    r = cohomology_qz(c1, m, 0)
    assert r.divisible_rank == 2
    assert r.value.is_trivial
    assert r.display() == "(Q/Z)^2"
    # H^0(C2, sign (x) Q/Z) = ker(x2 on Q/Z)... divisible rank 0, finite Z/2
    c2 = builtin_group("C2")
    r = cohomology_qz(c2, sign_lattice(), 0)
    assert r.divisible_rank == 0
    assert r.value == AbelianGroupStructure(0, (2,))


def test_oracle_agreement_small():
    for name in ("C2", "C3", "C4", "S3", "D4", "Q8"):
        g = builtin_group(name)
        subs = enumerate_subgroups(g)
        mods = [trivial_lattice(g), perm_lattice(g, subs[1])]
        for m in mods:
            if m.rank > 4:
                continue
            for i in (0, 1, 2):
                a = cohomology(g, m, i).value
                b = brute_force_cohomology(g, m, i).value
                assert a == b, (name, m, i, str(a), str(b))


def test_annihilation_by_group_order():
    s3 = builtin_group("S3")
    m = perm_lattice(s3, enumerate_subgroups(s3)[1])
    for i in (1, 2):
        val = cohomology(s3, m, i).value
        assert val.free_rank == 0
        assert all(6 % d == 0 for d in val.torsion)


def test_sym2_regular_factors_divide_2():
    c3 = builtin_group("C3")
    m = sym_power(regular_lattice(c3), 2)
    for i in (1, 2, 3):
        val = cohomology(c3, m, i).value
        assert all(d == 2 for d in val.torsion)


def test_degree_cap():
    q8 = builtin_group("Q8")
    z = trivial_lattice(q8)
    with pytest.raises(DegreeCapExceeded) as e:
        cohomology(q8, z, 4)
    assert e.value.cap == 3
    # no cap for cyclic groups
    c2 = builtin_group("C2")
    assert cohomology(c2, trivial_lattice(c2), 10).value == \
        AbelianGroupStructure(0, (2,))


def test_brute_force_size_guard():
    q8 = builtin_group("Q8")
    big = trivial_lattice(q8, 300)
    with pytest.raises(SizeExceeded):
        brute_force_cohomology(q8, big, 2)


def test_cancellation():
    s3 = builtin_group("S3")
    m = trivial_lattice(s3, 2)
    with pytest.raises(CancelledError):
        cohomology(s3, m, 2, cancel=lambda: True)


def test_shapiro():
    q8 = builtin_group("Q8")
    center = next(s for s in enumerate_subgroups(q8) if len(s) == 2)
    v = shapiro_compare(q8, center, 1)
    assert v.equal and v.induced.value.is_trivial
    # H = G: both sides are H^i(G, Z)
    v = shapiro_compare(q8, tuple(range(8)), 2)
    assert v.equal
    c4 = builtin_group("C4")
    half = next(s for s in enumerate_subgroups(c4) if len(s) == 2)
    v = shapiro_compare(c4, half, 2)
    assert v.equal
    assert v.induced.value == AbelianGroupStructure(0, (2,))


def test_disk_cache_roundtrip(tmp_path, monkeypatch):
    monkeypatch.setenv("TORINV_CACHE_DIR", str(tmp_path))
    import torinv.gcohom as gc
    gc._model_cache.clear()
    s3 = builtin_group("S3")
    m = trivial_lattice(s3, 1)
    first = cohomology(s3, m, 2).value
    assert any(p.suffix == ".mat" for p in tmp_path.iterdir())
    gc._model_cache.clear()
    second = cohomology(s3, m, 2).value
    assert first == second
