import random

import pytest

from torinv.intlin import AbelianGroupStructure
from torinv.glattice import builtin_group
from torinv.tori import norm_one_lattice
from torinv.assembler import (
    FamilyDatumMissing,
    FieldProfile,
    assemble_inv4,
    assemble_inv5,
    assemble_unramified,
    coset_lattice_term,
    e2_page,
    field_atom,
    galois_h,
    group_h,
    hs_weight3_sequence,
    lattice_node,
    load_golden,
    matches_golden,
    motivic_table,
    q8_conclusion,
    qz_atom,
    same_shape,
    simplify_term,
    special_family_reports,
    tensor,
    zero,
)
from torinv.corpus import build_q8_sequence
from torinv.tori import TorusLattice


def q8_torus():
    return TorusLattice(build_q8_sequence().quot, "quotient")


def c3_torus():
    return norm_one_lattice(builtin_group("C3"))


def test_profile_characteristic_forces_inversion():
    p = FieldProfile(characteristic=5)
    assert p.p_inverted
    assert p.coeff2() == "Q/Z(2)[1/p]"
    rt = FieldProfile.from_json(p.to_json())
    assert rt == p


def test_e2_page_cells():
    t = q8_torus()
    page = e2_page(t, 3, (0, 3), (0, 3))
    cell = page[(2, 2)]
    assert "H^0" in cell.label
    assert "S^2(T^)" in cell.label and "Z(1)" in cell.label
    assert cell.children[0].children[0].lattice_rank == 10
    # below the diagonal the page vanishes
    assert page[(0, 1)].is_zero()
    # negative twist: symbolic torsion-shift marker
    marked = e2_page(t, 1, (2, 2), (2, 2))[(2, 2)]
    assert marked.note is not None
    assert "[-1]" in marked.label


def test_motivic_table_weight3():
    t = q8_torus()
    tab = motivic_table(t, 3)
    assert all(tab[i].is_zero() for i in (0, 1, 2))
    assert "K_3(F_sep)_ind" in tab[3].label
    assert "K^M_2" in tab[4].label
    assert "F_sep^*" in tab[5].label
    assert tab[6].status == "computed"
    assert tab[6].structure == AbelianGroupStructure(20, ())


def test_motivic_table_weight4():
    t = q8_torus()
    tab = motivic_table(t, 4)
    assert tab[5].kind == "extension"
    sub, quot = tab[5].children
    assert "K^M_3" in sub.label
    assert "K_3(F_sep)_ind" in quot.label
    assert "S^3(T^)" in tab[7].label


def test_hs_weight3_matches_golden():
    rep = hs_weight3_sequence(q8_torus(), FieldProfile())
    assert matches_golden(rep, "hs_weight3")


def test_hs_weight3_cd0_collapses():
    rep = hs_weight3_sequence(q8_torus(), FieldProfile(cd_bound=0))
    assert rep.term("h2_t").is_zero()
    assert rep.term("h3_t").is_zero()
    assert any(e["rule"] == "cd" for e in rep.simplification_log)


def test_inv4_matches_golden():
    rep = assemble_inv4(q8_torus(), FieldProfile())
    assert matches_golden(rep, "inv4")
    labels = {nid: t.label for nid, t in rep.nodes}
    assert labels["i_node"] == "I"
    assert rep.term("i_node").status == "external-input"
    gammas = [a for a in rep.arrows if a["label"] == "gamma"]
    cups = [a for a in rep.arrows if a["label"] == "cup"]
    assert len(gammas) == 1 and len(cups) == 1


def test_inv4_special_family_kills_cycle_kernel():
    rep = assemble_inv4(c3_torus(), FieldProfile())
    assert rep.term("i_node").structure.is_trivial
    assert rep.term("ch3_tors").structure.is_trivial
    # the family-simplified diagram is no longer the generic golden shape
    assert not matches_golden(rep, "inv4")


def test_inv4_cd1_kills_h3():
    rep = assemble_inv4(q8_torus(), FieldProfile(cd_bound=1))
    assert rep.term("h3_t").is_zero()


def test_inv5_matches_golden():
    rep = assemble_inv5(q8_torus(), FieldProfile())
    assert matches_golden(rep, "inv5")
    assert rep.term("q_node").label == "Q"
    assert rep.term("r_node").label == "R"
    assert rep.term("h2_primed").note is not None  # second reading retained


def test_unramified_pair():
    rep4, rep5 = assemble_unramified(c3_torus(), FieldProfile())
    assert matches_golden(rep4, "unramified4")
    assert matches_golden(rep5, "unramified5")
    labels4 = [t.label for _, t in rep4.nodes]
    assert labels4.count("H^4_nr(F(S), Q/Z(3))") == 1
    assert any("flasque resolution used" in n for n in rep4.notes)


def test_unramified_trivial_torus():
    c3 = builtin_group("C3")
    from torinv.glattice import trivial_lattice
    s = TorusLattice(trivial_lattice(c3, 1), "explicit")
    rep4, _ = assemble_unramified(s, FieldProfile())
    # all symmetric powers of the zero lattice have rank 0
    node = rep4.term("inv_s2f")
    assert node.children[0].children[0].lattice_rank == 0


def test_special_family_norm_one_c2():
    t = norm_one_lattice(builtin_group("C2"))
    reps = special_family_reports(t, FieldProfile())
    labels = [term.label for _, term in reps.inv3.nodes]
    assert "Br(L/F)" in labels
    assert reps.h1_s2_description is None or all(
        nid not in ("h3_corr", "h4_corr")
        for nid, _ in reps.h1_s2_description.nodes)


def test_special_family_c3_squared_corrections():
    t = c3_torus().direct_sum(c3_torus())
    prof = FieldProfile(cd_bound=1, mu2_full=True, odd_part_only=True)
    reps = special_family_reports(t, prof)
    desc = reps.h1_s2_description
    assert desc is not None
    h3 = desc.term("h3_corr")
    h4 = desc.term("h4_corr")
    # H^3(G, Q/Z) = H^4(C3, Z) = Z/3 and H^4(G, Q/Z) = H^5(C3, Z) = 0
    assert h3.structure == AbelianGroupStructure(0, (3,))
    assert h4.structure is not None and h4.structure.is_trivial


def test_special_family_split_torus_dec():
    # fully split: invariants are everything, the Dec quotient is zero
    c1 = builtin_group("C1")
    from torinv.glattice import trivial_lattice
    from torinv.tori import FamilyDatum
    t = TorusLattice(trivial_lattice(c1, 2), "explicit",
                     FamilyDatum(2, ((0,), (0,))))
    reps = special_family_reports(t, FieldProfile())
    assert reps.inv3.term("dec_quot").structure.is_trivial
    ch2 = reps.chow.term("ch2")
    assert ch2.structure == AbelianGroupStructure(3, ())  # S^2(Z^2) fully fixed


def test_special_family_requires_datum():
    t = TorusLattice(build_q8_sequence().quot, "quotient")
    with pytest.raises(FamilyDatumMissing):
        special_family_reports(t, FieldProfile())


def test_simplify_rules():
    prof = FieldProfile(cd_bound=1, rel_brauer_trivial=True)
    s2 = lattice_node("S^2(T^)", build_q8_sequence().quot, "t")
    h3 = galois_h(3, tensor(s2, qz_atom("Q/Z(2)")), anchor="t", coeff="Q/Z(2)")
    assert simplify_term(h3, prof).is_zero()
    br = field_atom("Br(K2/F)", anchor="t")
    assert simplify_term(br, prof).is_zero()
    # Hilbert 90 on a permutation lattice
    from torinv.glattice import regular_lattice
    perm = lattice_node("Z[G]", regular_lattice(builtin_group("C2")), "t")
    h1 = galois_h(1, tensor(perm, field_atom("F_sep^*", anchor="t")), anchor="t")
    assert simplify_term(h1, prof).is_zero()
    # but not on a non-permutation lattice
    h1b = galois_h(1, tensor(s2, field_atom("F_sep^*", anchor="t")), anchor="t")
    assert not simplify_term(h1b, prof).is_zero()


def test_simplify_shapiro():
    prof = FieldProfile()
    node = group_h(1, "Q8", coset_lattice_term("Q8", 2, "t"), anchor="t")
    out = simplify_term(node, prof)
    assert out.level == "H(order 2)"
    assert out.children[0].label == "Z"


def test_simplify_confluent_random_orders():
    prof = FieldProfile(cd_bound=1, rel_brauer_trivial=True, odd_part_only=True)
    s2 = lattice_node("S^2(T^)", build_q8_sequence().quot, "t")
    terms = [
        galois_h(3, tensor(s2, qz_atom("Q/Z(2)")), anchor="t", coeff="Q/Z(2)"),
        tensor(field_atom("Br(K1/F)", anchor="t"), field_atom("F^*", anchor="t")),
        group_h(2, "Q8", coset_lattice_term("Q8", 4, "t"), anchor="t"),
        galois_h(1, tensor(s2, field_atom("F_sep^*", anchor="t")), anchor="t"),
    ]
    names = ["cd", "h90", "shapiro", "brauer", "div", "odd"]
    rng = random.Random(2024)
    for t in terms:
        base = simplify_term(t, prof)
        for _ in range(6):
            order = names[:]
            rng.shuffle(order)
            assert simplify_term(t, prof, rule_order=order) == base


def test_q8_conclusion_positive():
    prof = FieldProfile(cd_bound=1, rel_brauer_trivial=True)
    rep, conclusion = q8_conclusion(prof, ch3_tors_nonzero=True)
    assert conclusion == "nontrivial-degree-4-invariant"
    assert rep.term("h1_s2").is_zero()
    # the Brauer-bound sequence is present (nodes simplified to 0, with the
    # rewrites on record)
    ids = [nid for nid, _ in rep.nodes]
    assert "br_left" in ids and "br_right" in ids
    assert any(a["from"] == "br_left" and a["to"] == "h1_s2" for a in rep.arrows)
    assert any(e["rule"] == "brauer" and "Br(K1/F)" in e["before"]
               for e in rep.simplification_log)


def test_q8_conclusion_missing_flag():
    prof = FieldProfile(cd_bound=1, rel_brauer_trivial=True)
    rep, conclusion = q8_conclusion(prof, ch3_tors_nonzero=False)
    assert conclusion == "inconclusive"
    assert any("missing hypotheses" in n for n in rep.notes)
    assert any("CH^3" in n for n in rep.notes)


def test_q8_conclusion_missing_brauer():
    prof = FieldProfile(cd_bound=1, rel_brauer_trivial=False)
    rep, conclusion = q8_conclusion(prof, ch3_tors_nonzero=True)
    assert conclusion == "inconclusive"
    labels = [t.label for _, t in rep.nodes]
    assert any("Br(K1/F)" in l for l in labels)


def test_q8_conclusion_characteristic_guard():
    with pytest.raises(ValueError):
        q8_conclusion(FieldProfile(characteristic=3), True)


def test_same_shape_rejects_different_graphs():
    a = load_golden("inv4")
    b = load_golden("inv5")
    assert not same_shape(a, b)
    assert same_shape(a, a)


def test_report_json_is_deterministic():
    rep1 = assemble_inv4(q8_torus(), FieldProfile())
    rep2 = assemble_inv4(q8_torus(), FieldProfile())
    assert rep1.to_json() == rep2.to_json()
    assert all("anchor" in n or n["status"] == "external-input"
               for n in rep1.to_dict()["nodes"])
