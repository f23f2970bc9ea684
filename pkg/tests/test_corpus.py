from torinv.intlin import AbelianGroupStructure
from torinv.corpus import (
    build_q8_sequence,
    corpus_list,
    q8_symmetric_square_pieces,
    random_glattice,
    run_all,
    verify_q8_module_structure,
    write_q8_fixture,
)
from torinv.glattice import builtin_group
from torinv.koszul import ses_from_text, verify_koszul_quasi_iso


def test_q8_sequence_shape():
    ses = build_q8_sequence()
    assert ses.mid.rank == 8
    assert ses.sub.rank == 4
    assert ses.quot.rank == 4
    assert ses.quot.basis_labels == ("e", "x", "y", "z")
    assert ses.mid.basis_labels == ("e", "e'", "x", "x'", "y", "y'", "z", "z'")


def test_q8_that_action():
    ses = build_q8_sequence()
    that = ses.quot
    i_idx, j_idx = that.group.generator_indices
    mi = that.action[i_idx]
    # i: e -> x, x -> -e, y -> z, z -> -y
    assert mi.column_vector(0) == {1: 1}
    assert mi.column_vector(1) == {0: -1}
    assert mi.column_vector(2) == {3: 1}
    assert mi.column_vector(3) == {2: -1}
    # i^2 acts as -id (e' is -e in the quotient)
    sq = mi @ mi
    assert sq == -1 * type(sq).identity(4)


def test_q8_structure_bundle():
    v = verify_q8_module_structure()
    assert v.ok, v
    assert v.summand_ranks == (4, 2, 2, 2)
    assert v.basis_index == 8
    assert not v.printed_variant_spans
    assert v.nx_character == (-1, 1)
    assert v.nbar_character == (-1, -1)
    assert v.h1_m.is_trivial
    assert v.koszul_ok == {0: True, 1: True, 2: True, 3: True}


def test_q8_koszul_h0_ranks():
    ses = build_q8_sequence()
    for q, rank in ((0, 1), (1, 4), (2, 10), (3, 20)):
        v = verify_koszul_quasi_iso(ses, q)
        assert v.ok
        assert v.h0 == AbelianGroupStructure(rank, ())


def test_pieces_shape():
    pieces = q8_symmetric_square_pieces()
    assert [len(v) for v in pieces.values()] == [4, 2, 2, 2]


def test_corpus_contains_q8_and_replays():
    cases = corpus_list()
    names = [c.name for c in cases]
    assert "q8" in names
    assert sum(1 for n in names if n.startswith("random_")) == 5
    seeds = [c.seed for c in cases if c.seed is not None]
    assert len(seeds) == len(set(seeds)) == 5


def test_random_lattices_deterministic():
    c2 = builtin_group("C2")
    a = random_glattice(c2, 3, seed=42)
    b = random_glattice(c2, 3, seed=42)
    assert a.action == b.action


def test_run_all_corpus():
    results = run_all()
    failures = [(case, label) for case, rows in results.items()
                for (label, _, ok) in rows if not ok]
    assert not failures, failures


def test_q8_fixture_files(tmp_path):
    path = write_q8_fixture(str(tmp_path))
    text = open(path).read()
    ses = ses_from_text(text, base_dir=str(tmp_path))
    assert ses.mid.rank == 8
    assert verify_koszul_quasi_iso(ses, 2).ok
