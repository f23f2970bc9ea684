import json

import pytest

from torinv.intlin import IntMatrix
from torinv.glattice import InvalidSpec, builtin_group
from torinv.exprs import parse_lattice_expr, parse_torus_expr


def test_trivial_needs_context():
    with pytest.raises(InvalidSpec):
        parse_lattice_expr("Z")
    lat = parse_lattice_expr("Z", group=builtin_group("C2"))
    assert lat.rank == 1


def test_perm_and_subrefs():
    lat = parse_lattice_expr("Z[Q8/s1]")
    assert lat.rank == 4  # cosets of the center
    assert parse_lattice_expr("Z[Q8/1]").rank == 8
    assert parse_lattice_expr("Z[Q8/G]").rank == 1
    with pytest.raises(InvalidSpec):
        parse_lattice_expr("Z[Q8/s9]")


def test_norm_one_and_dual():
    lat = parse_lattice_expr("dual(norm_one(C2))")
    assert lat.rank == 1
    assert lat.action[1] == IntMatrix.from_rows([[-1]])


def test_sym_wedge_sum_tensor():
    assert parse_lattice_expr("sym(Z[C2/1], 2)").rank == 3
    assert parse_lattice_expr("wedge(Z[C2/1], 2)").rank == 1
    assert parse_lattice_expr("Z[C2/1] (+) Z[C2/G]").rank == 3
    assert parse_lattice_expr("Z[C2/1] (x) Z[C2/1]").rank == 4
    # (x) binds tighter than (+): 2*2 + 1 = 5
    assert parse_lattice_expr("Z[C2/1] (x) Z[C2/1] (+) Z").rank == 5
    c2 = builtin_group("C2")
    assert parse_lattice_expr("(Z (+) Z) (x) Z[C2/1]", group=c2).rank == 4


def test_group_conflict():
    with pytest.raises(InvalidSpec):
        parse_lattice_expr("norm_one(C2) (+) norm_one(C3)")


def test_unknown_flag_tokens():
    with pytest.raises(InvalidSpec):
        parse_lattice_expr("Z[C2/1] extra")
    with pytest.raises(InvalidSpec):
        parse_lattice_expr("frobnicate(Z)")


def test_explicit_file(tmp_path):
    doc = {"group": "C2", "generator_matrices": [[[-1]]],
           "basis_labels": ["t"]}
    path = tmp_path / "sign.json"
    path.write_text(json.dumps(doc))
    lat = parse_lattice_expr(f"explicit({path})")
    assert lat.rank == 1
    assert lat.action[1] == IntMatrix.from_rows([[-1]])
    rel = parse_lattice_expr("explicit(sign.json)", base_dir=str(tmp_path))
    assert rel.action == lat.action


def test_torus_expr_family():
    t = parse_torus_expr("norm_one(C3) (+) norm_one(C3)")
    assert t.family is not None
    assert t.family.n == 2
    assert t.rank == 4
    plain = parse_torus_expr("dual(norm_one(C2))")
    assert plain.family is None
    assert plain.rank == 1
