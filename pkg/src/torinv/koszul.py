"""Koszul-style complexes attached to a short exact sequence of G-lattices.

Given 0 -> A --alpha--> B --beta--> C -> 0 and q >= 0, the complex

    Lambda^q A  ->  Lambda^{q-1} A (x) S^1 B  ->  ...  ->  A (x) S^{q-1} B  ->  S^q B

sits in homological degrees q..0 (degree 0 on the right).  The boundary on
Lambda^i A (x) S^j B sends

    (x_1 ^ ... ^ x_i) (x) s   |->   sum_k (-1)^{k+1} (x_1 ^ ... x_k^ ... ^ x_i) (x) alpha(x_k) s

(hat marks omission).  The complex is exact in positive degrees and its
degree-0 homology is S^q C, identified through the map S^q(beta); the
verifier below certifies exactly that, lattice by lattice.

Tensor factors use the basis conventions of glattice (wedge index major,
sym index minor), so all matrices here are reproducible entry by entry.
"""

from __future__ import annotations

from dataclasses import dataclass

from .intlin import (
    AbelianGroupStructure,
    IntMatrix,
    homology_structure,
    in_column_span,
    invariant_factors,
    kernel_basis,
    parse_matrix,
    format_matrix,
)
from .glattice import (
    GLattice,
    InvalidSpec,
    LatticeMorphism,
    ShortExactSequenceZ,
    sym_basis,
    sym_power,
    sym_power_morphism,
    tensor_lattice,
    verify_equivariant_map,
    wedge_basis,
    wedge_power,
)


class ChainComplexZ:
    """A bounded complex of G-lattices with equivariant integer boundaries.

    ``lattices[k]`` is the degree-k term (degree 0 rightmost); ``boundary(k)``
    maps degree k to k-1.  Construction checks d . d = 0 and equivariance of
    every boundary.
    """

    def __init__(self, lattices, boundaries):
        self.lattices = list(lattices)
        self._boundaries = dict(boundaries)
        for k, f in self._boundaries.items():
            if f.source != self.lattices[k] or f.target != self.lattices[k - 1]:
                raise InvalidSpec(f"boundary {k} connects the wrong terms")
            v = verify_equivariant_map(f)
            if not v:
                raise InvalidSpec(f"boundary {k} is not equivariant at g={v.element}")
        for k in range(2, len(self.lattices)):
            upper = self._boundaries.get(k)
            lower = self._boundaries.get(k - 1)
            if upper is not None and lower is not None:
                if not (lower.matrix @ upper.matrix).is_zero():
                    raise InvalidSpec(f"d_{k - 1} . d_{k} != 0")

    @property
    def top_degree(self):
        return len(self.lattices) - 1

    def boundary(self, k):
        """The map from degree k to degree k-1 (zero map if absent)."""
        f = self._boundaries.get(k)
        if f is not None:
            return f
        if 1 <= k <= self.top_degree:
            return LatticeMorphism(
                self.lattices[k], self.lattices[k - 1],
                IntMatrix.zeros(self.lattices[k - 1].rank, self.lattices[k].rank))
        raise IndexError(f"no boundary from degree {k}")


def _interior_product_matrix(ses, i, j):
    """Boundary Lambda^i A (x) S^j B  ->  Lambda^{i-1} A (x) S^{j+1} B."""
    a_rank = ses.sub.rank
    b_rank = ses.mid.rank
    alpha_cols = ses.left.matrix.col_dicts()
    wb_src = wedge_basis(a_rank, i)
    wb_tgt = {w: t for t, w in enumerate(wedge_basis(a_rank, i - 1))}
    sb_src = sym_basis(b_rank, j)
    sb_tgt = {s: t for t, s in enumerate(sym_basis(b_rank, j + 1))}
    n_sym_src = len(sb_src)
    n_sym_tgt = len(sb_tgt)
    triples = []
    for wi, w in enumerate(wb_src):
        for k, xk in enumerate(w):
            sign = 1 if k % 2 == 0 else -1
            rest = wb_tgt[w[:k] + w[k + 1:]]
            for si, s in enumerate(sb_src):
                src = wi * n_sym_src + si
                for b_idx, coeff in alpha_cols[xk].items():
                    tgt_s = sb_tgt[tuple(sorted(s + (b_idx,)))]
                    triples.append((rest * n_sym_tgt + tgt_s, src, sign * coeff))
    rows = len(wb_tgt) * n_sym_tgt
    cols = len(wb_src) * n_sym_src
    return IntMatrix.from_triples(rows, cols, triples)


def build_koszul(ses, q):
    """The Koszul complex of the sequence in weight q (degree 0 = S^q mid)."""
    if q < 0:
        raise InvalidSpec("negative weight")
    if q == 0:
        return ChainComplexZ([sym_power(ses.mid, 0)], {})
    lattices = []
    for k in range(q + 1):
        lattices.append(tensor_lattice(wedge_power(ses.sub, k),
                                       sym_power(ses.mid, q - k)))
    boundaries = {}
    for k in range(1, q + 1):
        if lattices[k].rank == 0:
            continue
        mat = _interior_product_matrix(ses, k, q - k)
        boundaries[k] = LatticeMorphism(lattices[k], lattices[k - 1], mat)
    return ChainComplexZ(lattices, boundaries)


def complex_homology(complex_, k):
    """H_k = ker(d_k) / im(d_{k+1}), via exact kernel/cokernel arithmetic."""
    if not (0 <= k <= complex_.top_degree):
        raise IndexError(f"degree {k} outside the complex support")
    d_out = complex_.boundary(k).matrix if k >= 1 else None
    d_in = complex_.boundary(k + 1).matrix if k < complex_.top_degree else None
    if d_out is None and d_in is None:
        return AbelianGroupStructure.free(complex_.lattices[k].rank)
    if d_out is None and complex_.lattices[k].rank == 0:
        return AbelianGroupStructure.trivial()
    return homology_structure(d_out, d_in)


@dataclass(frozen=True)
class KoszulVerdict:
    ok: bool
    weight: int
    positive_homology: dict
    h0: AbelianGroupStructure
    quotient_rank: int
    surjective: bool
    kernel_matches_image: bool

    def __bool__(self):
        return self.ok


def verify_koszul_quasi_iso(ses, q):
    """Certify exactness in positive degrees and H_0 = S^q(quotient).

    The degree-0 identification is checked at the lattice level: S^q(beta)
    must be surjective with kernel equal (as a saturated sublattice) to the
    image of the incoming boundary.
    """
    cx = build_koszul(ses, q)
    positive = {}
    ok = True
    for k in range(1, cx.top_degree + 1):
        h = complex_homology(cx, k)
        positive[k] = h
        if not h.is_trivial:
            ok = False
    h0 = complex_homology(cx, 0)
    sq_beta = sym_power_morphism(ses.right, q)
    coker = invariant_factors(sq_beta.matrix)
    surjective = (len(coker) == sq_beta.target.rank
                  and all(d == 1 for d in coker))
    if q >= 1 and cx.lattices[1].rank > 0:
        image = cx.boundary(1).matrix
        ker = kernel_basis(sq_beta.matrix)
        kernel_matches = in_column_span(image, ker) and in_column_span(ker, image)
    else:
        kernel_matches = kernel_basis(sq_beta.matrix).cols == 0
    ok = ok and surjective and kernel_matches
    return KoszulVerdict(
        ok=ok,
        weight=q,
        positive_homology=positive,
        h0=h0,
        quotient_rank=sq_beta.target.rank,
        surjective=surjective,
        kernel_matches_image=kernel_matches,
    )


# ---------------------------------------------------------------------------
# short-exact-sequence files
# ---------------------------------------------------------------------------


def ses_to_text(ses, sub_expr, mid_expr, quot_expr):
    """Serialize as: group name, three lattice expressions, two matrices."""
    group = ses.sub.group
    gname = group.name
    if not gname:
        raise InvalidSpec("sequence file needs a named (builtin) group")
    parts = [
        f"group {gname}",
        f"sub {sub_expr}",
        f"mid {mid_expr}",
        f"quot {quot_expr}",
        "left",
        format_matrix(ses.left.matrix, sparse=False).rstrip("\n"),
        "right",
        format_matrix(ses.right.matrix, sparse=False).rstrip("\n"),
    ]
    return "\n".join(parts) + "\n"


def ses_from_text(text, base_dir=None):
    """Parse a sequence file; lattice expressions go through the grammar."""
    from .exprs import parse_lattice_expr
    from .glattice import builtin_group

    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    header = {}
    idx = 0
    while idx < len(lines) and lines[idx].split()[0] in ("group", "sub", "mid", "quot"):
        key, _, rest = lines[idx].partition(" ")
        header[key] = rest.strip()
        idx += 1
    for key in ("group", "sub", "mid", "quot"):
        if key not in header:
            raise InvalidSpec(f"sequence file is missing the {key!r} line")
    group = builtin_group(header["group"])
    sub = parse_lattice_expr(header["sub"], group=group, base_dir=base_dir)
    mid = parse_lattice_expr(header["mid"], group=group, base_dir=base_dir)
    quot = parse_lattice_expr(header["quot"], group=group, base_dir=base_dir)
    if idx >= len(lines) or lines[idx] != "left":
        raise InvalidSpec("sequence file: expected a 'left' matrix section")
    try:
        right_at = lines.index("right", idx + 1)
    except ValueError:
        raise InvalidSpec("sequence file: expected a 'right' matrix section") from None
    left_m = parse_matrix("\n".join(lines[idx + 1:right_at]))
    right_m = parse_matrix("\n".join(lines[right_at + 1:]))
    left = LatticeMorphism(sub, mid, left_m)
    right = LatticeMorphism(mid, quot, right_m)
    return ShortExactSequenceZ(left, right)
