"""Torus-level constructions on character lattices.

A torus is handled entirely through its character lattice over the (finite)
splitting group.  This module provides the norm-one and Weil-restriction
lattices, the flasque/coflasque predicates (H^1 vanishing over every
subgroup, for the dual resp. the lattice itself), and resolution
constructors:

  * coflasque_resolution(M): 0 -> C -> P -> M -> 0 with P a direct sum of
    coset lattices Z[G/H] built from generators of every invariant
    sublattice M^H, so that P^H -> M^H is onto for all H; the kernel is
    then coflasque, which the returned certificate re-proves subgroup by
    subgroup rather than trusting the construction.
  * flasque_resolution(S): dualize the coflasque resolution of dual(S) to
    get 0 -> S -> P -> T -> 0 with P a permutation lattice and T certified
    flasque.

Minimality of the middle term is out of scope; correctness is certified.
"""

from __future__ import annotations

from dataclasses import dataclass

from .intlin import IntMatrix, in_column_span, kernel_basis, solve_columns
from .glattice import (
    FiniteGroup,
    GLattice,
    InvalidSpec,
    LatticeMorphism,
    ShortExactSequenceZ,
    direct_sum,
    dual_lattice,
    enumerate_subgroups,
    invariants_sublattice,
    is_permutation_matrix,
    perm_lattice,
    quotient_lattice,
    regular_lattice,
    restrict_lattice,
    trivial_lattice,
    verify_equivariant_map,
)
from .gcohom import cohomology


@dataclass(frozen=True)
class FamilyDatum:
    """Membership in the family 1 -> T -> P -> G_m^n -> 1, P quasi-trivial.

    ``components`` lists the subgroups H whose coset lattices make up the
    character lattice of P; the quotient's character lattice is Z^n.
    """

    n: int
    components: tuple

    def quasi_split_lattice(self, group):
        return direct_sum(*[perm_lattice(group, h) for h in self.components])

    def is_regular_free(self):
        return all(tuple(h) == (0,) for h in self.components)


@dataclass(frozen=True)
class TorusLattice:
    """A character lattice with provenance bookkeeping."""

    lattice: GLattice
    provenance: str  # norm_one | weil_restriction | quotient | explicit | direct_sum
    family: FamilyDatum | None = None

    @property
    def group(self):
        return self.lattice.group

    @property
    def rank(self):
        return self.lattice.rank

    def direct_sum(self, other):
        if self.group != other.group:
            raise InvalidSpec("direct sum of tori over different splitting groups")
        fam = None
        if self.family and other.family:
            fam = FamilyDatum(self.family.n + other.family.n,
                              self.family.components + other.family.components)
        return TorusLattice(direct_sum(self.lattice, other.lattice),
                            "direct_sum", fam)


def norm_one_lattice(group):
    """Character lattice of the norm-one torus: Z[G]/(norm element).

    Realized as the quotient of Z[G] by the norm embedding of the trivial
    lattice; the classes of the first |G|-1 basis vectors give the basis.
    """
    n = len(group)
    reg = regular_lattice(group)
    triv = trivial_lattice(group, 1)
    norm = LatticeMorphism(triv, reg, IntMatrix.from_rows([[1]] * n))
    section = IntMatrix.from_triples(n, n - 1, [(i, i, 1) for i in range(n - 1)])
    quot, _ = quotient_lattice(norm, section=section)
    return TorusLattice(quot, "norm_one",
                        FamilyDatum(1, ((0,),)))


def norm_one_sequence(group):
    """The defining sequence 0 -> Z --norm--> Z[G] --> Z[G]/(norm) -> 0."""
    n = len(group)
    reg = regular_lattice(group)
    triv = trivial_lattice(group, 1)
    norm = LatticeMorphism(triv, reg, IntMatrix.from_rows([[1]] * n))
    section = IntMatrix.from_triples(n, n - 1, [(i, i, 1) for i in range(n - 1)])
    quot, proj = quotient_lattice(norm, section=section)
    return ShortExactSequenceZ(norm, proj)


def weil_restriction_lattice(group, sub_elems):
    """Character lattice of R_{K/F}(G_m) for the subgroup fixing K."""
    return TorusLattice(perm_lattice(group, sub_elems), "weil_restriction")


@dataclass(frozen=True)
class FlasquenessVerdict:
    ok: bool
    kind: str  # "flasque" or "coflasque"
    certificate: tuple  # ((subgroup elements, H^1 structure), ...)

    def __bool__(self):
        return self.ok


def flasqueness(lat, kind, degree_cap=None):
    """Decide flasqueness or coflasqueness with a per-subgroup certificate.

    coflasque: H^1(H, L) = 0 for every subgroup H; flasque: the same for
    the dual lattice.
    """
    if isinstance(lat, TorusLattice):
        lat = lat.lattice
    if kind not in ("flasque", "coflasque"):
        raise ValueError("kind must be 'flasque' or 'coflasque'")
    target = dual_lattice(lat) if kind == "flasque" else lat
    cert = []
    ok = True
    for sub in enumerate_subgroups(lat.group):
        res = restrict_lattice(target, sub)
        value = cohomology(res.group, res, 1, degree_cap=degree_cap).value
        cert.append((sub, value))
        if not value.is_trivial:
            ok = False
    return FlasquenessVerdict(ok, kind, tuple(cert))


def _invariant_images(module, p, surj_matrix, sub):
    """Images in M of a basis of P^H under the evaluation map."""
    p_inv = invariants_sublattice(restrict_lattice(p, sub))
    return surj_matrix @ p_inv


def coflasque_resolution(module, degree_cap=None):
    """0 -> C -> P -> M -> 0 with P permutation and C certified coflasque.

    Walking the subgroups from largest to smallest, P gains one copy of
    Z[G/H] per basis vector of M^H whenever the map built so far does not
    yet carry P^H onto M^H (the coset gH goes to g.v).  The trivial
    subgroup comes last, so the map ends up surjective, and surjectivity
    of every P^H -> M^H makes the kernel coflasque; the certificate
    re-proves that subgroup by subgroup instead of trusting the argument.
    """
    if isinstance(module, TorusLattice):
        module = module.lattice
    group = module.group
    subs = sorted(enumerate_subgroups(group), key=lambda s: (-len(s), s))
    pieces = []
    columns = []  # one column of the evaluation map per basis vector of P

    def current():
        if not pieces:
            return trivial_lattice(group, 0), IntMatrix.zeros(module.rank, 0)
        p = direct_sum(*[perm_lattice(group, sub) for sub in pieces])
        mat = IntMatrix.from_rows(
            [[col[r] for col in columns] for r in range(module.rank)])
        return p, mat

    for sub in subs:
        inv = invariants_sublattice(restrict_lattice(module, sub))
        if inv.cols == 0:
            continue
        p_cur, mat_cur = current()
        images = _invariant_images(module, p_cur, mat_cur, sub)
        if in_column_span(images, inv):
            continue
        cs = _cosets(group, sub)
        for b in range(inv.cols):
            v = [inv.entry(r, b) for r in range(module.rank)]
            pieces.append(sub)
            for coset in cs:
                g = coset[0]
                img = module.action[g] @ IntMatrix.column(v)
                columns.append([img.entry(r, 0) for r in range(module.rank)])
    p, surj_matrix = current()
    surj = LatticeMorphism(p, module, surj_matrix)
    if not verify_equivariant_map(surj):
        raise AssertionError("evaluation map lost equivariance")
    ker = kernel_basis(surj_matrix)
    c_action = []
    for g in range(len(group)):
        moved = p.action[g] @ ker
        coords = solve_columns(ker, moved)
        if coords is None:
            raise AssertionError("kernel is not stable under the action")
        c_action.append(coords)
    c = GLattice(group, ker.cols, tuple(c_action), origin=("coflasque_kernel",))
    incl = LatticeMorphism(c, p, ker)
    ses = ShortExactSequenceZ(incl, surj)
    cert = flasqueness(c, "coflasque", degree_cap=degree_cap)
    return ses, cert


@dataclass(frozen=True)
class FlasqueResolutionResult:
    """0 -> S -> P -> T -> 0 on characters with P permutation, T flasque."""

    ses: ShortExactSequenceZ
    certificate: FlasquenessVerdict

    @property
    def flasque_quotient(self):
        return self.ses.quot


def flasque_resolution(s_hat, degree_cap=None):
    """Dualize the coflasque resolution of the dual lattice."""
    lat = s_hat.lattice if isinstance(s_hat, TorusLattice) else s_hat
    co_ses, _ = coflasque_resolution(dual_lattice(lat), degree_cap=degree_cap)
    p_dual = dual_lattice(co_ses.mid)
    t_flasque = dual_lattice(co_ses.sub)
    left = LatticeMorphism(lat, p_dual, co_ses.right.matrix.transpose())
    right = LatticeMorphism(p_dual, t_flasque, co_ses.left.matrix.transpose())
    ses = ShortExactSequenceZ(left, right)
    cert = flasqueness(t_flasque, "flasque", degree_cap=degree_cap)
    if not cert.ok:
        raise AssertionError("constructed quotient failed its flasqueness certificate")
    return FlasqueResolutionResult(ses, cert)


def is_permutation_in_basis(lat):
    """Whether every action matrix is a permutation matrix in this basis.

    Recognition up to a change of basis is deliberately not attempted.
    """
    if isinstance(lat, TorusLattice):
        lat = lat.lattice
    return all(is_permutation_matrix(m) for m in lat.action)


def _cosets(group, sub):
    from .glattice import cosets
    return cosets(group, sub)
