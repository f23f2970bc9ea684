"""Finite groups and G-lattices.

A group is given by generators (permutations of a common finite set, or
unimodular integer matrices of a common size); its elements are enumerated
by breadth-first closure with lexicographic tie-breaks, so element indices
are reproducible.  The identity always gets index 0.

A G-lattice is a free Z-module of finite rank together with an action of
the group by unimodular matrices.  Closure operations (dual, direct sum,
tensor, symmetric and exterior powers, permutation lattices on cosets,
quotients by saturated sublattices) all fix their basis conventions here,
because downstream results are compared entry by entry:

  * sym uses multiset monomials as nondecreasing index tuples in
    lexicographic order;
  * wedge uses strictly increasing index tuples in lexicographic order,
    with the usual sign bookkeeping;
  * tensor uses (i, j) pairs, left index major;
  * perm(G, H) uses the left cosets of H ordered by their minimal element
    index, with the left-translation action;
  * dual acts by inverse-transpose.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .intlin import (
    AbelianGroupStructure,
    IntMatrix,
    det,
    in_column_span,
    invariant_factors,
    kernel_basis,
    matrix_rank,
    smith_decompose,
    solve_columns,
    unimodular_inverse,
)

DEFAULT_GROUP_CAP = 64
DEFAULT_MAX_RANK = 4096


class ClosureCapExceeded(Exception):
    """Generator closure ran past the configured group size cap."""


class NotInvertible(Exception):
    """A matrix generator is not unimodular."""


class RankOverflow(Exception):
    """A lattice construction would exceed the configured rank bound."""


class InvalidSpec(Exception):
    """Malformed construction request or lattice expression."""


class NotSaturated(Exception):
    """Quotient by a non-saturated sublattice; carries the torsion factors."""

    def __init__(self, factors):
        super().__init__(f"cokernel has torsion, invariant factors {list(factors)}")
        self.factors = tuple(factors)


class NotInjective(Exception):
    """The supposed inclusion has a nontrivial kernel."""


# ---------------------------------------------------------------------------
# element keys: permutations and matrices under one composition interface
# ---------------------------------------------------------------------------


def _perm_key(seq):
    p = tuple(int(x) for x in seq)
    n = len(p)
    if sorted(p) == list(range(1, n + 1)):
        p = tuple(x - 1 for x in p)
    if sorted(p) != list(range(n)):
        raise InvalidSpec(f"not a permutation: {seq!r}")
    return ("perm", p)


def _matrix_key(mat):
    if mat.rows != mat.cols:
        raise InvalidSpec("matrix generator is not square")
    d = det(mat)
    if d not in (1, -1):
        raise NotInvertible(f"matrix generator has determinant {d}")
    return ("mat", mat.rows, tuple(tuple(row) for row in mat.to_rows()))


def _key_compose(a, b):
    # group product a*b; permutations act on points by (a*b)(x) = a(b(x))
    if a[0] == "perm":
        pa, pb = a[1], b[1]
        return ("perm", tuple(pa[x] for x in pb))
    n = a[1]
    ra, rb = a[2], b[2]
    prod = tuple(
        tuple(sum(ra[i][k] * rb[k][j] for k in range(n)) for j in range(n))
        for i in range(n)
    )
    return ("mat", n, prod)


def _key_identity_like(key):
    if key[0] == "perm":
        return ("perm", tuple(range(len(key[1]))))
    n = key[1]
    return ("mat", n, tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))


class FiniteGroup:
    """A finite group with enumerated elements and a full multiplication table.

    ``elements[i]`` is the canonical key of element i (identity at index 0),
    ``mul[i][j]`` the index of the product, ``inv[i]`` the inverse index.
    ``parents[i]`` records how BFS reached element i as (parent, generator).
    """

    __slots__ = ("elements", "mul", "inv", "identity", "generator_indices",
                 "parents", "name", "_subgroups")

    def __init__(self, elements, mul, inv, generator_indices, parents, name=None):
        self.elements = elements
        self.mul = mul
        self.inv = inv
        self.identity = 0
        self.generator_indices = generator_indices
        self.parents = parents
        self.name = name
        self._subgroups = None

    def __len__(self):
        return len(self.elements)

    @property
    def order(self):
        return len(self.elements)

    def element_order(self, i):
        n = 1
        x = i
        while x != 0:
            x = self.mul[x][i]
            n += 1
        return n

    def is_abelian(self):
        mul = self.mul
        n = len(self.elements)
        return all(mul[i][j] == mul[j][i] for i in range(n) for j in range(i + 1, n))

    def is_cyclic(self):
        return self.cyclic_generator() is not None

    def cyclic_generator(self):
        n = len(self.elements)
        for i in range(n):
            if self.element_order(i) == n:
                return i
        return None

    def fingerprint(self):
        return (len(self.elements), tuple(tuple(row) for row in self.mul))

    def __eq__(self, other):
        if not isinstance(other, FiniteGroup):
            return NotImplemented
        return self.elements == other.elements and self.mul == other.mul

    def __repr__(self):
        label = self.name or f"group of order {len(self.elements)}"
        return f"FiniteGroup({label})"


def build_group(generators, cap=DEFAULT_GROUP_CAP, name=None):
    """Enumerate the closure of the given generators.

    Generators are permutations of a common set (0- or 1-indexed sequences)
    or square unimodular IntMatrix values of a common size.  BFS from the
    identity, new elements of each layer sorted lexicographically, so that
    indices are reproducible run to run.
    """
    keys = []
    for g in generators:
        if isinstance(g, IntMatrix):
            keys.append(_matrix_key(g))
        else:
            keys.append(_perm_key(g))
    kinds = {k[0] for k in keys} or {"perm"}
    if len(kinds) > 1:
        raise InvalidSpec("mixed permutation and matrix generators")
    sizes = {len(k[1]) if k[0] == "perm" else k[1] for k in keys}
    if len(sizes) > 1:
        raise InvalidSpec("generators act on sets/spaces of different sizes")

    if keys:
        ident = _key_identity_like(keys[0])
    else:
        ident = ("perm", (0,))
    index = {ident: 0}
    order = [ident]
    parents = [None]
    layer = [0]
    while layer:
        found = []
        for i in layer:
            for gi, gk in enumerate(keys):
                prod = _key_compose(order[i], gk)
                if prod not in index:
                    index[prod] = -1  # reserve; real index assigned after sort
                    found.append((prod, i, gi))
        found.sort(key=lambda t: t[0])
        layer = []
        for key, parent, gi in found:
            idx = len(order)
            index[key] = idx
            order.append(key)
            parents.append((parent, gi))
            layer.append(idx)
            if len(order) > cap:
                raise ClosureCapExceeded(
                    f"closure exceeds the cap of {cap} elements")
    n = len(order)
    mul = [[index[_key_compose(order[i], order[j])] for j in range(n)] for i in range(n)]
    inv = [mul[i].index(0) for i in range(n)]
    # group-table sanity: associativity, identity, inverses
    for i in range(n):
        if mul[0][i] != i or mul[i][0] != i:
            raise AssertionError("identity misbehaves")
    for i in range(n):
        for j in range(n):
            mij = mul[i][j]
            for k in range(n):
                if mul[mij][k] != mul[i][mul[j][k]]:
                    raise AssertionError("multiplication table is not associative")
    gen_indices = tuple(index[k] for k in keys)
    return FiniteGroup(tuple(order), tuple(tuple(r) for r in mul), tuple(inv),
                       gen_indices, tuple(parents), name=name)


_BUILTIN_CACHE = {}


def builtin_group(spec):
    """C<n>, S3, D4 or Q8 by name."""
    name = spec.strip()
    if name in _BUILTIN_CACHE:
        return _BUILTIN_CACHE[name]
    if name.startswith("C") and name[1:].isdigit():
        n = int(name[1:])
        if n < 1:
            raise InvalidSpec(f"bad cyclic order in {name!r}")
        if n == 1:
            g = build_group([], name="C1")
        else:
            cyc = tuple((x + 1) % n for x in range(n))
            g = build_group([cyc], name=name)
    elif name == "S3":
        g = build_group([(1, 0, 2), (1, 2, 0)], name="S3")
    elif name == "D4":
        g = build_group([(1, 2, 3, 0), (0, 3, 2, 1)], name="D4")
    elif name == "Q8":
        # points are 1, -1, i, -i, j, -j, k, -k; generators act by left
        # multiplication, realizing i^2 = j^2 = k^2 = ijk = -1
        perm_i = (2, 3, 1, 0, 6, 7, 5, 4)
        perm_j = (4, 5, 7, 6, 1, 0, 2, 3)
        g = build_group([perm_i, perm_j], name="Q8")
    else:
        raise InvalidSpec(f"unknown builtin group {spec!r}")
    _BUILTIN_CACHE[name] = g
    return g


def _closure_of(group, seed):
    mul = group.mul
    elems = set(seed) | {0}
    frontier = list(elems)
    while frontier:
        nxt = []
        for a in frontier:
            for b in list(elems):
                for c in (mul[a][b], mul[b][a]):
                    if c not in elems:
                        elems.add(c)
                        nxt.append(c)
        frontier = nxt
    return frozenset(elems)


def enumerate_subgroups(group):
    """Every subgroup exactly once, sorted by (order, element tuple)."""
    if group._subgroups is not None:
        return group._subgroups
    n = len(group)
    found = {frozenset({0})}
    frontier = [frozenset({0})]
    while frontier:
        sub = frontier.pop()
        for g in range(n):
            if g in sub:
                continue
            bigger = _closure_of(group, sub | {g})
            if bigger not in found:
                found.add(bigger)
                frontier.append(bigger)
    subs = sorted((tuple(sorted(s)) for s in found), key=lambda t: (len(t), t))
    group._subgroups = subs
    return subs


def subgroup_group(group, elems):
    """Realize a subgroup as its own FiniteGroup.

    Returns (H, embed) where embed maps H's element indices to indices in
    the parent group.
    """
    elems = tuple(sorted(set(elems)))
    sub = _closure_of(group, elems)
    if sub != frozenset(elems):
        raise InvalidSpec("element set is not closed under multiplication")
    gens = [group.elements[i] for i in elems if i != 0]
    if not gens:
        gens = [group.elements[0]]  # keep the parent's ground set for the key
    raw = []
    for k in gens:
        if k[0] == "perm":
            raw.append(k[1])
        else:
            raw.append(IntMatrix.from_rows(k[2]))
    h = build_group(raw, cap=len(group), name=None)
    lookup = {key: i for i, key in enumerate(group.elements)}
    embed = tuple(lookup[key] for key in h.elements)
    return h, embed


# ---------------------------------------------------------------------------
# lattices
# ---------------------------------------------------------------------------


def _is_identity(mat):
    if mat.rows != mat.cols:
        return False
    return all(v == 1 and r == c for r, c, v in mat.items()) and mat.nnz == mat.rows


class GLattice:
    """A free Z-module with a unimodular action of a finite group.

    ``action[i]`` is the matrix of element i in the chosen basis.  The
    homomorphism property action(g) action(h) = action(gh) is checked
    exhaustively at construction (sparse products keep this cheap even for
    the signed-permutation actions of symmetric powers).
    """

    __slots__ = ("group", "rank", "action", "basis_labels", "origin")

    def __init__(self, group, rank, action, basis_labels=None, origin=None):
        if rank < 0:
            raise InvalidSpec("negative rank")
        action = tuple(m.sparsified() for m in action)
        if len(action) != len(group):
            raise InvalidSpec("need one action matrix per group element")
        for m in action:
            if m.rows != rank or m.cols != rank:
                raise InvalidSpec("action matrix has wrong size")
        self.group = group
        self.rank = rank
        self.action = action
        self.basis_labels = tuple(basis_labels) if basis_labels else None
        self.origin = origin
        self._verify()

    def _verify(self):
        # the homomorphism property plus rho(id) = id forces every action
        # matrix to be unimodular (rho(g) rho(g^-1) = id), so no determinant
        # scan is needed here
        if self.rank == 0:
            return
        if not _is_identity(self.action[0]):
            raise InvalidSpec("identity element must act as the identity matrix")
        mul = self.group.mul
        n = len(self.group)
        for i in range(n):
            for j in range(n):
                if self.action[i] @ self.action[j] != self.action[mul[i][j]]:
                    raise InvalidSpec(
                        f"action is not a homomorphism at elements ({i}, {j})")

    def act(self, i):
        return self.action[i]

    def label(self, b):
        if self.basis_labels:
            return self.basis_labels[b]
        return f"b{b}"

    def fingerprint(self):
        return (self.group.fingerprint(), self.rank,
                tuple(tuple(m.items()) for m in self.action))

    def __eq__(self, other):
        if not isinstance(other, GLattice):
            return NotImplemented
        return (self.group == other.group and self.rank == other.rank
                and self.action == other.action)

    def __repr__(self):
        o = f", origin={self.origin[0]}" if self.origin else ""
        return f"GLattice(rank={self.rank}, |G|={len(self.group)}{o})"


def restrict_lattice(lat, sub_elems):
    """Restrict the action to a subgroup, returned as its own group."""
    h, embed = subgroup_group(lat.group, sub_elems)
    action = tuple(lat.action[embed[i]] for i in range(len(h)))
    return GLattice(h, lat.rank, action, basis_labels=lat.basis_labels,
                    origin=("restrict", lat.origin))


def trivial_lattice(group, rank=1):
    ident = IntMatrix.identity(rank)
    return GLattice(group, rank, tuple(ident for _ in range(len(group))),
                    origin=("trivial", rank))


def zero_lattice(group):
    z = IntMatrix.zeros(0, 0)
    return GLattice(group, 0, tuple(z for _ in range(len(group))),
                    origin=("zero",))


def cosets(group, sub_elems):
    """Left cosets of a subgroup, each a sorted tuple, ordered by minimum."""
    sub = frozenset(sub_elems)
    if _closure_of(group, sub) != sub:
        raise InvalidSpec("not a subgroup")
    seen = set()
    out = []
    for g in range(len(group)):
        if g in seen:
            continue
        cs = tuple(sorted(group.mul[g][h] for h in sub))
        seen.update(cs)
        out.append(cs)
    out.sort(key=lambda c: c[0])
    return out

def perm_lattice(group, sub_elems):
    """Z[G/H] on the left cosets of H with the left-translation action."""
    cs = cosets(group, sub_elems)
    rep = {}
    for i, c in enumerate(cs):
        for x in c:
            rep[x] = i
    r = len(cs)
    action = []
    for g in range(len(group)):
        triples = [(rep[group.mul[g][c[0]]], i, 1) for i, c in enumerate(cs)]
        action.append(IntMatrix.from_triples(r, r, triples))
    labels = tuple(f"[g{c[0]}]" for c in cs)
    return GLattice(group, r, tuple(action), basis_labels=labels,
                    origin=("perm", tuple(sorted(set(sub_elems) | {0}))))


def regular_lattice(group):
    return perm_lattice(group, (0,))


def dual_lattice(lat):
    inv = lat.group.inv
    action = tuple(lat.action[inv[g]].transpose() for g in range(len(lat.group)))
    labels = tuple(f"{l}*" for l in lat.basis_labels) if lat.basis_labels else None
    return GLattice(lat.group, lat.rank, action, basis_labels=labels,
                    origin=("dual", lat.origin))


def direct_sum(*lats):
    if not lats:
        raise InvalidSpec("empty direct sum")
    group = lats[0].group
    for l in lats:
        if l.group != group:
            raise InvalidSpec("direct sum over different groups")
    rank = sum(l.rank for l in lats)
    action = []
    for g in range(len(group)):
        triples = []
        off = 0
        for l in lats:
            for r, c, v in l.action[g].items():
                triples.append((off + r, off + c, v))
            off += l.rank
        action.append(IntMatrix.from_triples(rank, rank, triples))
    labels = None
    if all(l.basis_labels for l in lats):
        labels = tuple(lab for l in lats for lab in l.basis_labels)
    return GLattice(group, rank, tuple(action), basis_labels=labels,
                    origin=("sum", tuple(l.origin for l in lats)))


def tensor_lattice(a, b, max_rank=DEFAULT_MAX_RANK):
    if a.group != b.group:
        raise InvalidSpec("tensor over different groups")
    rank = a.rank * b.rank
    if rank > max_rank:
        raise RankOverflow(f"tensor rank {rank} exceeds bound {max_rank}")
    action = []
    for g in range(len(a.group)):
        triples = []
        for r1, c1, v1 in a.action[g].items():
            for r2, c2, v2 in b.action[g].items():
                triples.append((r1 * b.rank + r2, c1 * b.rank + c2, v1 * v2))
        action.append(IntMatrix.from_triples(rank, rank, triples))
    labels = None
    if a.basis_labels and b.basis_labels:
        labels = tuple(f"{x}⊗{y}" for x in a.basis_labels for y in b.basis_labels)
    return GLattice(a.group, rank, tuple(action), basis_labels=labels,
                    origin=("tensor", a.origin, b.origin))


def sym_basis(rank, q):
    """Nondecreasing index tuples of length q, lexicographic order."""
    if q == 0:
        return [()]
    out = []

    def rec(prefix, start):
        if len(prefix) == q:
            out.append(tuple(prefix))
            return
        for i in range(start, rank):
            prefix.append(i)
            rec(prefix, i)
            prefix.pop()

    rec([], 0)
    return out


def wedge_basis(rank, q):
    return list(combinations(range(rank), q))


def _monomial_label(lat, mono):
    labels = [lat.label(i) for i in mono]
    if all(len(l) == 1 for l in labels):
        return "".join(labels)
    return "·".join(labels)


def sym_power(lat, q, max_rank=DEFAULT_MAX_RANK):
    """S^q of the lattice on the multiset-monomial basis."""
    if q < 0:
        raise InvalidSpec("negative symmetric power")
    if q == 0:
        out = trivial_lattice(lat.group, 1)
        return GLattice(lat.group, 1, out.action, basis_labels=("1",),
                        origin=("sym", lat.origin, 0))
    basis = sym_basis(lat.rank, q)
    rank = len(basis)
    if rank > max_rank:
        raise RankOverflow(f"sym rank {rank} exceeds bound {max_rank}")
    pos = {m: i for i, m in enumerate(basis)}
    action = []
    for g in range(len(lat.group)):
        cols = lat.action[g].col_dicts()
        triples = []
        for src, mono in enumerate(basis):
            # expand the product of the images of the factors
            poly = {(): 1}
            for idx in mono:
                nxt = {}
                for mkey, coeff in poly.items():
                    for j, v in cols[idx].items():
                        key = tuple(sorted(mkey + (j,)))
                        nxt[key] = nxt.get(key, 0) + coeff * v
                poly = nxt
            for mkey, coeff in poly.items():
                if coeff:
                    triples.append((pos[mkey], src, coeff))
        action.append(IntMatrix.from_triples(rank, rank, triples))
    labels = tuple(_monomial_label(lat, m) for m in basis)
    return GLattice(lat.group, rank, tuple(action), basis_labels=labels,
                    origin=("sym", lat.origin, q))


def wedge_power(lat, q, max_rank=DEFAULT_MAX_RANK):
    """Lambda^q of the lattice on increasing index tuples, with signs."""
    if q < 0:
        raise InvalidSpec("negative exterior power")
    if q == 0:
        return GLattice(lat.group, 1,
                        tuple(IntMatrix.identity(1) for _ in range(len(lat.group))),
                        basis_labels=("1",), origin=("wedge", lat.origin, 0))
    if q > lat.rank:
        return zero_lattice(lat.group)
    basis = wedge_basis(lat.rank, q)
    rank = len(basis)
    if rank > max_rank:
        raise RankOverflow(f"wedge rank {rank} exceeds bound {max_rank}")
    pos = {m: i for i, m in enumerate(basis)}
    action = []
    for g in range(len(lat.group)):
        cols = lat.action[g].col_dicts()
        triples = []
        for src, mono in enumerate(basis):
            # antisymmetric expansion: insert one factor at a time
            poly = {(): 1}
            for idx in mono:
                nxt = {}
                for mkey, coeff in poly.items():
                    for j, v in cols[idx].items():
                        if j in mkey:
                            continue
                        p = sum(1 for t in mkey if t < j)
                        sign = -1 if (len(mkey) - p) % 2 else 1
                        key = tuple(sorted(mkey + (j,)))
                        w = nxt.get(key, 0) + sign * coeff * v
                        if w:
                            nxt[key] = w
                        else:
                            nxt.pop(key, None)
                poly = nxt
            for mkey, coeff in poly.items():
                triples.append((pos[mkey], src, coeff))
        action.append(IntMatrix.from_triples(rank, rank, triples))
    labels = tuple("∧".join(lat.label(i) for i in m) for m in basis)
    return GLattice(lat.group, rank, tuple(action), basis_labels=labels,
                    origin=("wedge", lat.origin, q))


def explicit_lattice(group, generator_matrices, basis_labels=None):
    """Lattice from matrices for the group's generators, extended by words."""
    gens = group.generator_indices
    if len(generator_matrices) != len(gens):
        raise InvalidSpec(
            f"need {len(gens)} matrices (one per generator), got {len(generator_matrices)}")
    mats = [m if isinstance(m, IntMatrix) else IntMatrix.from_rows(m)
            for m in generator_matrices]
    ranks = {m.rows for m in mats} | {m.cols for m in mats}
    if len(ranks) > 1:
        raise InvalidSpec("generator matrices of different sizes")
    for m in mats:
        if m.rows != m.cols or det(m) not in (1, -1):
            raise NotInvertible("generator matrix is not unimodular")
    rank = mats[0].rows if mats else 0
    by_gen = {gi: m for gi, m in zip(gens, mats)}
    action = [None] * len(group)
    action[0] = IntMatrix.identity(rank)
    for i in range(1, len(group)):
        parent, gi = group.parents[i]
        if action[parent] is None:
            raise AssertionError("BFS parent order broken")
        action[i] = action[parent] @ by_gen[gens[gi]]
    return GLattice(group, rank, tuple(action), basis_labels=basis_labels,
                    origin=("explicit",))


# ---------------------------------------------------------------------------
# morphisms, verdicts, exact sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LatticeMorphism:
    """A Z-linear map between lattices over the same group.

    Equivariance (matrix committing with the two actions) is the intended
    invariant; construction checks shapes only, use verify_equivariant_map
    to certify, as sequence and complex constructors do.
    """

    source: GLattice
    target: GLattice
    matrix: IntMatrix

    def __post_init__(self):
        if self.source.group != self.target.group:
            raise InvalidSpec("morphism between lattices over different groups")
        if self.matrix.rows != self.target.rank or self.matrix.cols != self.source.rank:
            raise InvalidSpec(
                f"matrix is {self.matrix.rows}x{self.matrix.cols}, expected "
                f"{self.target.rank}x{self.source.rank}")

    def compose(self, other):
        """self after other."""
        if other.target is not self.source and other.target != self.source:
            raise InvalidSpec("composition mismatch")
        return LatticeMorphism(other.source, self.target, self.matrix @ other.matrix)


@dataclass(frozen=True)
class EquivarianceVerdict:
    ok: bool
    element: int | None = None
    entry: tuple | None = None

    def __bool__(self):
        return self.ok


def verify_equivariant_map(f):
    """Check matrix . action_source(g) == action_target(g) . matrix for all g."""
    m = f.matrix
    for g in range(len(f.source.group)):
        lhs = m @ f.source.action[g]
        rhs = f.target.action[g] @ m
        if lhs != rhs:
            d = lhs - rhs
            r, c, _ = next(iter(d.items()))
            return EquivarianceVerdict(False, element=g, entry=(r, c))
    return EquivarianceVerdict(True)


def identity_morphism(lat):
    return LatticeMorphism(lat, lat, IntMatrix.identity(lat.rank))


def sym_power_morphism(f, q):
    """S^q of a morphism, on the multiset-monomial bases."""
    src = sym_power(f.source, q)
    tgt = sym_power(f.target, q)
    src_basis = sym_basis(f.source.rank, q)
    cols = f.matrix.col_dicts()
    tgt_pos = {m: i for i, m in enumerate(sym_basis(f.target.rank, q))}
    triples = []
    for j, mono in enumerate(src_basis):
        poly = {(): 1}
        for idx in mono:
            nxt = {}
            for mkey, coeff in poly.items():
                for t, v in cols[idx].items():
                    key = tuple(sorted(mkey + (t,)))
                    nxt[key] = nxt.get(key, 0) + coeff * v
            poly = nxt
        for mkey, coeff in poly.items():
            if coeff:
                triples.append((tgt_pos[mkey], j, coeff))
    return LatticeMorphism(src, tgt, IntMatrix.from_triples(tgt.rank, src.rank, triples))


def sym2_into_tensor(lat):
    """S^2 L -> L (x) L, x.y -> x(x)y + y(x)x."""
    s2 = sym_power(lat, 2)
    t2 = tensor_lattice(lat, lat)
    r = lat.rank
    triples = []
    for j, (a, b) in enumerate(sym_basis(r, 2)):
        if a == b:
            triples.append((a * r + a, j, 2))
        else:
            triples.append((a * r + b, j, 1))
            triples.append((b * r + a, j, 1))
    return LatticeMorphism(s2, t2, IntMatrix.from_triples(t2.rank, s2.rank, triples))


def tensor_onto_sym2(lat):
    """L (x) L -> S^2 L, the natural quotient x(x)y -> x.y."""
    s2 = sym_power(lat, 2)
    t2 = tensor_lattice(lat, lat)
    r = lat.rank
    pos = {m: i for i, m in enumerate(sym_basis(r, 2))}
    triples = []
    for a in range(r):
        for b in range(r):
            triples.append((pos[tuple(sorted((a, b)))], a * r + b, 1))
    return LatticeMorphism(t2, s2, IntMatrix.from_triples(s2.rank, t2.rank, triples))


def invariants_sublattice(lat):
    """Saturated basis of {v : g v = v for all g}, as columns.

    Computed as the kernel of the stacked matrices action(g) - id over the
    generators (whose fixed spaces already cut out the full invariants).
    """
    gens = lat.group.generator_indices
    if not gens or lat.rank == 0:
        return IntMatrix.identity(lat.rank)
    ident = IntMatrix.identity(lat.rank)
    stacked = IntMatrix.vstack([lat.action[g] - ident for g in gens])
    return kernel_basis(stacked)


def quotient_lattice(incl, section=None):
    """Quotient of incl.target by the saturated image of incl.

    Returns (Q, proj) with proj the projection morphism; proj . incl = 0.
    A ``section`` (matrix of complementary basis vectors) may be supplied to
    pin the quotient basis; it must complete the image to a basis of the
    target.  Without one, a complement is derived from the Smith form.
    """
    m = incl.matrix
    n = incl.target.rank
    k = incl.source.rank
    if matrix_rank(m) != k:
        raise NotInjective("inclusion matrix does not have full column rank")
    facs = invariant_factors(m)
    if any(d != 1 for d in facs):
        raise NotSaturated([d for d in facs if d != 1])
    if not verify_equivariant_map(incl):
        raise InvalidSpec("inclusion is not equivariant")
    if section is None:
        dec = smith_decompose(m)
        uinv = unimodular_inverse(dec.U)
        section = IntMatrix.from_triples(
            n, n - k,
            [(r, c - k, uinv.entry(r, c)) for r in range(n) for c in range(k, n)
             if uinv.entry(r, c)],
        )
    else:
        if section.rows != n or section.cols != n - k:
            raise InvalidSpec("section has the wrong shape")
    full = IntMatrix.hstack([m, section])
    if det(full) not in (1, -1):
        raise InvalidSpec("section does not complete the image to a basis")
    inv_full = unimodular_inverse(full.densified())
    proj_rows = [[inv_full.entry(r, c) for c in range(n)] for r in range(k, n)]
    proj = IntMatrix.from_rows(proj_rows) if n > k else IntMatrix.zeros(0, n)
    # induced action: P . rho(g) . C in the quotient basis
    action = []
    for g in range(len(incl.target.group)):
        action.append(proj @ incl.target.action[g] @ section)
    labels = None
    if incl.target.basis_labels:
        labels = []
        for c in range(n - k):
            col = [section.entry(r, c) for r in range(n)]
            nz = [(r, v) for r, v in enumerate(col) if v]
            if len(nz) == 1 and nz[0][1] in (1, -1):
                sgn = "-" if nz[0][1] == -1 else ""
                labels.append(sgn + incl.target.basis_labels[nz[0][0]])
            else:
                labels.append(f"q{c}")
        labels = tuple(labels)
    quot = GLattice(incl.target.group, n - k, tuple(action), basis_labels=labels,
                    origin=("quotient", incl.target.origin))
    proj_map = LatticeMorphism(incl.target, quot, proj)
    if not verify_equivariant_map(proj_map):
        raise AssertionError("projection failed equivariance")
    if not (proj @ m).is_zero():
        raise AssertionError("projection does not kill the sublattice")
    return quot, proj_map


@dataclass(frozen=True)
class ShortExactSequenceZ:
    """0 -> left.source -> left.target = right.source -> right.target -> 0.

    Construction verifies equivariance, injectivity/surjectivity, and that
    the image of left equals the kernel of right as saturated sublattices.
    """

    left: LatticeMorphism
    right: LatticeMorphism

    def __post_init__(self):
        if self.left.target != self.right.source:
            raise InvalidSpec("middle lattices disagree")
        if not verify_equivariant_map(self.left):
            raise InvalidSpec("left map is not equivariant")
        if not verify_equivariant_map(self.right):
            raise InvalidSpec("right map is not equivariant")
        if not (self.right.matrix @ self.left.matrix).is_zero():
            raise InvalidSpec("right . left != 0")
        if matrix_rank(self.left.matrix) != self.left.source.rank:
            raise NotInjective("left map is not injective")
        coker = invariant_factors(self.right.matrix)
        if len(coker) != self.right.target.rank or any(d != 1 for d in coker):
            raise InvalidSpec("right map is not surjective")
        ker = kernel_basis(self.right.matrix)
        if not in_column_span(self.left.matrix, ker):
            raise InvalidSpec("kernel of right exceeds image of left")
        if not in_column_span(ker, self.left.matrix):
            raise InvalidSpec("image of left exceeds kernel of right")

    @property
    def sub(self):
        return self.left.source

    @property
    def mid(self):
        return self.left.target

    @property
    def quot(self):
        return self.right.target


def is_permutation_matrix(mat):
    if mat.rows != mat.cols:
        return False
    if mat.nnz != mat.rows:
        return False
    rows_seen = set()
    cols_seen = set()
    for r, c, v in mat.items():
        if v != 1:
            return False
        rows_seen.add(r)
        cols_seen.add(c)
    return len(rows_seen) == mat.rows and len(cols_seen) == mat.rows
