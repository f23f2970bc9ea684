"""Finite group cohomology of G-lattices.

Two computation routes, kept deliberately independent so one can certify
the other:

  * ``cohomology`` uses the 2-periodic resolution for cyclic groups and a
    normalized inhomogeneous cochain complex otherwise (cochains vanish
    when any argument is the identity, which cuts the rank in degree i to
    (|G|-1)^i * rank M);
  * ``brute_force_cohomology`` builds the unnormalized cocycle conditions
    over all of G^i and reads H^i off one kernel/image computation.

``cohomology_qz`` is the divisible-coefficient shift: for i >= 1,
H^i(G, M (x) Q/Z) = H^{i+1}(G, M), via 0 -> M -> M(x)Q -> M(x)Q/Z -> 0
with the rational middle term cohomologically trivial in positive degree;
in degree 0 the value is (Q/Z)^{rank M^G} (+) H^1(G, M), which splits off
because divisible groups are direct summands.

Differentials are cached per (group, module, degree); the cache is guarded
by a lock and can spill to disk when TORINV_CACHE_DIR is set.
"""

from __future__ import annotations

import hashlib
import os
import threading
from dataclasses import dataclass

from .intlin import (
    AbelianGroupStructure,
    IntMatrix,
    format_matrix,
    homology_structure,
    parse_matrix,
)
from .glattice import (
    GLattice,
    invariants_sublattice,
    restrict_lattice,
    perm_lattice,
    subgroup_group,
    trivial_lattice,
)

DEFAULT_NONABELIAN_CAP = 3  # for |G| >= 8
DEFAULT_SMALL_CAP = 5
BRUTE_FORCE_LIMIT = 10 ** 5

CACHE_DIR_ENV = "TORINV_CACHE_DIR"


class DegreeCapExceeded(Exception):
    def __init__(self, degree, cap, cost):
        super().__init__(
            f"degree {degree} exceeds the cap {cap} "
            f"(a cochain differential there has about {cost} entries); "
            f"raise degree_cap explicitly to force the computation")
        self.degree = degree
        self.cap = cap
        self.cost = cost


class SizeExceeded(Exception):
    """Brute-force oracle precondition |G|^(i+1) * rank(M) <= 10^5 violated."""


class CancelledError(Exception):
    """Raised when a cancellation token fires inside a long computation."""


def _check_cancel(cancel):
    if cancel is not None and cancel():
        raise CancelledError()


@dataclass(frozen=True)
class CohomologyResult:
    """The value of H^degree(group, coefficient).

    ``divisible_rank`` is zero except for degree-0 values with Q/Z-shifted
    coefficients, where the group is (Q/Z)^divisible_rank (+) value.
    """

    group_name: str
    coefficient: str
    degree: int
    value: AbelianGroupStructure
    divisible_rank: int = 0

    def display(self):
        if self.divisible_rank == 0:
            return str(self.value)
        head = f"(Q/Z)^{self.divisible_rank}" if self.divisible_rank > 1 else "Q/Z"
        if self.value.is_trivial:
            return head
        return f"{head} (+) {self.value}"


def default_degree_cap(group):
    if group.is_cyclic():
        return None
    if len(group) >= 8 and not group.is_abelian():
        return DEFAULT_NONABELIAN_CAP
    return DEFAULT_SMALL_CAP


def _group_label(group):
    return group.name or f"order-{len(group)} group"


def _coefficient_label(lattice, label=None):
    if label:
        return label
    if lattice.origin:
        kind = lattice.origin[0]
        if kind == "trivial":
            r = lattice.origin[1]
            return "Z" if r == 1 else f"Z^{r}"
        if kind == "perm":
            return f"Z[G/H], H of order {len(lattice.origin[1])}"
    return f"lattice of rank {lattice.rank}"


# ---------------------------------------------------------------------------
# normalized cochain model
# ---------------------------------------------------------------------------


class CochainModel:
    """Normalized inhomogeneous cochains of a G-lattice.

    Degree-i cochains are maps G^i -> M vanishing whenever an argument is
    the identity; the basis is indexed by (tuple of nonidentity elements,
    module basis index), tuples ordered lexicographically by element index.
    ``differential(i)`` is the matrix of d^i : C^i -> C^{i+1}; d^{i+1} d^i = 0
    is asserted whenever two consecutive differentials are materialized.
    """

    def __init__(self, group, module, degree_cap=None):
        if module.group != group:
            raise ValueError("module is not over the given group")
        self.group = group
        self.module = module
        self.degree_cap = degree_cap
        self._diffs = {}
        self._lock = threading.Lock()

    def cochain_rank(self, i):
        return (len(self.group) - 1) ** i * self.module.rank

    def _tuple_index(self, tup):
        # nonidentity elements carry indices 1..n-1; mixed-radix, last digit fastest
        n1 = len(self.group) - 1
        t = 0
        for g in tup:
            t = t * n1 + (g - 1)
        return t

    def differential(self, i, cancel=None):
        with self._lock:
            if i in self._diffs:
                return self._diffs[i]
        mat = _disk_cache_load(self, i)
        if mat is None:
            mat = self._build_differential(i, cancel)
            _disk_cache_store(self, i, mat)
        with self._lock:
            self._diffs[i] = mat
        return mat

    def _build_differential(self, i, cancel=None):
        group = self.group
        module = self.module
        n = len(group)
        rank = module.rank
        rows = self.cochain_rank(i + 1)
        cols = self.cochain_rank(i)
        if rank == 0 or rows == 0:
            return IntMatrix.zeros(rows, cols)
        mul = group.mul
        triples = []
        nonid = range(1, n)
        act_items = [list(m.items()) for m in module.action]

        def rec(tup):
            _check_cancel(cancel)
            if len(tup) < i + 1:
                for g in nonid:
                    rec(tup + (g,))
                return
            out_base = self._tuple_index(tup) * rank
            # g1 . f(g2..)
            src = self._tuple_index(tup[1:]) * rank
            for r, c, v in act_items[tup[0]]:
                triples.append((out_base + r, src + c, v))
            # alternating interior face maps
            sign = -1
            for j in range(i):
                prod = mul[tup[j]][tup[j + 1]]
                if prod != 0:
                    face = tup[:j] + (prod,) + tup[j + 2:]
                    src = self._tuple_index(face) * rank
                    for m in range(rank):
                        triples.append((out_base + m, src + m, sign))
                sign = -sign
            # last face drops the final argument
            src = self._tuple_index(tup[:i]) * rank
            for m in range(rank):
                triples.append((out_base + m, src + m, sign))

        rec(())
        return IntMatrix.from_triples(rows, cols, triples)

    def homology(self, i, cancel=None):
        d_out = self.differential(i, cancel)
        d_in = self.differential(i - 1, cancel) if i >= 1 else None
        if d_in is not None and not (d_out @ d_in).is_zero():
            raise AssertionError("d^2 != 0 in the cochain model")
        return homology_structure(d_out, d_in)


def _fingerprint_digest(model, i):
    h = hashlib.sha256()
    h.update(repr((model.group.fingerprint(), model.module.fingerprint(), i)).encode())
    return h.hexdigest()


def _disk_cache_load(model, i):
    root = os.environ.get(CACHE_DIR_ENV)
    if not root:
        return None
    path = os.path.join(root, f"diff-{_fingerprint_digest(model, i)}.mat")
    if not os.path.exists(path):
        return None
    with open(path, "r", encoding="utf-8") as fh:
        return parse_matrix(fh.read())


def _disk_cache_store(model, i, mat):
    root = os.environ.get(CACHE_DIR_ENV)
    if not root:
        return
    os.makedirs(root, exist_ok=True)
    path = os.path.join(root, f"diff-{_fingerprint_digest(model, i)}.mat")
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(format_matrix(mat, sparse=True))
    os.replace(tmp, path)


_model_cache = {}
_model_lock = threading.Lock()


def _cochain_model(group, module):
    key = (group.fingerprint(), module.fingerprint())
    with _model_lock:
        model = _model_cache.get(key)
        if model is None:
            model = CochainModel(group, module)
            _model_cache[key] = model
    return model


# ---------------------------------------------------------------------------
# the main entry points
# ---------------------------------------------------------------------------


def _invariants_structure(module):
    return AbelianGroupStructure.free(invariants_sublattice(module).cols)


def _norm_matrix(module, g):
    n = len(module.group)
    total = IntMatrix.zeros(module.rank, module.rank)
    power = IntMatrix.identity(module.rank)
    for _ in range(module.group.element_order(g)):
        total = total + power
        power = module.action[g] @ power
    return total


def _cyclic_cohomology(group, module, i):
    g = group.cyclic_generator()
    ident = IntMatrix.identity(module.rank)
    delta = module.action[g] - ident
    if i == 0:
        return _invariants_structure(module)
    norm = _norm_matrix(module, g)
    if i % 2:
        return homology_structure(norm, delta)
    return homology_structure(delta, norm)


def cohomology(group, module, i, degree_cap=None, cancel=None, label=None):
    """H^i(G, M) as an AbelianGroupStructure, wrapped in a CohomologyResult.

    Cyclic groups go through the 2-periodic resolution and have no degree
    cap; everything else goes through the normalized cochain model, capped
    at ``degree_cap`` (defaults: 3 for nonabelian groups of order >= 8,
    else 5).
    """
    if i < 0:
        raise ValueError("negative degree")
    if module.group != group:
        raise ValueError("module is not over the given group")
    coeff = _coefficient_label(module, label)
    gname = _group_label(group)
    if group.is_cyclic():
        value = _cyclic_cohomology(group, module, i)
        return CohomologyResult(gname, coeff, i, value)
    cap = degree_cap if degree_cap is not None else default_degree_cap(group)
    if cap is not None and i > cap:
        cost = (len(group) - 1) ** (i + 1) * module.rank
        raise DegreeCapExceeded(i, cap, cost)
    if i == 0:
        return CohomologyResult(gname, coeff, 0, _invariants_structure(module))
    model = _cochain_model(group, module)
    return CohomologyResult(gname, coeff, i, model.homology(i, cancel))


def cohomology_qz(group, module, i, degree_cap=None, cancel=None, label=None):
    """H^i(G, M (x) Q/Z) via the integral degree shift."""
    if i < 0:
        raise ValueError("negative degree")
    coeff = _coefficient_label(module, label) + " (x) Q/Z"
    gname = _group_label(group)
    if i == 0:
        h1 = cohomology(group, module, 1, degree_cap=degree_cap, cancel=cancel)
        div = invariants_sublattice(module).cols
        return CohomologyResult(gname, coeff, 0, h1.value, divisible_rank=div)
    shifted = cohomology(group, module, i + 1, degree_cap=degree_cap, cancel=cancel)
    return CohomologyResult(gname, coeff, i, shifted.value)


def brute_force_cohomology(group, module, i, cancel=None, label=None):
    """Independent oracle: unnormalized cocycles over all of G^i, i <= 2."""
    if i < 0 or i > 2:
        raise ValueError("the brute-force oracle only covers degrees 0..2")
    if module.group != group:
        raise ValueError("module is not over the given group")
    n = len(group)
    rank = module.rank
    if n ** (i + 1) * rank > BRUTE_FORCE_LIMIT:
        raise SizeExceeded(
            f"|G|^{i + 1} * rank = {n ** (i + 1) * rank} > {BRUTE_FORCE_LIMIT}")
    d_out = _unnormalized_differential(group, module, i, cancel)
    d_in = _unnormalized_differential(group, module, i - 1, cancel) if i >= 1 else None
    if d_in is not None and not (d_out @ d_in).is_zero():
        raise AssertionError("d^2 != 0 in the brute-force model")
    value = homology_structure(d_out, d_in)
    return CohomologyResult(_group_label(group), _coefficient_label(module, label),
                            i, value)


def _unnormalized_differential(group, module, i, cancel=None):
    """Matrix of d^i on all maps G^i -> M (no normalization)."""
    n = len(group)
    rank = module.rank
    rows = n ** (i + 1) * rank
    cols = n ** i * rank
    if rank == 0:
        return IntMatrix.zeros(rows, cols)
    mul = group.mul
    act_items = [list(m.items()) for m in module.action]

    def tindex(tup):
        t = 0
        for g in tup:
            t = t * n + g
        return t

    triples = []

    def rec(tup):
        _check_cancel(cancel)
        if len(tup) < i + 1:
            for g in range(n):
                rec(tup + (g,))
            return
        out_base = tindex(tup) * rank
        src = tindex(tup[1:]) * rank
        for r, c, v in act_items[tup[0]]:
            triples.append((out_base + r, src + c, v))
        sign = -1
        for j in range(i):
            face = tup[:j] + (mul[tup[j]][tup[j + 1]],) + tup[j + 2:]
            src = tindex(face) * rank
            for m in range(rank):
                triples.append((out_base + m, src + m, sign))
            sign = -sign
        src = tindex(tup[:i]) * rank
        for m in range(rank):
            triples.append((out_base + m, src + m, sign))

    rec(())
    return IntMatrix.from_triples(rows, cols, triples)


@dataclass(frozen=True)
class ShapiroVerdict:
    equal: bool
    induced: CohomologyResult
    subgroup: CohomologyResult


def shapiro_compare(group, sub_elems, i, degree_cap=None):
    """Compare H^i(G, Z[G/H]) with H^i(H, Z); groups only, no map."""
    induced = cohomology(group, perm_lattice(group, sub_elems), i,
                         degree_cap=degree_cap)
    h, _ = subgroup_group(group, sub_elems)
    sub = cohomology(h, trivial_lattice(h, 1), i, degree_cap=degree_cap)
    return ShapiroVerdict(induced.value == sub.value, induced, sub)
