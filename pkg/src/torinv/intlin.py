"""Exact integer linear algebra.

Smith and Hermite normal forms, integer kernels, and the invariant-factor
structure of cokernels.  Everything runs on python ints, so coefficient
growth during elimination is harmless, and every routine is deterministic:
pivots are chosen by fixed rules (smallest absolute value, ties broken by
lowest index; Markowitz-style fill control on sparse eliminations), never by
randomization.

One immutable matrix type covers a dense and a sparse storage mode.  The
normal-form code picks list-based or dict-based elimination accordingly:
transform-tracking Smith form runs dense, while kernels and invariant
factors of the large +-1 matrices coming out of cochain complexes run on
dict-of-columns structures and stay close to linear in the number of
nonzeros as long as unit pivots are available.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from math import gcd

__all__ = [
    "IntMatrix",
    "SmithDecomposition",
    "AbelianGroupStructure",
    "smith_decompose",
    "hermite_decompose",
    "kernel_basis",
    "cokernel_structure",
    "invariant_factors",
    "matrix_rank",
    "solve_columns",
    "in_column_span",
    "homology_structure",
    "det",
    "parse_matrix",
    "format_matrix",
]

# Matrices with at most this many cells are materialized densely by default.
_DENSE_CELL_LIMIT = 1 << 16


def xgcd(a, b):
    # Maintain the invariants:
    #          x * a +      y * b ==      g
    #     next_x * a + next_y * b == next_g
    # and run the Euclidean algorithm on (g, next_g).
    x, next_x = 1, 0
    y, next_y = 0, 1
    g, next_g = a, b
    while next_g:
        q = g // next_g
        x, next_x = next_x, x - q * next_x
        y, next_y = next_y, y - q * next_y
        g, next_g = next_g, g - q * next_g
    if g < 0:
        x, y, g = -x, -y, -g
    return x, y, g


class IntMatrix:
    """Immutable integer matrix, stored dense or sparse.

    Dense storage is a tuple of row tuples; sparse storage is a dict
    ``{(row, col): value}`` holding no explicit zeros.  The two forms of the
    same matrix compare equal.
    """

    __slots__ = ("rows", "cols", "_dense", "_sparse")

    def __init__(self, rows, cols, *, _dense=None, _sparse=None):
        if rows < 0 or cols < 0:
            raise ValueError("negative matrix dimensions")
        self.rows = rows
        self.cols = cols
        self._dense = _dense
        self._sparse = _sparse

    # ---- constructors -------------------------------------------------

    @classmethod
    def from_rows(cls, rows):
        data = tuple(tuple(int(v) for v in row) for row in rows)
        ncols = len(data[0]) if data else 0
        for row in data:
            if len(row) != ncols:
                raise ValueError("ragged rows")
        return cls(len(data), ncols, _dense=data)

    @classmethod
    def from_triples(cls, rows, cols, triples):
        ent = {}
        for r, c, v in triples:
            if not (0 <= r < rows and 0 <= c < cols):
                raise ValueError(f"entry ({r},{c}) outside {rows}x{cols}")
            v = int(v)
            if v:
                w = ent.get((r, c), 0) + v
                if w:
                    ent[(r, c)] = w
                else:
                    ent.pop((r, c), None)
        return cls(rows, cols, _sparse=ent)

    @classmethod
    def zeros(cls, rows, cols):
        return cls(rows, cols, _sparse={})

    @classmethod
    def identity(cls, n):
        return cls(n, n, _sparse={(i, i): 1 for i in range(n)})

    @classmethod
    def diagonal(cls, rows, cols, entries):
        ent = {(i, i): int(v) for i, v in enumerate(entries) if int(v)}
        return cls(rows, cols, _sparse=ent)

    @classmethod
    def column(cls, values):
        return cls.from_rows([[v] for v in values])

    @classmethod
    def hstack(cls, mats):
        mats = list(mats)
        if not mats:
            return cls.zeros(0, 0)
        rows = mats[0].rows
        ent = {}
        off = 0
        for m in mats:
            if m.rows != rows:
                raise ValueError("hstack: row count mismatch")
            for r, c, v in m.items():
                ent[(r, off + c)] = v
            off += m.cols
        return cls(rows, off, _sparse=ent)

    @classmethod
    def vstack(cls, mats):
        mats = list(mats)
        if not mats:
            return cls.zeros(0, 0)
        cols = mats[0].cols
        ent = {}
        off = 0
        for m in mats:
            if m.cols != cols:
                raise ValueError("vstack: column count mismatch")
            for r, c, v in m.items():
                ent[(off + r, c)] = v
            off += m.rows
        return cls(off, cols, _sparse=ent)

    # ---- access --------------------------------------------------------

    @property
    def is_sparse(self):
        return self._sparse is not None

    @property
    def nnz(self):
        if self._sparse is not None:
            return len(self._sparse)
        return sum(1 for row in self._dense for v in row if v)

    def entry(self, r, c):
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise IndexError((r, c))
        if self._sparse is not None:
            return self._sparse.get((r, c), 0)
        return self._dense[r][c]

    def items(self):
        """Yield (row, col, value) for every nonzero entry, sorted."""
        if self._sparse is not None:
            for (r, c) in sorted(self._sparse):
                yield r, c, self._sparse[(r, c)]
        else:
            for r, row in enumerate(self._dense):
                for c, v in enumerate(row):
                    if v:
                        yield r, c, v

    def to_rows(self):
        """Mutable dense copy as a list of lists."""
        if self._dense is not None:
            return [list(row) for row in self._dense]
        out = [[0] * self.cols for _ in range(self.rows)]
        for (r, c), v in self._sparse.items():
            out[r][c] = v
        return out

    def col_dicts(self):
        cols = [dict() for _ in range(self.cols)]
        for r, c, v in self.items():
            cols[c][r] = v
        return cols

    def column_vector(self, j):
        if self._sparse is not None:
            return {r: v for (r, c), v in self._sparse.items() if c == j}
        return {r: row[j] for r, row in enumerate(self._dense) if row[j]}

    def is_zero(self):
        return self.nnz == 0

    def transpose(self):
        if self._sparse is not None:
            return IntMatrix(
                self.cols, self.rows,
                _sparse={(c, r): v for (r, c), v in self._sparse.items()},
            )
        return IntMatrix.from_rows(
            [[self._dense[r][c] for r in range(self.rows)] for c in range(self.cols)]
        )

    # ---- arithmetic ----------------------------------------------------

    def __matmul__(self, other):
        if not isinstance(other, IntMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        if self._dense is not None and other._dense is not None:
            if self.rows == 0 or self.cols == 0 or other.cols == 0:
                return IntMatrix.from_rows([[0] * other.cols for _ in range(self.rows)])
            bt = list(zip(*other._dense))
            data = []
            for row in self._dense:
                data.append([sum(x * y for x, y in zip(row, col)) for col in bt])
            return IntMatrix(self.rows, other.cols,
                             _dense=tuple(tuple(r) for r in data))
        # sparse path: group left entries by column, right entries by row
        right_rows = {}
        for r, c, v in other.items():
            right_rows.setdefault(r, []).append((c, v))
        acc = {}
        for r, k, a in self.items():
            for c, b in right_rows.get(k, ()):
                key = (r, c)
                w = acc.get(key, 0) + a * b
                if w:
                    acc[key] = w
                else:
                    del acc[key]
        return IntMatrix(self.rows, other.cols, _sparse=acc)

    def _combine(self, other, sign):
        if self.rows != other.rows or self.cols != other.cols:
            raise ValueError("shape mismatch")
        ent = {}
        for r, c, v in self.items():
            ent[(r, c)] = v
        for r, c, v in other.items():
            w = ent.get((r, c), 0) + sign * v
            if w:
                ent[(r, c)] = w
            else:
                ent.pop((r, c), None)
        out = IntMatrix(self.rows, self.cols, _sparse=ent)
        if self._dense is not None and other._dense is not None:
            return out.densified()
        return out

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return -1 * self

    def __mul__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if self._dense is not None:
            return IntMatrix(self.rows, self.cols,
                             _dense=tuple(tuple(k * v for v in row) for row in self._dense))
        if k == 0:
            return IntMatrix.zeros(self.rows, self.cols)
        return IntMatrix(self.rows, self.cols,
                         _sparse={rc: k * v for rc, v in self._sparse.items()})

    __rmul__ = __mul__

    def densified(self):
        if self._dense is not None:
            return self
        return IntMatrix.from_rows(self.to_rows())

    def sparsified(self):
        if self._sparse is not None:
            return self
        ent = {(r, c): v for r, c, v in self.items()}
        return IntMatrix(self.rows, self.cols, _sparse=ent)

    # ---- comparison ----------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, IntMatrix):
            return NotImplemented
        if self.rows != other.rows or self.cols != other.cols:
            return False
        a = {(r, c): v for r, c, v in self.items()}
        b = {(r, c): v for r, c, v in other.items()}
        return a == b

    def __repr__(self):
        mode = "sparse" if self.is_sparse else "dense"
        return f"IntMatrix({self.rows}x{self.cols}, {mode}, nnz={self.nnz})"


def det(a):
    """Exact determinant via fraction-free Bareiss elimination."""
    if a.rows != a.cols:
        raise ValueError("determinant of a non-square matrix")
    n = a.rows
    if n == 0:
        return 1
    m = a.to_rows()
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k]:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            mik = m[i][k]
            mkk = m[k][k]
            mi = m[i]
            mk = m[k]
            for j in range(k + 1, n):
                mi[j] = (mi[j] * mkk - mik * mk[j]) // prev
            mi[k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


# ---------------------------------------------------------------------------
# abelian group structures
# ---------------------------------------------------------------------------


def _divisibility_chain(entries):
    """Rebalance a list of positive integers into an invariant-factor chain."""
    ds = sorted(abs(int(d)) for d in entries)
    if any(d == 0 for d in ds):
        raise ValueError("zero is not a torsion invariant")
    changed = True
    while changed:
        changed = False
        for i in range(len(ds)):
            for j in range(i + 1, len(ds)):
                a, b = ds[i], ds[j]
                if b % a:
                    g = gcd(a, b)
                    ds[i], ds[j] = g, a * b // g
                    changed = True
        ds.sort()
    return ds


@dataclass(frozen=True)
class AbelianGroupStructure:
    """A finitely generated abelian group, Z^free_rank (+) sum of Z/d_i.

    Canonical: no invariant factor is 0 or 1 and the factors form a
    divisibility chain d_1 | d_2 | ...; equality of structures is equality
    of the underlying groups.
    """

    free_rank: int
    torsion: tuple = ()

    def __post_init__(self):
        if self.free_rank < 0:
            raise ValueError("negative free rank")
        prev = None
        for d in self.torsion:
            if d < 2:
                raise ValueError(f"invariant factor {d} < 2")
            if prev is not None and d % prev:
                raise ValueError(f"broken divisibility chain {self.torsion}")
            prev = d

    @classmethod
    def from_diagonal(cls, free_rank, entries):
        chain = _divisibility_chain([d for d in entries if d])
        return cls(free_rank, tuple(d for d in chain if d > 1))

    @classmethod
    def trivial(cls):
        return cls(0, ())

    @classmethod
    def free(cls, rank):
        return cls(rank, ())

    @classmethod
    def cyclic(cls, n):
        if n == 0:
            return cls(1, ())
        return cls(0, (n,)) if n > 1 else cls(0, ())

    @property
    def is_trivial(self):
        return self.free_rank == 0 and not self.torsion

    @property
    def exponent(self):
        """0 for infinite groups and the trivial group's exponent is 1."""
        if self.free_rank:
            return 0
        return self.torsion[-1] if self.torsion else 1

    def direct_sum(self, other):
        return AbelianGroupStructure.from_diagonal(
            self.free_rank + other.free_rank, self.torsion + other.torsion)

    def power(self, m):
        if m < 0:
            raise ValueError("negative multiplicity")
        return AbelianGroupStructure.from_diagonal(
            self.free_rank * m, self.torsion * m)

    def odd_part(self):
        """Quotient away the 2-primary torsion; the free part is kept."""
        ds = []
        for d in self.torsion:
            while d % 2 == 0:
                d //= 2
            if d > 1:
                ds.append(d)
        return AbelianGroupStructure.from_diagonal(self.free_rank, ds)

    def __str__(self):
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        parts.extend(f"Z/{d}" for d in self.torsion)
        return " (+) ".join(parts) if parts else "0"


# ---------------------------------------------------------------------------
# dense Smith normal form with transforms
# ---------------------------------------------------------------------------


def _find_pivot(a, m, n, k):
    # Smallest nonzero absolute value in a[k:, k:], ties to the lowest (row, col).
    best = None
    for r in range(k, m):
        ar = a[r]
        for c in range(k, n):
            v = ar[c]
            if v:
                av = -v if v < 0 else v
                if best is None or av < best[0]:
                    best = (av, r, c)
                    if av == 1:
                        return best
    return best


def _row_combine(a, u, i1, i2, x, y, z, w):
    # rows (i1, i2) <- (x r1 + y r2, z r1 + w r2); the 2x2 has determinant +-1
    r1, r2 = a[i1], a[i2]
    for j in range(len(r1)):
        p, q = r1[j], r2[j]
        r1[j] = x * p + y * q
        r2[j] = z * p + w * q
    if u is not None:
        _row_combine(u, None, i1, i2, x, y, z, w)


def _col_combine(a, v, j1, j2, x, y, z, w):
    for row in a:
        p, q = row[j1], row[j2]
        row[j1] = x * p + y * q
        row[j2] = z * p + w * q
    if v is not None:
        _col_combine(v, None, j1, j2, x, y, z, w)


def _clear_pivot(a, u, v, k, m, n):
    """Make row k and column k zero away from (k, k) by unimodular ops."""
    while True:
        for r in range(m):
            if r != k and a[r][k]:
                p, q = a[k][k], a[r][k]
                if q % p == 0:
                    _row_combine(a, u, k, r, 1, 0, -(q // p), 1)
                else:
                    x, y, g = xgcd(p, q)
                    _row_combine(a, u, k, r, x, y, -(q // g), p // g)
        dirty = False
        for c in range(n):
            if c != k and a[k][c]:
                p, q = a[k][k], a[k][c]
                if q % p == 0:
                    _col_combine(a, v, k, c, 1, 0, -(q // p), 1)
                else:
                    x, y, g = xgcd(p, q)
                    _col_combine(a, v, k, c, x, y, -(q // g), p // g)
                    dirty = True
        if not dirty:
            # column ops with exact division leave column k intact
            if all(a[r][k] == 0 for r in range(m) if r != k):
                return
            # an xgcd column step reintroduced entries below the pivot


def _smith_dense(mat):
    """Return (diag, U_rows, V_rows) with U*A*V diagonal in invariant-factor form."""
    m, n = mat.rows, mat.cols
    a = mat.to_rows()
    u = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    v = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    t = 0
    for k in range(min(m, n)):
        piv = _find_pivot(a, m, n, k)
        if piv is None:
            break
        _, r, c = piv
        if r != k:
            a[k], a[r] = a[r], a[k]
            u[k], u[r] = u[r], u[k]
        if c != k:
            _col_swap(a, k, c)
            _col_swap(v, k, c)
        _clear_pivot(a, u, v, k, m, n)
        if a[k][k] < 0:
            for j in range(n):
                a[k][j] = -a[k][j]
            for j in range(m):
                u[k][j] = -u[k][j]
        t = k + 1
    # enforce the divisibility chain d_i | d_{i+1}
    changed = True
    while changed:
        changed = False
        for i in range(t - 1):
            di, dj = a[i][i], a[i + 1][i + 1]
            if dj % di:
                _col_combine(a, v, i, i + 1, 1, 1, 0, 1)  # col_i += col_{i+1}
                _clear_pivot(a, u, v, i, m, n)
                if a[i][i] < 0:
                    for j in range(n):
                        a[i][j] = -a[i][j]
                    for j in range(m):
                        u[i][j] = -u[i][j]
                if a[i + 1][i + 1] < 0:
                    for j in range(n):
                        a[i + 1][j] = -a[i + 1][j]
                    for j in range(m):
                        u[i + 1][j] = -u[i + 1][j]
                changed = True
    diag = [a[i][i] for i in range(t)]
    return diag, u, v


def _col_swap(a, j1, j2):
    for row in a:
        row[j1], row[j2] = row[j2], row[j1]


@dataclass(frozen=True)
class SmithDecomposition:
    """U * A * V = S with S diagonal, d_i | d_{i+1}, and det(U), det(V) = +-1."""

    S: IntMatrix
    U: IntMatrix
    V: IntMatrix

    @property
    def diagonal(self):
        return tuple(self.S.entry(i, i) for i in range(min(self.S.rows, self.S.cols)))


def smith_decompose(a):
    """Smith normal form with unimodular transforms.

    Runs a dense elimination; intended for matrices of moderate size (the
    sparse large ones should go through kernel_basis / cokernel_structure,
    which do not track transforms).
    """
    diag, u, v = _smith_dense(a)
    return SmithDecomposition(
        S=IntMatrix.diagonal(a.rows, a.cols, diag + [0] * (min(a.rows, a.cols) - len(diag))),
        U=IntMatrix.from_rows(u) if a.rows else IntMatrix.zeros(0, 0),
        V=IntMatrix.from_rows(v) if a.cols else IntMatrix.zeros(0, 0),
    )


def unimodular_inverse(u):
    """Inverse of a unimodular square matrix (integer entries)."""
    if u.rows != u.cols:
        raise ValueError("not square")
    dec = smith_decompose(u)
    if any(d != 1 for d in dec.diagonal):
        raise ValueError("matrix is not unimodular")
    return dec.V @ dec.U


# ---------------------------------------------------------------------------
# sparse column echelon (kernel, rank, Hermite form, exact solve)
# ---------------------------------------------------------------------------


class _ColWorkspace:
    """Dict-of-columns elimination state with an optional transform mirror."""

    def __init__(self, mat, track):
        self.ncols = mat.cols
        self.nrows = mat.rows
        self.cols = mat.col_dicts()
        self.vcols = [{j: 1} for j in range(mat.cols)] if track else None
        self.rowmap = {}
        for j, col in enumerate(self.cols):
            for r in col:
                self.rowmap.setdefault(r, set()).add(j)
        self.frozen = [False] * mat.cols

    def axpy(self, j, p, q):
        # col_j -= q * col_p
        if not q:
            return
        colj = self.cols[j]
        rm = self.rowmap
        for r, v in self.cols[p].items():
            w = colj.get(r, 0) - q * v
            if w:
                if r not in colj:
                    rm.setdefault(r, set()).add(j)
                colj[r] = w
            elif r in colj:
                del colj[r]
                rm[r].discard(j)
        if self.vcols is not None:
            vj, vp = self.vcols[j], self.vcols[p]
            for r, v in vp.items():
                w = vj.get(r, 0) - q * v
                if w:
                    vj[r] = w
                else:
                    vj.pop(r, None)

    def combine(self, p, j, r):
        # unimodular 2-column op making col_j zero at row r, gcd at col_p
        a = self.cols[p][r]
        b = self.cols[j][r]
        x, y, g = xgcd(a, b)
        xb, ag = -(b // g), a // g
        newp, newj = {}, {}
        for rr in self.cols[p].keys() | self.cols[j].keys():
            pv = self.cols[p].get(rr, 0)
            jv = self.cols[j].get(rr, 0)
            np_ = x * pv + y * jv
            nj = xb * pv + ag * jv
            if np_:
                newp[rr] = np_
            if nj:
                newj[rr] = nj
        rm = self.rowmap
        for col_idx, old, new in ((p, self.cols[p], newp), (j, self.cols[j], newj)):
            for rr in old.keys() - new.keys():
                rm[rr].discard(col_idx)
            for rr in new.keys() - old.keys():
                rm.setdefault(rr, set()).add(col_idx)
        self.cols[p], self.cols[j] = newp, newj
        if self.vcols is not None:
            vp, vj = self.vcols[p], self.vcols[j]
            newvp, newvj = {}, {}
            for rr in vp.keys() | vj.keys():
                pv = vp.get(rr, 0)
                jv = vj.get(rr, 0)
                np_ = x * pv + y * jv
                nj = xb * pv + ag * jv
                if np_:
                    newvp[rr] = np_
                if nj:
                    newvj[rr] = nj
            self.vcols[p], self.vcols[j] = newvp, newvj

    def freeze(self, p):
        for r in self.cols[p]:
            s = self.rowmap.get(r)
            if s is not None:
                s.discard(p)
        self.frozen[p] = True


def _column_echelon(mat, track=False, row_order="markowitz"):
    """Unimodular column reduction to echelon form.

    Returns (ws, pivots) where pivots is a list of (row, col) in processing
    order.  After the run, every non-pivot column of ws.cols is zero, and
    (when track=True) its mirror in ws.vcols is a kernel vector.

    row_order="markowitz" processes rows by current fill (cheapest first);
    "index" processes rows top to bottom, which is what the canonical
    Hermite form wants.
    """
    ws = _ColWorkspace(mat, track)
    pivots = []

    def process_row(r):
        s = ws.rowmap.get(r)
        if not s:
            return
        active = sorted(s)
        # prefer unit entries, then thin columns; ties to the lowest index
        p = min(active, key=lambda j: (abs(ws.cols[j][r]) != 1, len(ws.cols[j]), j))
        for j in active:
            if j == p:
                continue
            a = ws.cols[p][r]
            b = ws.cols[j][r]
            if b % a == 0:
                ws.axpy(j, p, b // a)
            else:
                ws.combine(p, j, r)
        ws.freeze(p)
        pivots.append((r, p))

    if row_order == "index":
        for r in range(ws.nrows):
            process_row(r)
    else:
        heap = [(len(s), r) for r, s in ws.rowmap.items() if s]
        heapq.heapify(heap)
        while heap:
            cnt, r = heapq.heappop(heap)
            s = ws.rowmap.get(r)
            if not s:
                continue
            if len(s) != cnt:
                heapq.heappush(heap, (len(s), r))
                continue
            process_row(r)
    return ws, pivots


def kernel_basis(a):
    """A saturated basis of the integer null space {v : A v = 0}, as columns."""
    ws, _ = _column_echelon(a, track=True)
    free = [j for j in range(a.cols) if not ws.frozen[j]]
    triples = []
    for out_j, j in enumerate(free):
        if ws.cols[j]:
            raise AssertionError("non-pivot column failed to vanish")
        for r, v in ws.vcols[j].items():
            triples.append((r, out_j, v))
    return IntMatrix.from_triples(a.cols, len(free), triples)


def matrix_rank(a):
    _, pivots = _column_echelon(a, track=False)
    return len(pivots)


def hermite_decompose(a):
    """Column-style Hermite normal form: A * V = H with V unimodular.

    Pivot rows strictly increase left to right, pivots are positive, entries
    to the right of a pivot (in its row) are reduced into [0, pivot), and
    zero columns are pushed to the end.
    """
    ws, pivots = _column_echelon(a, track=True, row_order="index")
    order = [p for _, p in pivots]
    free = [j for j in range(a.cols) if not ws.frozen[j]]

    def negate(j):
        ws.cols[j] = {r: -v for r, v in ws.cols[j].items()}
        ws.vcols[j] = {r: -v for r, v in ws.vcols[j].items()}

    for (r, j) in pivots:
        if ws.cols[j][r] < 0:
            negate(j)
    # Reduce each column's entries at later pivot rows into [0, pivot).
    # Processing the later pivots in ascending row order keeps already
    # reduced entries intact: a reducer column is zero at every earlier
    # pivot row.
    for j_idx in range(len(pivots)):
        _, j = pivots[j_idx]
        for t_idx in range(j_idx + 1, len(pivots)):
            rt, jt = pivots[t_idx]
            piv = ws.cols[jt][rt]
            b = ws.cols[j].get(rt, 0)
            q = b // piv  # floor keeps the remainder in [0, piv)
            if q:
                _axpy_nomap(ws.cols, j, jt, q)
                _axpy_nomap(ws.vcols, j, jt, q)
    perm = order + free
    h_triples = []
    v_triples = []
    for new_j, j in enumerate(perm):
        for r, v in ws.cols[j].items():
            h_triples.append((r, new_j, v))
        for r, v in ws.vcols[j].items():
            v_triples.append((r, new_j, v))
    h = IntMatrix.from_triples(a.rows, a.cols, h_triples)
    v = IntMatrix.from_triples(a.cols, a.cols, v_triples)
    return h, v


def _axpy_nomap(cols, j, p, q):
    colj = cols[j]
    for r, v in cols[p].items():
        w = colj.get(r, 0) - q * v
        if w:
            colj[r] = w
        else:
            colj.pop(r, None)


def solve_columns(a, b):
    """Solve A X = B over the integers, columns of B independently.

    Returns X (a.cols x b.cols) or None when some column of B is not in the
    integer column span of A.  When A's columns are dependent one valid
    solution is returned.
    """
    if a.rows != b.rows:
        raise ValueError("row count mismatch")
    ws, pivots = _column_echelon(a, track=True)
    xcols = []
    for jb in range(b.cols):
        vec = b.column_vector(jb)
        coeffs = []
        ok = True
        for (r, j) in pivots:
            val = vec.get(r, 0)
            if not val:
                continue
            e = ws.cols[j][r]
            q, rem = divmod(val, e)
            if rem:
                ok = False
                break
            for rr, v in ws.cols[j].items():
                w = vec.get(rr, 0) - q * v
                if w:
                    vec[rr] = w
                else:
                    vec.pop(rr, None)
            coeffs.append((j, q))
        if not ok or vec:
            return None
        x = {}
        for j, q in coeffs:
            for r, v in ws.vcols[j].items():
                w = x.get(r, 0) + q * v
                if w:
                    x[r] = w
                else:
                    del x[r]
        xcols.append(x)
    triples = []
    for jb, x in enumerate(xcols):
        for r, v in x.items():
            triples.append((r, jb, v))
    return IntMatrix.from_triples(a.cols, b.cols, triples)


def in_column_span(a, b):
    """Whether every column of B lies in the integer column span of A."""
    return solve_columns(a, b) is not None


# ---------------------------------------------------------------------------
# sparse invariant factors (no transforms)
# ---------------------------------------------------------------------------


def invariant_factors(a):
    """The nonzero invariant factors d_1 | d_2 | ... of A (1s included)."""
    rows = {}
    cols = {}
    units = {}
    for r, c, v in a.items():
        rows.setdefault(r, {})[c] = v
        cols.setdefault(c, {})[r] = v
        if v == 1 or v == -1:
            units[(r, c)] = None

    def set_entry(r, c, v):
        if v:
            rows.setdefault(r, {})[c] = v
            cols.setdefault(c, {})[r] = v
            if v == 1 or v == -1:
                units[(r, c)] = None
            else:
                units.pop((r, c), None)
        else:
            rr = rows.get(r)
            if rr and c in rr:
                del rr[c]
                if not rr:
                    del rows[r]
                cc = cols[c]
                del cc[r]
                if not cc:
                    del cols[c]
            units.pop((r, c), None)

    def pick_pivot():
        # prefer unit pivots with low fill; scan a bounded, deterministic slice
        while units:
            candidates = []
            stale = []
            for pos in units:
                r, c = pos
                v = rows.get(r, {}).get(c)
                if v is None or abs(v) != 1:
                    stale.append(pos)
                    continue
                candidates.append(((len(rows[r]) - 1) * (len(cols[c]) - 1), r, c))
                if len(candidates) >= 64:
                    break
            for pos in stale:
                del units[pos]
            if candidates:
                _, r, c = min(candidates)
                return r, c
        best = None
        for r in sorted(rows):
            for c, v in sorted(rows[r].items()):
                av = abs(v)
                if best is None or av < best[0]:
                    best = (av, r, c)
        return (best[1], best[2]) if best else None

    def row_op(r_dst, r_src, q):
        # row_dst -= q * row_src
        for c, v in list(rows.get(r_src, {}).items()):
            set_entry(r_dst, c, rows.get(r_dst, {}).get(c, 0) - q * v)

    def col_op(c_dst, c_src, q):
        for r, v in list(cols.get(c_src, {}).items()):
            set_entry(r, c_dst, rows.get(r, {}).get(c_dst, 0) - q * v)

    def row_combine(r1, r2, x, y, z, w):
        keys = set(rows.get(r1, {})) | set(rows.get(r2, {}))
        vals = [(c, rows.get(r1, {}).get(c, 0), rows.get(r2, {}).get(c, 0)) for c in keys]
        for c, p, q in vals:
            set_entry(r1, c, x * p + y * q)
            set_entry(r2, c, z * p + w * q)

    def col_combine(c1, c2, x, y, z, w):
        keys = set(cols.get(c1, {})) | set(cols.get(c2, {}))
        vals = [(r, cols.get(c1, {}).get(r, 0), cols.get(c2, {}).get(r, 0)) for r in keys]
        for r, p, q in vals:
            set_entry(r, c1, x * p + y * q)
            set_entry(r, c2, z * p + w * q)

    diag = []
    while True:
        piv = pick_pivot()
        if piv is None:
            break
        r, c = piv
        while True:
            # clear column c with row operations
            for r2 in [x for x in cols.get(c, {}) if x != r]:
                a_ = rows[r][c]
                b_ = rows.get(r2, {}).get(c, 0)
                if not b_:
                    continue
                if b_ % a_ == 0:
                    row_op(r2, r, b_ // a_)
                else:
                    x, y, g = xgcd(a_, b_)
                    row_combine(r, r2, x, y, -(b_ // g), a_ // g)
            # clear row r with column operations
            for c2 in [x for x in rows.get(r, {}) if x != c]:
                a_ = rows[r][c]
                b_ = rows[r].get(c2, 0)
                if not b_:
                    continue
                if b_ % a_ == 0:
                    col_op(c2, c, b_ // a_)
                else:
                    x, y, g = xgcd(a_, b_)
                    col_combine(c, c2, x, y, -(b_ // g), a_ // g)
            if len(cols.get(c, {})) == 1 and len(rows.get(r, {})) == 1:
                break
        diag.append(abs(rows[r][c]))
        set_entry(r, c, 0)
    return _divisibility_chain(diag)


def cokernel_structure(a):
    """Structure of Z^rows / (integer column span of A)."""
    facs = invariant_factors(a)
    return AbelianGroupStructure.from_diagonal(
        a.rows - len(facs), [d for d in facs if d > 1])


def homology_structure(d_out, d_in):
    """Structure of ker(d_out) / im(d_in).

    d_out maps the chamber under inspection outward (pass None for the zero
    map), d_in maps into it (None for no incoming boundaries).  Raises if
    the image is not contained in the kernel.
    """
    if d_out is None:
        if d_in is None:
            raise ValueError("at least one differential is required")
        return cokernel_structure(d_in)
    k = kernel_basis(d_out)
    z = k.cols
    if z == 0:
        return AbelianGroupStructure.trivial()
    if d_in is None or d_in.cols == 0 or d_in.is_zero():
        return AbelianGroupStructure.free(z)
    x = solve_columns(k, d_in)
    if x is None:
        raise ValueError("incoming boundaries do not lie in the kernel (d*d != 0?)")
    return cokernel_structure(x)


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------


def format_matrix(a, sparse=None):
    """Serialize in the text format: 'rows cols', then 'dense' with row-major
    integers or 'sparse' with 'r c v' triples."""
    if sparse is None:
        sparse = a.is_sparse
    lines = [f"{a.rows} {a.cols}"]
    if sparse:
        lines.append("sparse")
        for r, c, v in a.items():
            lines.append(f"{r} {c} {v}")
    else:
        lines.append("dense")
        for row in a.to_rows():
            lines.append(" ".join(str(v) for v in row))
    return "\n".join(lines) + "\n"


def parse_matrix(text):
    toks = text.split()
    if len(toks) < 3:
        raise ValueError("matrix text too short")
    rows, cols = int(toks[0]), int(toks[1])
    mode = toks[2]
    body = toks[3:]
    if mode == "dense":
        if len(body) != rows * cols:
            raise ValueError(f"expected {rows * cols} entries, got {len(body)}")
        it = iter(int(v) for v in body)
        return IntMatrix.from_rows([[next(it) for _ in range(cols)] for _ in range(rows)])
    if mode == "sparse":
        if len(body) % 3:
            raise ValueError("sparse entries must be (row, col, value) triples")
        triples = []
        seen = set()
        for i in range(0, len(body), 3):
            r, c, v = int(body[i]), int(body[i + 1]), int(body[i + 2])
            if v == 0:
                raise ValueError("sparse form stores no explicit zeros")
            if (r, c) in seen:
                raise ValueError(f"duplicate sparse entry ({r},{c})")
            seen.add((r, c))
            triples.append((r, c, v))
        return IntMatrix.from_triples(rows, cols, triples)
    raise ValueError(f"unknown storage mode {mode!r}")
