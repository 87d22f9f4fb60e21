"""Exact integer linear algebra.

Sparse integer matrices, Smith normal form, homology of bounded chain
complexes and localization of finitely generated abelian groups.  All
arithmetic is on Python ints, so nothing ever overflows.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

DENSE_CUTOFF = 64
PIVOT_SEARCH_ROWS = 8  # rows with a unit entry examined per sparse pivot


class ChainComplexError(ValueError):
    pass


# ---------------------------------------------------------------------------
# matrices


class IntMatrix:
    """Immutable sparse integer matrix, stored as a dict of rows."""

    __slots__ = ("rows", "cols", "_data", "_hash")

    def __init__(self, rows: int, cols: int, data: dict[int, dict[int, int]] | None = None):
        self.rows = rows
        self.cols = cols
        clean: dict[int, dict[int, int]] = {}
        if data:
            for i, row in data.items():
                if not 0 <= i < rows:
                    raise IndexError(f"row {i} out of range for {rows}x{cols}")
                r = {}
                for j, v in row.items():
                    if v:
                        if not 0 <= j < cols:
                            raise IndexError(f"col {j} out of range for {rows}x{cols}")
                        r[j] = int(v)
                if r:
                    clean[i] = r
        self._data = clean
        self._hash = None

    # construction -----------------------------------------------------
    @classmethod
    def _raw(cls, rows, cols, data):
        m = cls.__new__(cls)
        m.rows, m.cols, m._data, m._hash = rows, cols, data, None
        return m

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls._raw(rows, cols, {})

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls._raw(n, n, {i: {i: 1} for i in range(n)})

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence[int]], ncols: int | None = None) -> "IntMatrix":
        nrows = len(rows)
        if ncols is None:
            ncols = len(rows[0]) if nrows else 0
        data = {}
        for i, row in enumerate(rows):
            if len(row) != ncols:
                raise ValueError("ragged matrix")
            r = {j: int(v) for j, v in enumerate(row) if v}
            if r:
                data[i] = r
        return cls._raw(nrows, ncols, data)

    @classmethod
    def from_triplets(cls, rows: int, cols: int, triplets: Iterable[tuple[int, int, int]]) -> "IntMatrix":
        data: dict[int, dict[int, int]] = {}
        for i, j, v in triplets:
            if not (0 <= i < rows and 0 <= j < cols):
                raise IndexError(f"entry ({i},{j}) out of range for {rows}x{cols}")
            r = data.setdefault(i, {})
            r[j] = r.get(j, 0) + int(v)
        return cls(rows, cols, data)

    @classmethod
    def diag(cls, values: Sequence[int], rows: int | None = None, cols: int | None = None) -> "IntMatrix":
        n = len(values)
        rows = n if rows is None else rows
        cols = n if cols is None else cols
        return cls(rows, cols, {i: {i: v} for i, v in enumerate(values)})

    @classmethod
    def block_diag(cls, blocks: Sequence["IntMatrix"]) -> "IntMatrix":
        data = {}
        r0 = c0 = 0
        for b in blocks:
            for i, row in b._data.items():
                data[r0 + i] = {c0 + j: v for j, v in row.items()}
            r0 += b.rows
            c0 += b.cols
        return cls._raw(r0, c0, data)

    @classmethod
    def hstack(cls, blocks: Sequence["IntMatrix"], rows: int | None = None) -> "IntMatrix":
        if rows is None:
            rows = blocks[0].rows if blocks else 0
        data: dict[int, dict[int, int]] = {}
        c0 = 0
        for b in blocks:
            if b.rows != rows:
                raise ValueError("hstack: row mismatch")
            for i, row in b._data.items():
                data.setdefault(i, {}).update({c0 + j: v for j, v in row.items()})
            c0 += b.cols
        return cls._raw(rows, c0, data)

    @classmethod
    def vstack(cls, blocks: Sequence["IntMatrix"], cols: int | None = None) -> "IntMatrix":
        if cols is None:
            cols = blocks[0].cols if blocks else 0
        data = {}
        r0 = 0
        for b in blocks:
            if b.cols != cols:
                raise ValueError("vstack: column mismatch")
            for i, row in b._data.items():
                data[r0 + i] = dict(row)
            r0 += b.rows
        return cls._raw(r0, cols, data)

    @classmethod
    def kron(cls, a: "IntMatrix", b: "IntMatrix") -> "IntMatrix":
        data: dict[int, dict[int, int]] = {}
        for i, ra in a._data.items():
            for k, rb in b._data.items():
                row = {}
                for j, va in ra.items():
                    base = j * b.cols
                    for l, vb in rb.items():
                        row[base + l] = va * vb
                data[i * b.rows + k] = row
        return cls._raw(a.rows * b.rows, a.cols * b.cols, data)

    # access -----------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self._data.get(i, {}).get(j, 0)

    def row(self, i: int) -> dict[int, int]:
        return dict(self._data.get(i, {}))

    def row_items(self) -> Iterator[tuple[int, dict[int, int]]]:
        return iter(self._data.items())

    def items(self) -> Iterator[tuple[int, int, int]]:
        for i in sorted(self._data):
            row = self._data[i]
            for j in sorted(row):
                yield i, j, row[j]

    def nnz(self) -> int:
        return sum(len(r) for r in self._data.values())

    def is_zero(self) -> bool:
        return not self._data

    def to_dense(self) -> list[list[int]]:
        out = [[0] * self.cols for _ in range(self.rows)]
        for i, row in self._data.items():
            for j, v in row.items():
                out[i][j] = v
        return out

    def column(self, j: int) -> dict[int, int]:
        return {i: row[j] for i, row in self._data.items() if j in row}

    # algebra ----------------------------------------------------------
    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        od = other._data
        data = {}
        for i, row in self._data.items():
            acc: dict[int, int] = {}
            for k, v in row.items():
                orow = od.get(k)
                if orow is None:
                    continue
                for j, w in orow.items():
                    acc[j] = acc.get(j, 0) + v * w
            acc = {j: x for j, x in acc.items() if x}
            if acc:
                data[i] = acc
        return IntMatrix._raw(self.rows, other.cols, data)

    def apply(self, vec: dict[int, int]) -> dict[int, int]:
        """Matrix times a sparse column vector."""
        out = {}
        for i, row in self._data.items():
            s = 0
            for j, v in row.items():
                w = vec.get(j)
                if w:
                    s += v * w
            if s:
                out[i] = s
        return out

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch in +")
        data = {i: dict(r) for i, r in self._data.items()}
        for i, row in other._data.items():
            r = data.setdefault(i, {})
            for j, v in row.items():
                r[j] = r.get(j, 0) + v
        return IntMatrix(self.rows, self.cols, data)

    def __neg__(self) -> "IntMatrix":
        return IntMatrix._raw(self.rows, self.cols, {i: {j: -v for j, v in r.items()} for i, r in self._data.items()})

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return self + (-other)

    def scale(self, c: int) -> "IntMatrix":
        if c == 0:
            return IntMatrix.zeros(self.rows, self.cols)
        return IntMatrix._raw(self.rows, self.cols, {i: {j: c * v for j, v in r.items()} for i, r in self._data.items()})

    def transpose(self) -> "IntMatrix":
        data: dict[int, dict[int, int]] = {}
        for i, row in self._data.items():
            for j, v in row.items():
                data.setdefault(j, {})[i] = v
        return IntMatrix._raw(self.cols, self.rows, data)

    T = property(transpose)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "IntMatrix":
        cpos = {c: k for k, c in enumerate(cols)}
        data = {}
        for k, i in enumerate(rows):
            row = self._data.get(i)
            if not row:
                continue
            r = {cpos[j]: v for j, v in row.items() if j in cpos}
            if r:
                data[k] = r
        return IntMatrix._raw(len(rows), len(cols), data)

    def mod(self, n: int) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, {i: {j: v % n for j, v in r.items()} for i, r in self._data.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.rows, self.cols, tuple(self.items())))
        return self._hash

    def __repr__(self) -> str:
        if self.rows <= 8 and self.cols <= 8:
            return f"IntMatrix({self.to_dense()})"
        return f"IntMatrix<{self.rows}x{self.cols}, nnz={self.nnz()}>"

    # serialization ----------------------------------------------------
    def to_triplets(self) -> list[list[int]]:
        return [[i, j, v] for i, j, v in self.items()]


def det(m: IntMatrix) -> int:
    """Determinant by fraction-free Bareiss elimination."""
    if m.rows != m.cols:
        raise ValueError("det of non-square matrix")
    n = m.rows
    if n == 0:
        return 1
    a = m.to_dense()
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def is_unimodular(m: IntMatrix) -> bool:
    return m.rows == m.cols and abs(det(m)) == 1


# ---------------------------------------------------------------------------
# Smith normal form with transforms (dense)


def smith_normal_form(a: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return ``(U, S, V)`` with ``S = U @ a @ V`` in Smith normal form.

    U and V are unimodular, S is diagonal with nonnegative entries and
    each diagonal entry divides the next.
    """
    m, n = a.rows, a.cols
    s = a.to_dense()
    u = [[int(i == j) for j in range(m)] for i in range(m)]
    v = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, k):
        s[i], s[k] = s[k], s[i]
        u[i], u[k] = u[k], u[i]

    def swap_cols(j, k):
        for row in s:
            row[j], row[k] = row[k], row[j]
        for row in v:
            row[j], row[k] = row[k], row[j]

    def add_row(dst, src, c):  # row_dst += c * row_src
        if c:
            rs, rd = s[src], s[dst]
            for j in range(n):
                if rs[j]:
                    rd[j] += c * rs[j]
            us, ud = u[src], u[dst]
            for j in range(m):
                if us[j]:
                    ud[j] += c * us[j]

    def add_col(dst, src, c):
        if c:
            for row in s:
                if row[src]:
                    row[dst] += c * row[src]
            for row in v:
                if row[src]:
                    row[dst] += c * row[src]

    t = 0
    while t < min(m, n):
        # pivot: smallest nonzero |entry| in the remaining block
        best = None
        for i in range(t, m):
            row = s[i]
            for j in range(t, n):
                x = row[j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            p = s[t][t]
            done = True
            for i in range(t + 1, m):
                if s[i][t]:
                    q = s[i][t] // p
                    add_row(i, t, -q)
                    if s[i][t]:
                        done = False
            for j in range(t + 1, n):
                if s[t][j]:
                    q = s[t][j] // p
                    add_col(j, t, -q)
                    if s[t][j]:
                        done = False
            if done:
                # enforce divisibility against the rest of the block
                bad = None
                for i in range(t + 1, m):
                    for j in range(t + 1, n):
                        if s[i][j] % p:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is None:
                    break
                add_row(t, bad, 1)
                continue
            # move the smallest remaining entry of row/column t to the pivot
            best = (abs(s[t][t]), t, t)
            for i in range(t + 1, m):
                if s[i][t] and abs(s[i][t]) < best[0]:
                    best = (abs(s[i][t]), i, t)
            for j in range(t + 1, n):
                if s[t][j] and abs(s[t][j]) < best[0]:
                    best = (abs(s[t][j]), t, j)
            _, i, j = best
            if i != t:
                swap_rows(t, i)
            if j != t:
                swap_cols(t, j)
        if s[t][t] < 0:
            s[t] = [-x for x in s[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return IntMatrix.from_dense(u, m), IntMatrix.from_dense(s, n), IntMatrix.from_dense(v, n)


def _dense_invariant_factors(a: list[list[int]], ncols: int) -> list[int]:
    """Nonzero invariant factors of a dense matrix (no transforms)."""
    s = [row[:] for row in a if any(row)]
    m, n = len(s), ncols
    out = []
    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            row = s[i]
            for j in range(t, n):
                x = row[j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        s[t], s[i] = s[i], s[t]
        if j != t:
            for row in s:
                row[j], row[t] = row[t], row[j]
        while True:
            p = s[t][t]
            dirty = False
            prow = s[t]
            for i in range(t + 1, m):
                x = s[i][t]
                if x:
                    q = x // p
                    ri = s[i]
                    for j in range(t, n):
                        if prow[j]:
                            ri[j] -= q * prow[j]
                    if ri[t]:
                        dirty = True
            for j in range(t + 1, n):
                x = prow[j]
                if x:
                    q = x // p
                    for i in range(t, m):
                        if s[i][t]:
                            s[i][j] -= q * s[i][t]
                    if prow[j]:
                        dirty = True
            if not dirty:
                bad = None
                for i in range(t + 1, m):
                    for j in range(t + 1, n):
                        if s[i][j] % p:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is None:
                    break
                rb = s[bad]
                for j in range(t, n):
                    prow[j] += rb[j]
                continue
            best = (abs(s[t][t]), t, t)
            for i in range(t + 1, m):
                if s[i][t] and abs(s[i][t]) < best[0]:
                    best = (abs(s[i][t]), i, t)
            for j in range(t + 1, n):
                if prow[j] and abs(prow[j]) < best[0]:
                    best = (abs(prow[j]), t, j)
            _, i, j = best
            if i != t:
                s[t], s[i] = s[i], s[t]
            if j != t:
                for row in s:
                    row[j], row[t] = row[t], row[j]
        out.append(abs(s[t][t]))
        t += 1
    return out


def invariant_factors(a: IntMatrix) -> list[int]:
    """Nonzero invariant factors of ``a`` in divisibility order.

    Unit pivots are eliminated sparsely (fewest fill-in first); whatever is
    left without a unit entry is finished densely.
    """
    if a.rows < DENSE_CUTOFF and a.cols < DENSE_CUTOFF:
        return _dense_invariant_factors(a.to_dense(), a.cols)
    rows = {i: dict(r) for i, r in a._data.items()}
    colidx: dict[int, set[int]] = {}
    for i, r in rows.items():
        for j in r:
            colidx.setdefault(j, set()).add(i)
    by_len: dict[int, set[int]] = {}
    for i, r in rows.items():
        by_len.setdefault(len(r), set()).add(i)

    def relink(i, old, new):
        if old:
            by_len[old].discard(i)
        if new:
            by_len.setdefault(new, set()).add(i)

    units = 0
    while True:
        # limited Markowitz search: shortest rows first, a few candidate rows only
        best, seen = None, 0
        for length in sorted(k for k, v in by_len.items() if v):
            if best is not None and (seen >= PIVOT_SEARCH_ROWS or best[0] == 0):
                break
            for i in by_len[length]:
                r = rows[i]
                found = False
                for j, v in r.items():
                    if v == 1 or v == -1:
                        found = True
                        cost = (length - 1) * (len(colidx[j]) - 1)
                        if best is None or cost < best[0]:
                            best = (cost, i, j)
                            if cost == 0:
                                break
                seen += found
                if best is not None and (seen >= PIVOT_SEARCH_ROWS or best[0] == 0):
                    break
        if best is None:
            break
        _, pi, pj = best
        prow = rows.pop(pi)
        relink(pi, len(prow), 0)
        pv = prow[pj]
        for j in prow:
            colidx[j].discard(pi)
        for i in list(colidx[pj]):
            r = rows[i]
            before = len(r)
            q = r[pj] * pv  # pv = +-1 so r[pj]/pv = r[pj]*pv
            for j, v in prow.items():
                nv = r.get(j, 0) - q * v
                if nv:
                    if j not in r:
                        colidx[j].add(i)
                    r[j] = nv
                elif j in r:
                    del r[j]
                    colidx[j].discard(i)
            relink(i, before, len(r))
            if not r:
                del rows[i]
        del colidx[pj]
        units += 1
    rest = [i for i in rows if rows[i]]
    if not rest:
        return [1] * units
    cols = sorted({j for i in rest for j in rows[i]})
    cpos = {c: k for k, c in enumerate(cols)}
    dense = []
    for i in rest:
        row = [0] * len(cols)
        for j, v in rows[i].items():
            row[cpos[j]] = v
        dense.append(row)
    tail = _dense_invariant_factors(dense, len(cols))
    # tail factors are all > 1 or (rarely) 1 after gcd steps
    return sorted([1] * units + tail, key=lambda x: (x != 1, x)) if tail else [1] * units


def rank(a: IntMatrix) -> int:
    return len(invariant_factors(a))


# ---------------------------------------------------------------------------
# kernels, solving, lattices


def kernel_basis(a: IntMatrix) -> IntMatrix:
    """Columns spanning the (saturated) integer kernel of ``a``.

    Sparse unimodular column reduction; the returned basis is a basis of
    ``{x in Z^n : a x = 0}``.
    """
    n = a.cols
    # each active column: (entries of a-column as dict, tag vector as dict)
    at = a.transpose()
    cols: dict[int, tuple[dict[int, int], dict[int, int]]] = {}
    for j in range(n):
        cols[j] = (dict(at._data.get(j, {})), {j: 1})
    rowidx: dict[int, set[int]] = {}
    for j, (c, _) in cols.items():
        for i in c:
            rowidx.setdefault(i, set()).add(j)
    for i in sorted(rowidx, key=lambda r: len(rowidx[r])):
        while True:
            live = [j for j in rowidx.get(i, ()) if j in cols]
            if len(live) <= 1:
                break
            live.sort(key=lambda j: (abs(cols[j][0][i]), len(cols[j][0]) + len(cols[j][1])))
            p = live[0]
            pc, pt = cols[p]
            pv = pc[i]
            for j in live[1:]:
                c, tg = cols[j]
                q = c[i] // pv
                if q:
                    for r, v in pc.items():
                        nv = c.get(r, 0) - q * v
                        if nv:
                            if r not in c:
                                rowidx.setdefault(r, set()).add(j)
                            c[r] = nv
                        else:
                            c.pop(r, None)
                            s = rowidx.get(r)
                            if s is not None:
                                s.discard(j)
                    for r, v in pt.items():
                        nv = tg.get(r, 0) - q * v
                        if nv:
                            tg[r] = nv
                        else:
                            tg.pop(r, None)
        live = [j for j in rowidx.get(i, ()) if j in cols]
        for j in live:
            c, _ = cols.pop(j)
            for r in c:
                s = rowidx.get(r)
                if s is not None:
                    s.discard(j)
    kept = sorted(cols)
    data: dict[int, dict[int, int]] = {}
    for k, j in enumerate(kept):
        for r, v in cols[j][1].items():
            data.setdefault(r, {})[k] = v
    return IntMatrix._raw(n, len(kept), data)


def solve(a: IntMatrix, b: IntMatrix) -> IntMatrix | None:
    """Integer solution ``x`` of ``a @ x = b``, or None if none exists."""
    u, s, v = smith_normal_form(a)
    ub = (u @ b).to_dense()
    y = [[0] * b.cols for _ in range(a.cols)]
    diag = [s[i, i] for i in range(min(s.rows, s.cols))]
    for i in range(a.rows):
        d = diag[i] if i < len(diag) else 0
        for k in range(b.cols):
            val = ub[i][k]
            if d == 0:
                if val:
                    return None
            else:
                if val % d:
                    return None
                y[i][k] = val // d
    return v @ IntMatrix.from_dense(y, b.cols)


def inverse_unimodular(a: IntMatrix) -> IntMatrix:
    if a.rows != a.cols:
        raise ValueError("not square")
    x = solve(a, IntMatrix.identity(a.rows))
    if x is None or (a @ x) != IntMatrix.identity(a.rows):
        raise ValueError("matrix is not invertible over Z")
    return x


def left_inverse(k: IntMatrix) -> IntMatrix:
    """Integer L with ``L @ k = I`` for k whose columns span a saturated lattice.

    Sparse Gauss-Jordan on the rows of ``[k | I]``: pivots are unit entries,
    found by Euclidean row steps when none is present.
    """
    n, r = k.rows, k.cols
    if r == 0:
        return IntMatrix.zeros(0, n)
    rows = {i: dict(row) for i, row in k._data.items()}
    tags = {i: {i: 1} for i in range(n)}
    colidx: dict[int, set[int]] = {}
    for i, row in rows.items():
        for j in row:
            colidx.setdefault(j, set()).add(i)
    used: set[int] = set()
    pivot_of = {}

    def axpy(dst, src, q):
        # row dst -= q * row src, on both halves
        rd, rs = rows.setdefault(dst, {}), rows.get(src, {})
        for j, v in rs.items():
            nv = rd.get(j, 0) - q * v
            if nv:
                if j not in rd:
                    colidx.setdefault(j, set()).add(dst)
                rd[j] = nv
            else:
                rd.pop(j, None)
                colidx[j].discard(dst)
        td, ts = tags[dst], tags[src]
        for j, v in ts.items():
            nv = td.get(j, 0) - q * v
            if nv:
                td[j] = nv
            else:
                td.pop(j, None)

    for j in range(r):
        while True:
            cand = [i for i in colidx.get(j, ()) if i not in used]
            if not cand:
                raise ValueError("columns do not span a saturated lattice")
            cand.sort(key=lambda i: (abs(rows[i][j]), len(rows[i]) + len(tags[i])))
            p = cand[0]
            pv = rows[p][j]
            if abs(pv) == 1:
                break
            for i in cand[1:]:
                q = rows[i][j] // pv
                if q:
                    axpy(i, p, q)
            if len([i for i in colidx.get(j, ()) if i not in used]) == 1 and abs(pv) != 1:
                raise ValueError("columns do not span a saturated lattice")
        if pv == -1:
            rows[p] = {c: -v for c, v in rows[p].items()}
            tags[p] = {c: -v for c, v in tags[p].items()}
        for i in list(colidx.get(j, ())):
            if i != p:
                axpy(i, p, rows[i][j])
        used.add(p)
        pivot_of[j] = p
    return IntMatrix._raw(r, n, {j: dict(tags[pivot_of[j]]) for j in range(r) if tags[pivot_of[j]]})


class Lattice:
    """Integer row lattice kept in echelon form, for membership tests."""

    def __init__(self, dim: int):
        self.dim = dim
        self.pivots: dict[int, dict[int, int]] = {}

    def __len__(self):
        return len(self.pivots)

    def reduce(self, v: dict[int, int]) -> dict[int, int]:
        v = {k: x for k, x in v.items() if x}
        while v:
            lead = min(v)
            p = self.pivots.get(lead)
            if p is None:
                return v
            q, r = divmod(v[lead], p[lead])
            if r:
                return v
            for k, x in p.items():
                nv = v.get(k, 0) - q * x
                if nv:
                    v[k] = nv
                else:
                    v.pop(k, None)
        return v

    def contains(self, v: dict[int, int]) -> bool:
        return not self.reduce(v)

    def add(self, v: dict[int, int]) -> bool:
        """Insert a vector; return True if the lattice grew."""
        v = self.reduce(v)
        if not v:
            return False
        while v:
            lead = min(v)
            p = self.pivots.get(lead)
            if p is None:
                if v[lead] < 0:
                    v = {k: -x for k, x in v.items()}
                self.pivots[lead] = v
                return True
            a, b = p[lead], v[lead]
            g, x, y = _xgcd(a, b)
            # new pivot g = x*a + y*b, remainder kills the lead
            newp = _lincomb(x, p, y, v)
            rem = _lincomb(b // g, p, -(a // g), v)
            self.pivots[lead] = newp
            v = self.reduce(rem)
        return True


def _lincomb(a, u, b, v):
    out = {}
    for k, x in u.items():
        out[k] = a * x
    for k, x in v.items():
        out[k] = out.get(k, 0) + b * x
    return {k: x for k, x in out.items() if x}


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


# ---------------------------------------------------------------------------
# groups and localization


@dataclass(frozen=True)
class FgAbGroup:
    """``Z^free_rank`` plus cyclic torsion ``Z/d_1 + ... + Z/d_k`` with d_i | d_{i+1}."""

    free_rank: int = 0
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        if self.free_rank < 0:
            raise ValueError("negative rank")
        t = tuple(int(d) for d in self.torsion)
        if any(d < 2 for d in t):
            raise ValueError(f"invariant factors must be >= 2, got {t}")
        if any(t[i + 1] % t[i] for i in range(len(t) - 1)):
            raise ValueError(f"invariant factors must form a divisibility chain, got {t}")
        object.__setattr__(self, "torsion", t)

    @classmethod
    def from_cyclic(cls, free_rank: int, orders: Iterable[int]) -> "FgAbGroup":
        """Normalize an arbitrary list of cyclic orders into invariant factors."""
        orders = [abs(int(d)) for d in orders]
        free_rank += sum(1 for d in orders if d == 0)
        prime_powers: dict[int, list[int]] = {}
        for d in orders:
            if d <= 1:
                continue
            for p, e in _factor(d).items():
                prime_powers.setdefault(p, []).append(p**e)
        k = max((len(v) for v in prime_powers.values()), default=0)
        factors = [1] * k
        for p, powers in prime_powers.items():
            powers.sort(reverse=True)
            for idx, q in enumerate(powers):
                factors[k - 1 - idx] *= q
        return cls(free_rank, tuple(f for f in factors if f > 1))

    def __add__(self, other: "FgAbGroup") -> "FgAbGroup":
        return FgAbGroup.from_cyclic(self.free_rank + other.free_rank, self.torsion + other.torsion)

    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def order_of_torsion(self) -> int:
        return math.prod(self.torsion)

    def __str__(self) -> str:
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        parts += [f"Z/{d}" for d in self.torsion]
        return " ⊕ ".join(parts) if parts else "0"

    def to_json(self):
        return {"free_rank": self.free_rank, "torsion": list(self.torsion), "text": str(self)}


def _factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_prime(p: int) -> bool:
    return p >= 2 and _factor(p) == {p: 1}


def valuation(n: int, p: int) -> int:
    n = abs(n)
    v = 0
    while n and n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class LocalizationSpec:
    """Coefficient ring: Z, Z_(p), or Q."""

    mode: str = "integers"
    p: int | None = None

    def __post_init__(self):
        if self.mode not in ("integers", "local_at_prime", "rationals"):
            raise ValueError(f"unknown localization mode {self.mode!r}")
        if self.mode == "local_at_prime" and (self.p is None or not is_prime(self.p)):
            raise ValueError(f"local_at_prime needs a prime, got {self.p}")

    @classmethod
    def integers(cls):
        return cls("integers")

    @classmethod
    def at(cls, p: int):
        return cls("local_at_prime", p)

    @classmethod
    def rationals(cls):
        return cls("rationals")

    def __str__(self):
        if self.mode == "integers":
            return "Z"
        if self.mode == "rationals":
            return "Q"
        return f"Z_({self.p})"


def localize(g: FgAbGroup, r: LocalizationSpec) -> FgAbGroup:
    if r.mode == "integers":
        return g
    if r.mode == "rationals":
        return FgAbGroup(g.free_rank)
    p = r.p
    tors = [p ** valuation(d, p) for d in g.torsion]
    return FgAbGroup(g.free_rank, tuple(d for d in tors if d > 1))


def render_local(g: FgAbGroup, r: LocalizationSpec) -> str:
    """Render a localized group with the ring in place of Z."""
    ring = str(r)
    parts = []
    if g.free_rank == 1:
        parts.append(ring)
    elif g.free_rank > 1:
        parts.append(f"{ring}^{g.free_rank}")
    parts += [f"Z/{d}" for d in g.torsion]
    return " ⊕ ".join(parts) if parts else "0"


# ---------------------------------------------------------------------------
# chain complexes


@dataclass(frozen=True, eq=False)
class ChainComplex:
    """Bounded complex of free modules; ``diffs[n]`` maps degree n to n-1.

    ``valid_through`` records the highest degree whose homology is
    certified (truncated constructions set it below ``hi``).
    """

    lo: int
    hi: int
    ranks: dict[int, int]
    diffs: dict[int, IntMatrix] = field(default_factory=dict)
    valid_through: int | None = None

    def __post_init__(self):
        for n in range(self.lo, self.hi + 1):
            self.ranks.setdefault(n, 0)
        for n in range(self.lo + 1, self.hi + 1):
            d = self.diffs.get(n)
            if d is None:
                self.diffs[n] = IntMatrix.zeros(self.ranks[n - 1], self.ranks[n])
            elif d.shape != (self.ranks[n - 1], self.ranks[n]):
                raise ChainComplexError(
                    f"d_{n} has shape {d.shape}, expected {(self.ranks[n - 1], self.ranks[n])}"
                )

    def rank(self, n: int) -> int:
        return self.ranks.get(n, 0)

    def d(self, n: int) -> IntMatrix:
        if n in self.diffs:
            return self.diffs[n]
        return IntMatrix.zeros(self.rank(n - 1), self.rank(n))

    def check(self) -> None:
        for n in range(self.lo + 2, self.hi + 1):
            if not (self.d(n - 1) @ self.d(n)).is_zero():
                raise ChainComplexError(f"d_{n - 1} o d_{n} != 0")

    def valid(self) -> int:
        return self.hi if self.valid_through is None else self.valid_through

    def to_json(self) -> dict:
        return {
            "degrees": [self.lo, self.hi],
            "ranks": [self.rank(n) for n in range(self.lo, self.hi + 1)],
            "diffs": [
                {"deg": n, "rows": self.d(n).rows, "cols": self.d(n).cols, "triplets": self.d(n).to_triplets()}
                for n in range(self.lo + 1, self.hi + 1)
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ChainComplex":
        lo, hi = obj["degrees"]
        ranks = {lo + k: r for k, r in enumerate(obj["ranks"])}
        diffs = {}
        for d in obj.get("diffs", []):
            diffs[d["deg"]] = IntMatrix.from_triplets(d["rows"], d["cols"], d["triplets"])
        return cls(lo, hi, ranks, diffs)


def homology(c: ChainComplex, n: int, check: bool = True) -> FgAbGroup:
    """``ker d_n / im d_{n+1}`` via invariant factors."""
    if not c.lo <= n <= c.hi:
        raise ValueError(f"degree {n} outside [{c.lo}, {c.hi}]")
    if check and n + 1 <= c.hi and n - 1 >= c.lo:
        if not (c.d(n) @ c.d(n + 1)).is_zero():
            raise ChainComplexError(f"d_{n} o d_{n + 1} != 0")
    r_out = rank(c.d(n)) if n > c.lo else 0
    if n < c.hi:
        facs = invariant_factors(c.d(n + 1))
    else:
        facs = []
    free = c.rank(n) - r_out - len(facs)
    return FgAbGroup.from_cyclic(free, [f for f in facs if f > 1])


def all_homology(c: ChainComplex, upto: int | None = None) -> list[FgAbGroup]:
    top = c.hi if upto is None else min(upto, c.hi)
    c.check()
    return [homology(c, n, check=False) for n in range(c.lo, top + 1)]


def dumps_complex(c: ChainComplex) -> str:
    return json.dumps(c.to_json(), sort_keys=True)
