"""K-theory pipeline at desk scale.

Finite-field vector spaces as a Waldhausen category, the S-construction
fibered over the simplex category, matrices of vector spaces as a 2-category,
the rank coefficient and the homology of the total category built from them.

The S-construction follows the convention where a chain over level n has
n + 1 entries starting at the zero object (so level 0 is trivial); its
fibers are opposite to the textbook ones, which does not change the nerve's
homotopy type.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Sequence

from .exactlin import FgAbGroup, IntMatrix, LocalizationSpec, localize
from .fincat import CategoryError, FinCat, FunctorData, LazyCat, classify, subcategory
from .funhom import CoeffFunctor, LazyActions, cat_homology, tor, tor_by_resolution
from .simpset import compose as mcompose
from .simpset import delta_category, ident, monotone_maps


class BudgetExceeded(RuntimeError):
    """A construction would exceed its size budget; carries the estimate."""

    def __init__(self, what: str, estimate: int, limit: int):
        super().__init__(f"{what}: estimated {estimate} exceeds budget {limit}")
        self.what = what
        self.estimate = estimate
        self.limit = limit


# ---------------------------------------------------------------------------
# finite fields


class GF:
    """Arithmetic in F_q for q in {2, 3, 4}; F_4 elements are bit patterns a + b*w."""

    def __init__(self, q: int):
        if q not in (2, 3, 4):
            raise ValueError("desk-scale fields are F_2, F_3 and F_4")
        self.q = q
        if q == 4:
            # w^2 = w + 1
            def mul(a, b):
                r = 0
                for i in range(2):
                    if b >> i & 1:
                        r ^= a << i
                if r & 4:
                    r ^= 0b111
                return r
            self._add = [[a ^ b for b in range(4)] for a in range(4)]
            self._mul = [[mul(a, b) for b in range(4)] for a in range(4)]
        else:
            self._add = [[(a + b) % q for b in range(q)] for a in range(q)]
            self._mul = [[a * b % q for b in range(q)] for a in range(q)]
        self._inv = [None] + [next(b for b in range(1, q) if self._mul[a][b] == 1) for a in range(1, q)]
        self._neg = [next(b for b in range(q) if self._add[a][b] == 0) for a in range(q)]

    def add(self, a, b):
        return self._add[a][b]

    def mul(self, a, b):
        return self._mul[a][b]

    def inv(self, a):
        return self._inv[a]

    def neg(self, a):
        return self._neg[a]

    def matmul(self, b, a, rows, inner, cols):
        """Product of a ``rows x inner`` and an ``inner x cols`` matrix (tuples of rows)."""
        out = []
        for i in range(rows):
            row = []
            for j in range(cols):
                s = 0
                for k in range(inner):
                    s = self._add[s][self._mul[b[i][k]][a[k][j]]]
                row.append(s)
            out.append(tuple(row))
        return tuple(out)

    def rank(self, m, rows, cols) -> int:
        a = [list(r) for r in m]
        rk = 0
        for c in range(cols):
            piv = next((i for i in range(rk, rows) if a[i][c]), None)
            if piv is None:
                continue
            a[rk], a[piv] = a[piv], a[rk]
            inv = self._inv[a[rk][c]]
            a[rk] = [self._mul[inv][x] for x in a[rk]]
            for i in range(rows):
                if i != rk and a[i][c]:
                    f = self._neg[a[i][c]]
                    a[i] = [self._add[x][self._mul[f][y]] for x, y in zip(a[i], a[rk])]
            rk += 1
        return rk

    def matrices(self, rows, cols):
        for flat in itertools.product(range(self.q), repeat=rows * cols):
            yield tuple(tuple(flat[i * cols:(i + 1) * cols]) for i in range(rows))

    def identity(self, n):
        return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))

    def gl_order(self, n) -> int:
        out = 1
        for i in range(n):
            out *= self.q ** n - self.q ** i
        return out


# ---------------------------------------------------------------------------
# Waldhausen categories


class FqVect(FinCat):
    """Skeletal ``F_q``-vector spaces ``F_q^0 .. F_q^D`` with all linear maps.

    A morphism ``a -> b`` is stored as ``(a, b, matrix)`` with a ``b x a``
    matrix given as a tuple of rows.  Composition is matrix multiplication.
    """

    def __init__(self, q: int, dim_bound: int):
        self.field = GF(q)
        self.q, self.dim_bound = q, dim_bound
        f = self.field
        mors = [(a, b, mat) for a in range(dim_bound + 1) for b in range(dim_bound + 1) for mat in f.matrices(b, a)]
        pos = {k: i for i, k in enumerate(mors)}
        super().__init__(
            [f"F{q}^{n}" for n in range(dim_bound + 1)],
            [f"{a}>{b}:{mat}" for a, b, mat in mors],
            [a for a, _, _ in mors],
            [b for _, b, _ in mors],
            [pos[(n, n, f.identity(n))] for n in range(dim_bound + 1)],
            (),
            obj_data=list(range(dim_bound + 1)),
            mor_data=mors,
            validate=False,
        )
        self._table = None
        self._pos = pos
        self._cache: dict[tuple[int, int], int] = {}

    def compose(self, g: int, f: int) -> int:
        gf = self._cache.get((g, f))
        if gf is None:
            gf = self._cache[(g, f)] = self._compose(g, f)
        return gf

    def _compose(self, g: int, f: int) -> int:
        a, b, m1 = self.mor_data[f]
        b2, c, m2 = self.mor_data[g]
        if b != b2:
            raise CategoryError(f"{self.mor_names[g]} o {self.mor_names[f]} is not defined")
        return self._pos[(a, c, self.field.matmul(m2, m1, c, b, a))]

    def composable_pairs(self):
        for b in range(self.n_obj):
            for f in self.into[b]:
                for g in self.out_of[b]:
                    yield g, f

    def validate(self) -> None:
        for f in range(self.n_mor):
            if self.compose(self.identities[self.tgt[f]], f) != f or self.compose(f, self.identities[self.src[f]]) != f:
                raise CategoryError(f"identity law fails at {self.mor_names[f]}")
        for g, f in self.composable_pairs():
            gf = self.compose(g, f)
            for h in self.out_of[self.tgt[g]]:
                if self.compose(h, gf) != self.compose(self.compose(h, g), f):
                    raise CategoryError("associativity fails")

    def mor_index(self, data) -> int:
        return self._pos[data]

    def rank_of(self, m: int) -> int:
        a, b, mat = self.mor_data[m]
        return self.field.rank(mat, b, a)

    def is_iso(self, m: int) -> bool:
        a, b, _ = self.mor_data[m]
        return a == b and self.rank_of(m) == a

    def is_injective(self, m: int) -> bool:
        a, b, _ = self.mor_data[m]
        return self.rank_of(m) == a

    def is_surjective(self, m: int) -> bool:
        a, b, _ = self.mor_data[m]
        return self.rank_of(m) == b

    def block_sum(self, a: int, b: int):
        """``F^a + F^b = F^(a+b)`` with its two inclusions (None past the bound)."""
        n = a + b
        if n > self.dim_bound:
            return None
        i1 = tuple(tuple(1 if (r == c) else 0 for c in range(a)) for r in range(n))
        i2 = tuple(tuple(1 if (r == a + c) else 0 for c in range(b)) for r in range(n))
        return n, self._pos[(a, n, i1)], self._pos[(b, n, i2)]


@dataclass
class WaldhausenData:
    cat: FinCat
    cof: list[bool]
    we: list[bool]
    zero: int
    coproducts: dict = field(default_factory=dict)

    def validate(self) -> None:
        c = self.cat
        for x in range(c.n_obj):
            if not self.cof[c.identities[x]] or not self.we[c.identities[x]]:
                raise CategoryError("cofibrations and weak equivalences must contain identities")
            if len(c.hom(self.zero, x)) != 1:
                raise CategoryError("the zero object is not initial")
            if not self.cof[c.hom(self.zero, x)[0]]:
                raise CategoryError("0 -> x must be a cofibration")
        for m in range(c.n_mor):
            if c.is_iso(m) and not (self.cof[m] and self.we[m]):
                raise CategoryError(f"isomorphism {c.mor_names[m]} is not in both subcategories")
        for g, f in c.composable_pairs():
            gf = c.compose(g, f)
            if self.cof[g] and self.cof[f] and not self.cof[gf]:
                raise CategoryError("cofibrations are not closed under composition")
            if self.we[g] and self.we[f] and not self.we[gf]:
                raise CategoryError("weak equivalences are not closed under composition")
        for (a, b), (s, i1, i2) in self.coproducts.items():
            if c.src[i1] != a or c.src[i2] != b or c.tgt[i1] != s or c.tgt[i2] != s:
                raise CategoryError(f"coproduct witness for ({a}, {b}) has wrong endpoints")


def build_fq_vect(q: int, dim_bound: int, check: bool = True) -> WaldhausenData:
    """Cofibrations are the (split) injections, weak equivalences the isomorphisms."""
    if q not in (2, 3, 4) or not 0 <= dim_bound <= 3:
        raise ValueError("desk scale is q in {2, 3, 4} and dimension bound at most 3")
    c = FqVect(q, dim_bound)
    cof = [c.is_injective(m) for m in range(c.n_mor)]
    we = [c.is_iso(m) for m in range(c.n_mor)]
    cop = {}
    for a in range(dim_bound + 1):
        for b in range(dim_bound + 1):
            bs = c.block_sum(a, b)
            if bs is not None:
                cop[(a, b)] = bs
    w = WaldhausenData(c, cof, we, 0, cop)
    if check and c.n_mor <= 5000:
        w.validate()
    return w


def zero_waldhausen() -> WaldhausenData:
    """The category with only the zero object."""
    c = FinCat(["0"], ["id"], [0], [0], [0], [(0, 0, 0)])
    return WaldhausenData(c, [True], [True], 0, {(0, 0): (0, 0, 0)})


# ---------------------------------------------------------------------------
# the S-construction


@dataclass
class SConstr:
    """Admissible part SC of the chain category, fibered over ``Delta_{<=d}``.

    Objects are ``(n, cells)``: n composable cofibrations starting at the
    zero object.  A morphism ``(n, cells) -> (n', cells')`` is
    ``(theta, alpha)`` with ``theta: [n] -> [n']`` and ``alpha[i]`` a map from
    the ``theta(i)``-th entry of the target chain to the i-th entry of the source.
    """

    waldhausen: WaldhausenData
    d: int
    sc: FinCat
    s: FunctorData
    full: FinCat
    admissible: list[bool] = field(repr=False)

    def entry(self, obj, i: int) -> int:
        n, cells = obj
        return self.waldhausen.zero if i == 0 else self.waldhausen.cat.tgt[cells[i - 1]]

    def level(self, n: int) -> list[int]:
        return [x for x in range(self.sc.n_obj) if self.sc.obj_data[x][0] == n]


def _cof_chains(w: WaldhausenData, n: int):
    c = w.cat
    out = [((), w.zero)]
    for _ in range(n):
        out = [(cells + (f,), c.tgt[f]) for cells, end in out for f in c.out_of[end] if w.cof[f]]
    return [cells for cells, _ in out]


def _segment(w: WaldhausenData, cells, a: int, b: int) -> int:
    """Composite of the chain from entry a to entry b (identity if a == b)."""
    c = w.cat
    if a == b:
        return c.identities[w.zero if a == 0 else c.tgt[cells[a - 1]]]
    m = cells[a]
    for k in range(a + 1, b):
        m = c.compose(cells[k], m)
    return m


def _chain_maps(w: WaldhausenData, src, tgt, theta):
    """All natural transformations ``tgt o theta -> src`` as tuples of components."""
    c = w.cat
    n = len(src)

    def ent(cells, i):
        return w.zero if i == 0 else c.tgt[cells[i - 1]]

    out = []

    def extend(comps):
        i = len(comps)
        if i == n + 1:
            out.append(tuple(comps))
            return
        for a in c.hom(ent(tgt, theta[i]), ent(src, i)):
            if i > 0:
                lhs = c.compose(a, _segment(w, tgt, theta[i - 1], theta[i]))
                rhs = c.compose(src[i - 1], comps[-1])
                if lhs != rhs:
                    continue
            extend(comps + [a])

    extend([])
    return out


def chain_category(w: WaldhausenData, d: int) -> tuple[FinCat, FunctorData]:
    """All chains of cofibrations from 0 over ``Delta_{<=d}`` with all natural maps."""
    c = w.cat
    objs = [(n, cells) for n in range(d + 1) for cells in _cof_chains(w, n)]
    mors = []
    for n, src in objs:
        for n2, tgt in objs:
            for theta in monotone_maps(n, n2):
                for alpha in _chain_maps(w, src, tgt, theta):
                    mors.append(((theta, src, tgt, alpha), (n, src), (n2, tgt)))

    def compose(g, f):
        th2, _, tgt, beta = g
        th1, src, _, alpha = f
        return (mcompose(th2, th1), src, tgt, tuple(c.compose(alpha[i], beta[th1[i]]) for i in range(len(alpha))))

    def identity(o):
        n, cells = o
        return (ident(n), cells, cells, tuple(c.identities[w.zero if i == 0 else c.tgt[cells[i - 1]]] for i in range(n + 1)))

    full = FinCat.from_compose(objs, mors, identity, compose, name=_chain_name, validate=False)
    dc = delta_category(d)
    s = FunctorData(full, dc, [o[0] for o in objs],
                    [dc.mor_index((len(k[0]) - 1, len(full.obj_data[full.tgt[i]][1]), k[0])) for i, k in enumerate(full.mor_data)],
                    check=False)
    return full, s


def _chain_name(k):
    if isinstance(k[0], int):
        return f"[{k[0]}]{list(k[1])}"
    return f"{''.join(map(str, k[0]))}:{list(k[3])}"


def admissible_morphisms(w: WaldhausenData, full: FinCat, s: FunctorData) -> list[bool]:
    """Maps whose vertical part in the cartesian factorization is a pointwise weak equivalence."""
    cls = classify(s)
    if not cls.fibration:
        raise CategoryError("the chain category is not fibered over the simplex category")
    cart = cls.cartesian
    out = []
    for f in range(full.n_mor):
        y = full.tgt[f]
        lift = next(h for h in full.into[y] if cart[h] and s.mor_map[h] == s.mor_map[f])
        z = full.src[lift]
        vid = s.target.identities[s.obj_map[z]]
        g = [k for k in full.hom(full.src[f], z) if s.mor_map[k] == vid and full.compose(lift, k) == f]
        if len(g) != 1:
            raise CategoryError("cartesian factorization is not unique")
        out.append(all(w.we[a] for a in full.mor_data[g[0]][3]))
    return out


def s_construction(w: WaldhausenData, d: int, check: bool = True) -> SConstr:
    if d > 4:
        raise ValueError("nerve degree above 4 is outside the desk budget")
    full, s = chain_category(w, d)
    adm = admissible_morphisms(w, full, s)
    keep = [m for m in range(full.n_mor) if adm[m]]
    cat, inc = subcategory(full, list(range(full.n_obj)), keep)
    dc = s.target
    proj = FunctorData(cat, dc, list(s.obj_map), [s.mor_map[m] for m in keep], check=False)
    out = SConstr(w, d, cat, proj, full, adm)
    if check:
        if not classify(proj).fibration:
            raise CategoryError("SC is not fibered over the simplex category")
    return out


# ---------------------------------------------------------------------------
# matrices of vector spaces


def _kron(f: GF, a, b):
    ra, rb = len(a), len(b)
    return tuple(tuple(f.mul(a[i][k], b[j][l]) for k in range(ra) for l in range(rb))
                 for i in range(ra) for j in range(rb))


def _block_diag(blocks):
    n = sum(len(b) for b in blocks)
    rows = []
    off = 0
    for b in blocks:
        k = len(b)
        for r in b:
            rows.append(tuple([0] * off + list(r) + [0] * (n - off - k)))
        off += k
    return tuple(rows)


def _gl(f: GF, n: int):
    return [m for m in f.matrices(n, n) if f.rank(m, n, n) == n]


def _entries(mat):
    return [e for row in mat for e in row]


def mat_k(q: int, m: int, r: int, check: bool = True):
    """Matrices of ``F_q``-spaces of dimension at most r between sets of size at most m.

    A 1-cell ``a -> b`` is an ``a x b`` tuple of dimensions (row s, column t),
    a 2-cell a tuple of invertible matrices, one per entry in row-major order.
    The composite of ``M: a -> b`` and ``N: b -> c`` has entry
    ``sum_t M[s][t] * N[t][u]``, its basis ordered by ``(t, basis of M, basis of N)``;
    composites with an entry above r are left out.
    """
    from .twocat import Fin2Cat

    if m < 0 or r < 0 or m * m * r > 12:
        raise ValueError("matrix 2-category outside the desk bounds")
    f = GF(q)
    gl = {n: _gl(f, n) for n in range(r + 1)}
    sizes = list(range(m + 1))
    homs = {}
    for a in sizes:
        for b in sizes:
            cells = [tuple(tuple(flat[i * b:(i + 1) * b]) for i in range(a))
                     for flat in itertools.product(range(r + 1), repeat=a * b)]
            mors = []
            for x in cells:
                for cs in itertools.product(*[gl[e] for e in _entries(x)]):
                    mors.append(((x, cs), x, x))
            homs[(a, b)] = FinCat.from_compose(
                cells, mors,
                identity=lambda x: (x, tuple(f.identity(e) for e in _entries(x))),
                compose=lambda g, h: (h[0], tuple(f.matmul(p, s, len(p), len(p), len(p)) for p, s in zip(g[1], h[1]))),
                name=str, validate=False)
    units = [homs[(a, a)].obj_index(tuple(tuple(1 if i == j else 0 for j in range(a)) for i in range(a))) for a in sizes]
    comp1, comp2 = {}, {}
    for a, b, c in itertools.product(sizes, repeat=3):
        hab, hbc, hac = homs[(a, b)], homs[(b, c)], homs[(a, c)]
        t1, t2 = {}, {}
        for fi, mx in enumerate(hab.obj_data):
            for gi, nx in enumerate(hbc.obj_data):
                prod = tuple(tuple(sum(mx[s][t] * nx[t][u] for t in range(b)) for u in range(c)) for s in range(a))
                if all(e <= r for e in _entries(prod)):
                    t1[(gi, fi)] = hac.obj_index(prod)
        for ai, (mx, acells) in enumerate(hab.mor_data):
            for bi, (nx, bcells) in enumerate(hbc.mor_data):
                if (hbc.src[bi], hab.src[ai]) not in t1:
                    continue
                out = []
                for s in range(a):
                    for u in range(c):
                        blocks = [_kron(f, acells[s * b + t], bcells[t * c + u]) for t in range(b) if mx[s][t] * nx[t][u]]
                        out.append(_block_diag(blocks))
                prod = hac.obj_data[t1[(hbc.src[bi], hab.src[ai])]]
                t2[(bi, ai)] = hac.mor_index((prod, tuple(out)))
        comp1[(a, b, c)] = t1
        comp2[(a, b, c)] = t2
    two = Fin2Cat([f"[{a}]" for a in sizes], homs, units, comp1, comp2, check=check)
    two.field = f
    two.rank_bound = r
    return two


def rank_matrix(x, sizes: tuple[int, int] | None = None) -> IntMatrix:
    """Entrywise dimensions of a matrix of spaces, as a map ``R^{S1} -> R^{S2}``.

    Accepts a 1-cell datum (tuple of rows) or a list of 1-cells forming a
    chain, which gives the rank of the composite.  ``sizes = (|S1|, |S2|)``
    is needed when S1 is empty.
    """
    if isinstance(x, list):
        out = None
        for cell in x:
            m = rank_matrix(cell)
            out = m if out is None else m @ out
        return out
    a = len(x)
    b = sizes[1] if sizes is not None else (len(x[0]) if a else 0)
    return IntMatrix.from_triplets(b, a, [(t, s, x[s][t]) for s in range(a) for t in range(b) if x[s][t]])


# ---------------------------------------------------------------------------
# vectors of S-construction chains and the matrix action on them


def _inverse(f: GF, m, n):
    a = [list(m[i]) + [1 if i == j else 0 for j in range(n)] for i in range(n)]
    for c in range(n):
        piv = next(i for i in range(c, n) if a[i][c])
        a[c], a[piv] = a[piv], a[c]
        inv = f.inv(a[c][c])
        a[c] = [f.mul(inv, x) for x in a[c]]
        for i in range(n):
            if i != c and a[i][c]:
                k = f.neg(a[i][c])
                a[i] = [f.add(x, f.mul(k, y)) for x, y in zip(a[i], a[c])]
    return tuple(tuple(row[n:]) for row in a)


def _rect_block_diag(blocks):
    """Block diagonal of ``(rows, cols, matrix)`` blocks."""
    nr = sum(b[0] for b in blocks)
    nc = sum(b[1] for b in blocks)
    out = []
    co = 0
    for r, c, mat in blocks:
        for row in mat:
            out.append(tuple([0] * co + list(row) + [0] * (nc - co - c)))
        co += c
    return nr, nc, tuple(out)


class VectAction:
    """Fiber products ``SC x_Delta ... x_Delta SC`` and the action of matrices on them.

    ``fp[k]`` has objects ``(j, xs)`` with xs a k-tuple of SC objects over
    level j, and morphisms ``(delta, ms)`` with all ms over the same simplex
    map delta.  For ``k = 0`` it is the truncated simplex category.  A matrix
    M sends xs to the vector whose t-th entry is the block sum over s of
    ``M[s][t]`` copies of ``xs[s]``; sums above the dimension bound are
    undefined.
    """

    def __init__(self, sc: SConstr, two, max_size: int):
        self.sc = sc
        self.two = two
        self.c = sc.waldhausen.cat
        self.field = self.c.field
        self.dim_bound = self.c.dim_bound
        cat, s = sc.sc, sc.s
        self._by = {}
        for mm in range(cat.n_mor):
            self._by.setdefault((cat.src[mm], cat.tgt[mm], s.mor_map[mm]), []).append(mm)
        self.fp = [self._fiber_product(k) for k in range(max_size + 1)]
        self._zero = [{} for _ in range(max_size + 1)]
        self._obj_cache = {}
        self._mor_cache = {}

    # fiber products ------------------------------------------------------
    def _fiber_product(self, k: int) -> FinCat:
        cat, s = self.sc.sc, self.sc.s
        dc = s.target
        levels = [self.sc.level(j) for j in range(self.sc.d + 1)]
        objs = [(j, xs) for j in range(self.sc.d + 1) for xs in itertools.product(levels[j], repeat=k)]
        mors = []
        for j, xs in objs:
            for j2, ys in objs:
                for delta in dc.hom(j, j2):
                    choices = [self._by.get((x, y, delta), []) for x, y in zip(xs, ys)]
                    for ms in itertools.product(*choices):
                        mors.append(((delta, ms, (j, xs), (j2, ys)), (j, xs), (j2, ys)))
        return FinCat.from_compose(
            objs, mors,
            identity=lambda o: (dc.identities[o[0]], tuple(cat.identities[x] for x in o[1]), o, o),
            compose=lambda g, f: (dc.compose(g[0], f[0]), tuple(cat.compose(a, b) for a, b in zip(g[1], f[1])), f[2], g[3]),
            name=str, validate=False)

    # chains -------------------------------------------------------------
    def _entry_dims(self, x):
        n, cells = self.sc.sc.obj_data[x]
        return [0] + [self.c.tgt[f] for f in cells]

    def chain_sum(self, j: int, xs):
        """SC object index of the block sum of the chains xs over level j, or None."""
        c = self.c
        cells = []
        for i in range(j):
            blocks = []
            for x in xs:
                a, b, mat = c.mor_data[self.sc.sc.obj_data[x][1][i]]
                blocks.append((b, a, mat))
            nr, nc, mat = _rect_block_diag(blocks)
            if nr > self.dim_bound:
                return None
            cells.append(c.mor_index((nc, nr, mat)))
        return self.sc.sc.obj_index((j, tuple(cells)))

    def _alpha_sum(self, alphas_list):
        """Block sum of SC morphism components (one list of components per summand)."""
        c = self.c
        out = []
        for i in range(len(alphas_list[0]) if alphas_list else 0):
            blocks = []
            for al in alphas_list:
                a, b, mat = c.mor_data[al[i]]
                blocks.append((b, a, mat))
            nr, nc, mat = _rect_block_diag(blocks)
            out.append(c.mor_index((nc, nr, mat)))
        return tuple(out)

    # the action -----------------------------------------------------------
    @staticmethod
    def _summands(cell, a: int, t: int):
        return [(s, k) for s in range(a) for k in range(cell[s][t])]

    def _theta(self, delta: int):
        return self.sc.s.target.mor_data[delta][2]

    def apply_obj(self, a: int, b: int, cell, x: int):
        """``V(cell)`` on an object of ``fp[a]`` (cell is a ``a x b`` matrix); None out of bounds."""
        key = (a, b, cell, x)
        if key in self._obj_cache:
            return self._obj_cache[key]
        j, xs = self.fp[a].obj_data[x]
        ys = []
        for t in range(b):
            y = self.chain_sum(j, [xs[s] for s, _ in self._summands(cell, a, t)])
            if y is None:
                self._obj_cache[key] = None
                return None
            ys.append(y)
        res = self.fp[b].obj_index((j, tuple(ys)))
        self._obj_cache[key] = res
        return res

    def apply_mor(self, a: int, b: int, cell, f: int):
        """``V(cell)`` on a morphism of ``fp[a]``; None when an endpoint is out of bounds."""
        key = (a, b, cell, f)
        if key in self._mor_cache:
            return self._mor_cache[key]
        fa = self.fp[a]
        delta, ms, _, _ = fa.mor_data[f]
        x = self.apply_obj(a, b, cell, fa.src[f])
        y = self.apply_obj(a, b, cell, fa.tgt[f])
        res = None
        if x is not None and y is not None:
            fb, sc = self.fp[b], self.sc.sc
            xo, yo = fb.obj_data[x], fb.obj_data[y]
            theta = self._theta(delta)
            comps = []
            for t in range(b):
                summ = self._summands(cell, a, t)
                if summ:
                    alpha = self._alpha_sum([sc.mor_data[ms[s]][3] for s, _ in summ])
                else:
                    alpha = tuple(self.c.identities[0] for _ in range(xo[0] + 1))
                comps.append(sc.mor_index((theta, sc.obj_data[xo[1][t]][1], sc.obj_data[yo[1][t]][1], alpha)))
            res = fb.mor_index((delta, tuple(comps), xo, yo))
        self._mor_cache[key] = res
        return res

    def _vertical(self, k: int, x: int, y: int, isos):
        """fp[k] morphism over the identity realized by linear isomorphisms.

        ``isos[t][i]`` maps entry i of chain t of x to that of y; the stored
        components go the other way.
        """
        fk, sc, c = self.fp[k], self.sc.sc, self.c
        xo, yo = fk.obj_data[x], fk.obj_data[y]
        j = xo[0]
        comps = []
        for t in range(k):
            dims = self._entry_dims(xo[1][t])
            alpha = tuple(c.mor_index((dims[i], dims[i], _inverse(self.field, isos[t][i], dims[i]))) for i in range(j + 1))
            comps.append(sc.mor_index((ident(j), sc.obj_data[xo[1][t]][1], sc.obj_data[yo[1][t]][1], alpha)))
        delta = self.sc.s.target.identities[j]
        return fk.mor_index((delta, tuple(comps), xo, yo))

    def two_cell(self, a: int, b: int, cell, isos, x: int):
        """Component at x of the natural isomorphism induced by a 2-cell (entrywise isos)."""
        y = self.apply_obj(a, b, cell, x)
        if y is None:
            return None
        f = self.field
        j, xs = self.fp[a].obj_data[x]
        per_t = []
        for t in range(b):
            mats = []
            for i in range(j + 1):
                blocks = []
                for s in range(a):
                    if cell[s][t]:
                        d = self._entry_dims(xs[s])[i]
                        blk = _kron(f, isos[s * b + t], f.identity(d))
                        blocks.append((len(blk), len(blk), blk))
                mats.append(_rect_block_diag(blocks)[2])
            per_t.append(mats)
        return self._vertical(b, y, y, per_t)

    def compare(self, a: int, b: int, c: int, m_cell, n_cell, x: int):
        """Canonical isomorphism ``V(N) V(M) x -> V(N M) x`` (block permutation)."""
        y1 = self.apply_obj(a, b, m_cell, x)
        if y1 is None:
            return None
        y2 = self.apply_obj(b, c, n_cell, y1)
        nm = tuple(tuple(sum(m_cell[s][t] * n_cell[t][u] for t in range(b)) for u in range(c)) for s in range(a))
        y3 = self.apply_obj(a, c, nm, x)
        if y2 is None or y3 is None:
            return None
        j, xs = self.fp[a].obj_data[x]
        per_u = []
        for u in range(c):
            left = [(t, kb, s, ka) for t in range(b) for kb in range(n_cell[t][u])
                    for s in range(a) for ka in range(m_cell[s][t])]
            right = [(s, t, ka, kb) for s in range(a) for t in range(b)
                     for ka in range(m_cell[s][t]) for kb in range(n_cell[t][u])]
            mats = []
            for i in range(j + 1):
                dims = {s: self._entry_dims(xs[s])[i] for s in range(a)}
                off, pos = 0, {}
                for t, kb, s, ka in left:
                    pos[(s, t, ka, kb)] = off
                    off += dims[s]
                perm = [[0] * off for _ in range(off)]
                roff = 0
                for lab in right:
                    s = lab[0]
                    for v in range(dims[s]):
                        perm[roff + v][pos[lab] + v] = 1
                    roff += dims[s]
                mats.append(tuple(tuple(r) for r in perm))
            per_u.append(mats)
        return self._vertical(c, y2, y3, per_u)


# ---------------------------------------------------------------------------
# the total category and the rank coefficient


@dataclass
class KTotal:
    cat: FinCat
    phi: FunctorData
    nerve: object
    action: VectAction
    trunc: tuple[int, int, int]
    sizes: dict = field(default_factory=dict)

    def last_size(self, x: int) -> int:
        n, v, s = self.nerve.total.obj_data[self.cat.obj_data[x][0]]
        return v[-1]


@dataclass
class Budget:
    max_objects: int = 20_000
    max_morphisms: int = 400_000


def _chain_counts(two, d: int) -> list[list[tuple]]:
    from .twocat import _chains

    return [list(_chains(two, n)) for n in range(d + 1)]


def estimate_k_objects(two, fiber_sizes: list[int], d: int) -> int:
    return sum(fiber_sizes[v[-1]] for level in _chain_counts(two, d) for v, _ in level)


def _cell(two, a, b, g):
    return two.homs[(a, b)].obj_data[g]


def build_k_total(w: WaldhausenData, q: int, trunc: tuple[int, int, int], budget: Budget | None = None,
                  sc: SConstr | None = None) -> tuple[KTotal, CoeffFunctor]:
    """Total category of the special cofibration over the nerve of ``Mat(F_q)``.

    ``trunc = (d, m, r)``: simplicial degree d (for the nerve and for SC),
    sets of size at most m, entry dimensions at most r.  Objects are pairs
    (chain, vector of SC-chains over a common level, one per element of the
    last set).  A morphism over a nerve map k with target composite g is
    ``(k, x, psi)`` with ``psi: V(g) x -> y`` in the fiber.
    """
    from .twocat import nerve2, restrict_chain, segment_cell, segment_composite

    budget = budget or Budget()
    d, m, r = trunc
    if getattr(w.cat, "q", q) != q:
        raise ValueError("the field acting on matrices must be the field of the Waldhausen category")
    sc = sc or s_construction(w, d)
    two = mat_k(q, m, r)
    act = VectAction(sc, two, m)
    est = estimate_k_objects(two, [f.n_obj for f in act.fp], d)
    if est > budget.max_objects:
        raise BudgetExceeded("objects of the total category", est, budget.max_objects)
    nf = nerve2(two, d)
    nt = nf.total
    fp = act.fp

    def cell_of(n, v, s, i, j):
        g = segment_composite(two, v, s, i, j)
        return g, _cell(two, v[i], v[j], g)

    plan = []
    count = 0
    for k, (theta, n, v, s, alphas) in enumerate(nt.mor_data):
        i0 = theta[-1]
        a, b = v[i0], v[n]
        g, gc = cell_of(n, v, s, i0, n)
        for x in range(fp[a].n_obj):
            y0 = x if i0 == n else act.apply_obj(a, b, gc, x)
            if y0 is not None:
                plan.append((k, x, y0))
                count += len(fp[b].out_of[y0])
        if count > budget.max_morphisms:
            raise BudgetExceeded("morphisms of the total category", count, budget.max_morphisms)

    objs = [(o, x) for o, (n, v, s) in enumerate(nt.obj_data) for x in range(fp[v[-1]].n_obj)]
    mors = []
    for k, x, y0 in plan:
        o1, o2 = nt.src[k], nt.tgt[k]
        b = nt.obj_data[o2][1][-1]
        for psi in fp[b].out_of[y0]:
            mors.append(((k, x, psi), (o1, x), (o2, fp[b].tgt[psi])))

    def compose(g2, f1):
        k2, x1, psi2 = g2
        k1, x0, psi1 = f1
        th2, n2, v2, s2, al2 = nt.mor_data[k2]
        th1, n1, v1, s1, _ = nt.mor_data[k1]
        a0, b1, c2 = v1[th1[-1]], v1[n1], v2[n2]
        fb, fc = fp[b1], fp[c2]
        g1, g1c = cell_of(n1, v1, s1, th1[-1], n1)
        if th1[-1] < n1:
            mid_v, _ = restrict_chain(two, v2, s2, th2)
            abar = segment_cell(two, mid_v, al2, th1[-1], n1)
            inv = two.homs[(a0, b1)].inverse(abar)
            ainv = act.two_cell(a0, b1, g1c, two.homs[(a0, b1)].mor_data[inv][1], x0)
        else:
            ainv = None
        # psi1 o A^{-1} : V(g1) x0 -> x1 (in fp[b1])
        step = psi1 if ainv is None else fb.compose(psi1, ainv)
        if th2[-1] < n2:
            g2c = cell_of(n2, v2, s2, th2[-1], n2)[1]
            step = act.apply_mor(b1, c2, g2c, step)
            if th1[-1] < n1:
                cmp = act.compare(a0, b1, c2, g1c, g2c, x0)
                step = fc.compose(step, fc.inverse(cmp))
        return (nt.compose(k2, k1), x0, fc.compose(psi2, step))

    def identity(o):
        nidx, x = o
        n, v, s = nt.obj_data[nidx]
        return (nt.identities[nidx], x, fp[v[-1]].identities[x])

    cat = LazyCat(objs, mors, identity, compose)
    phi = FunctorData(cat, nt, [o[0] for o in objs], [key[0] for key in cat.mor_data], check=False)
    kt = KTotal(cat, phi, nf, act, trunc, {"objects": cat.n_obj, "morphisms": cat.n_mor,
                                            "nerve_objects": nt.n_obj, "nerve_morphisms": nt.n_mor})
    return kt, rank_coeff(kt)


def rank_coeff(kt: KTotal, ring: LocalizationSpec | None = None) -> CoeffFunctor:
    """Contravariant functor with value ``R^{last set}`` and transposed rank matrices as actions."""
    from .twocat import segment_composite

    nt, two = kt.nerve.total, kt.nerve.two
    ranks = [kt.last_size(x) for x in range(kt.cat.n_obj)]
    cache = {}

    def act(f):
        k = kt.cat.mor_data[f][0]
        if k not in cache:
            theta, n, v, s, _ = nt.mor_data[k]
            g = segment_composite(two, v, s, theta[-1], n)
            cache[k] = rank_matrix(_cell(two, v[theta[-1]], v[n], g), (v[theta[-1]], v[n])).T
        return cache[k]

    kwargs = {} if ring is None else {"ring": ring}
    return CoeffFunctor(kt.cat, "contra", ranks, LazyActions(kt.cat.n_mor, act), check=False, **kwargs)


def _components(c: FinCat) -> int:
    parent = list(range(c.n_obj))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for f in range(c.n_mor):
        a, b = find(c.src[f]), find(c.tgt[f])
        if a != b:
            parent[a] = b
    return len({find(a) for a in range(c.n_obj)})


@dataclass
class H0Presentation:
    group: FgAbGroup
    generators: int
    relations: int
    chains: int


def kr_h0_presentation(w: WaldhausenData, q: int, trunc: tuple[int, int, int], sc: SConstr | None = None) -> H0Presentation:
    """Degree-0 homology of the total category with rank coefficients, without building it.

    Every fiber ``SC x_Delta ... x_Delta SC`` is checked to be connected, so
    the fiber coordinates collapse in degree 0 and one generator block
    ``R^{last set}`` per chain remains.  Relations come from cartesian lifts
    of cofaces and codegeneracies (nerve maps over identities are
    automorphisms of a chain and act trivially); the transported object is
    the zero vector, which is always defined.
    """
    from .simpset import codegeneracy, coface
    from .twocat import _chains, restrict_chain, segment_composite

    d, m, r = trunc
    sc = sc or s_construction(w, d)
    two = mat_k(q, m, r)
    act = VectAction(sc, two, m)
    for k, f in enumerate(act.fp):
        if _components(f) != 1:
            raise CategoryError(f"fiber product of {k} copies of SC is not connected")
    levels = [list(_chains(two, n)) for n in range(d + 1)]
    offset, total = {}, 0
    for n, level in enumerate(levels):
        for v, s in level:
            offset[(n, v, s)] = total
            total += v[-1]
    trip, col = [], 0
    for n, level in enumerate(levels):
        maps = [coface(n, i) for i in range(n + 1)] if n >= 1 else []
        if n + 1 <= d:
            maps += [codegeneracy(n, j) for j in range(n + 1)]
        for v, s in level:
            o = offset[(n, v, s)]
            for theta in maps:
                rv, rs = restrict_chain(two, v, s, theta)
                o2 = offset[(len(theta) - 1, rv, rs)]
                g = segment_composite(two, v, s, theta[-1], n)
                rk = rank_matrix(_cell(two, v[theta[-1]], v[n], g), (v[theta[-1]], v[n]))
                for t in range(v[-1]):
                    trip.append((o + t, col, 1))
                    for s2 in range(v[theta[-1]]):
                        val = rk[t, s2]
                        if val:
                            trip.append((o2 + s2, col, -val))
                    col += 1
    from .funhom import _coker

    rel = IntMatrix.from_triplets(total, col, trip)
    return H0Presentation(_coker(total, rel), total, col, sum(len(l) for l in levels))


# ---------------------------------------------------------------------------
# homology of the localized K-theory complex


def _char(q: int) -> int:
    return {2: 2, 3: 3, 4: 2}[q]


@dataclass
class KRResult:
    params: dict
    groups: list          # FgAbGroup (localized) or None past valid_through
    valid_through: int
    route: str
    sizes: dict
    wall_time: float

    def to_json(self, ring: LocalizationSpec) -> dict:
        from .exactlin import render_local

        return {
            "params": self.params,
            "groups": [None if g is None else dict(g.to_json(), local=render_local(g, ring)) for g in self.groups],
            "valid_through": self.valid_through,
            "route": self.route,
            "sizes": self.sizes,
        }


def kr_homology(w: WaldhausenData, q: int, ring: LocalizationSpec, trunc: tuple[int, int, int], max_deg: int,
                budget: Budget | None = None, route: str = "auto", sc: SConstr | None = None) -> KRResult:
    """Homology of ``Z (x)^L T`` over the truncated total category, localized at R.

    ``route="full"`` builds the total category and runs the resolution Tor
    engine; ``"presentation"`` computes degree 0 only.  ``"auto"`` tries the
    full route and falls back when the size budget is exceeded.
    """
    if ring.mode != "local_at_prime" or ring.p != _char(q):
        raise ValueError(f"coefficients must be Z localized at the characteristic {_char(q)} of F_{q}")
    d, m, r = trunc
    params = {"q": q, "p": ring.p, "dim_bound": w.cat.dim_bound if hasattr(w.cat, "dim_bound") else None,
              "nerve_deg": d, "set_size": m, "rank_bound": r, "max_deg": max_deg}
    t0 = time.perf_counter()
    sc = sc or s_construction(w, d)
    if route in ("auto", "full"):
        try:
            kt, t = build_k_total(w, q, trunc, budget, sc=sc)
        except BudgetExceeded as e:
            if route == "full":
                raise
            fallback = {"budget": str(e)}
        else:
            e = CoeffFunctor.constant(kt.cat)
            groups = [localize(g, ring) for g in tor_by_resolution(e, t, max_deg)]
            sizes = dict(kt.sizes, bar_ranks=_low_bar_ranks(kt.cat, t, min(max_deg, 1)))
            return KRResult(params, groups, truncation_bound(d, max_deg), "full", sizes, time.perf_counter() - t0)
    else:
        fallback = {}
    pres = kr_h0_presentation(w, q, trunc, sc=sc)
    groups = [localize(pres.group, ring)] + [None] * max_deg
    sizes = dict(fallback, chains=pres.chains, generators=pres.generators, relations=pres.relations)
    return KRResult(params, groups, min(0, truncation_bound(d, max_deg)), "presentation", sizes,
                    time.perf_counter() - t0)


def truncation_bound(d: int, max_deg: int) -> int:
    """Degrees below the top nerve level are not affected by the truncation of Δ."""
    return min(max_deg, max(d - 1, 0))


def _low_bar_ranks(c: FinCat, t: CoeffFunctor, upto: int) -> list[int]:
    """Ranks of the bar complex in degrees 0 and 1 (constant Z against t)."""
    out = [sum(t.rank(x) for x in range(c.n_obj))]
    if upto >= 1:
        out.append(sum(t.rank(c.tgt[f]) for f in range(c.n_mor) if not c.is_identity(f)))
    return out


def kr_tower(q: int, ring: LocalizationSpec, dims: Sequence[int], degs: Sequence[int], m: int, r: int, max_deg: int,
             budget: Budget | None = None) -> list[KRResult]:
    out = []
    for dim in dims:
        w = build_fq_vect(q, dim)
        for d in degs:
            out.append(kr_homology(w, q, ring, (d, m, r), max_deg, budget))
    return out


K0_NOTE = ("the nerve of SC is connected with abelian fundamental group K_0, "
           "so its first homology is K_0 once the truncation contains enough simplices")


def k0_via_h1(w: WaldhausenData, d: int, ring: LocalizationSpec | None = None, sc: SConstr | None = None) -> FgAbGroup:
    """First homology of the nerve of the truncated S-construction."""
    sc = sc or s_construction(w, d)
    e = CoeffFunctor.constant(sc.sc)
    h1 = tor_by_resolution(e, CoeffFunctor.constant(sc.sc, "contra"), 1)[1]
    return h1 if ring is None else localize(h1, ring)


def k0_tower(q: int, dims: Sequence[int], degs: Sequence[int], ring: LocalizationSpec | None = None) -> dict:
    values = {}
    for dim in dims:
        w = build_fq_vect(q, dim)
        for d in degs:
            values[(dim, d)] = k0_via_h1(w, d, ring)
    return {"values": values, "target": "Z", "note": K0_NOTE}
