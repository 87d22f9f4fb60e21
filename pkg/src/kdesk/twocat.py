"""Finite strict 2-categories, their nerves over the simplex category, and 2-representables.

Composition of 1-cells may be partial: size-bounded truncations (spans,
matrices) simply leave out composites that fall outside the bound.  Nerve
levels then keep only chains all of whose interval composites exist.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Hashable, Sequence

from .exactlin import ChainComplex, IntMatrix, homology
from .fincat import CategoryError, FinCat, FunctorData, classify, cyclic_group, discrete
from .funhom import CoeffFunctor, FunctorComplex, lkan
from .simpset import compose as mcompose
from .simpset import delta_category, ident, monotone_maps


class TwoCategoryError(CategoryError):
    pass


class Fin2Cat:
    """Strict 2-category with finite hom categories.

    ``homs[(a, b)]`` is a FinCat whose objects are 1-cells and morphisms
    2-cells.  ``comp1[(a, b, c)]`` maps ``(g, f)`` (object indices, g after f)
    to the index of ``g o f``; ``comp2`` does the same for 2-cells
    (horizontal composition).  Missing keys mean the composite lies outside
    the truncation.  ``associator`` is None for strict associativity.
    """

    def __init__(self, objects, homs, units, comp1, comp2, associator=None, check=True):
        self.objects = list(objects)
        self.homs: dict[tuple[int, int], FinCat] = homs
        self.units = list(units)
        self.comp1 = comp1
        self.comp2 = comp2
        self.associator = associator
        if check:
            self.validate()

    @property
    def n_obj(self):
        return len(self.objects)

    def hom(self, a, b) -> FinCat:
        return self.homs[(a, b)]

    def c1(self, a, b, c, g, f):
        return self.comp1[(a, b, c)].get((g, f))

    def c2(self, a, b, c, beta, alpha):
        return self.comp2[(a, b, c)].get((beta, alpha))

    def unit_cell(self, a) -> int:
        """Identity 2-cell of the unit 1-cell at a."""
        return self.homs[(a, a)].identities[self.units[a]]

    def validate(self) -> None:
        n = self.n_obj
        for a, b, c in itertools.product(range(n), repeat=3):
            hab, hbc, hac = self.homs[(a, b)], self.homs[(b, c)], self.homs[(a, c)]
            t1, t2 = self.comp1[(a, b, c)], self.comp2[(a, b, c)]
            for (beta, alpha), v in t2.items():
                s = self.c1(a, b, c, hbc.src[beta], hab.src[alpha])
                t = self.c1(a, b, c, hbc.tgt[beta], hab.tgt[alpha])
                if s is None or t is None or hac.src[v] != s or hac.tgt[v] != t:
                    raise TwoCategoryError("horizontal composition does not respect 2-cell endpoints")
            for (g, f), gf in t1.items():
                if t2.get((hbc.identities[g], hab.identities[f])) != hac.identities[gf]:
                    raise TwoCategoryError("horizontal composition does not preserve identity 2-cells")
            # interchange law on the domain of definition
            for (b1, a1), v1 in t2.items():
                for b2 in hbc.out_of[hbc.tgt[b1]]:
                    for a2 in hab.out_of[hab.tgt[a1]]:
                        v2 = t2.get((b2, a2))
                        if v2 is None:
                            continue
                        lhs = hac.compose(v2, v1)
                        rhs = t2.get((hbc.compose(b2, b1), hab.compose(a2, a1)))
                        if lhs != rhs:
                            raise TwoCategoryError("interchange law fails")
        for a in range(n):
            for b in range(n):
                h = self.homs[(a, b)]
                for x in range(h.n_mor):
                    if self.c2(a, b, b, self.unit_cell(b), x) != x or self.c2(a, a, b, x, self.unit_cell(a)) != x:
                        raise TwoCategoryError("unit 1-cells are not strict units")
        if self.associator is not None:
            raise TwoCategoryError("non-identity associators are not supported by the nerve construction")
        for a, b, c, d in itertools.product(range(n), repeat=4):
            for (h, g), hg in self.comp2[(b, c, d)].items():
                for f in range(self.homs[(a, b)].n_mor):
                    gf = self.c2(a, b, c, g, f)
                    left = self.c2(a, b, d, hg, f)
                    if gf is None or left is None:
                        continue
                    if left != self.c2(a, c, d, h, gf):
                        raise TwoCategoryError("horizontal composition is not associative")

    @classmethod
    def from_category(cls, c: FinCat) -> "Fin2Cat":
        """A 1-category as a 2-category with discrete hom categories."""
        n = c.n_obj
        homs, pos = {}, {}
        for a in range(n):
            for b in range(n):
                hs = c.hom(a, b)
                homs[(a, b)] = discrete(len(hs))
                for k, m in enumerate(hs):
                    pos[m] = k
        comp1 = {}
        for a, b, cc in itertools.product(range(n), repeat=3):
            comp1[(a, b, cc)] = {
                (pos[g], pos[f]): pos[c.compose(g, f)] for f in c.hom(a, b) for g in c.hom(b, cc)
            }
        units = [pos[c.identities[a]] for a in range(n)]
        return cls([c.objects[a] for a in range(n)], homs, units, comp1, {k: dict(v) for k, v in comp1.items()})

    def __repr__(self):
        return f"Fin2Cat<{self.n_obj} objects>"


def one_object_2group(order: int = 2) -> Fin2Cat:
    """One object, one 1-cell, and 2-cells the cyclic group of the given order."""
    g = cyclic_group(order)
    comp1 = {(0, 0, 0): {(0, 0): 0}}
    comp2 = {(0, 0, 0): {(b, a): (a + b) % order for a in range(order) for b in range(order)}}
    return Fin2Cat(["*"], {(0, 0): g}, [0], comp1, comp2)


# ---------------------------------------------------------------------------
# nerve over the simplex category


@dataclass
class NerveFibration:
    total: FinCat
    proj: FunctorData
    special: list[bool]
    d: int
    two: Fin2Cat

    def obj_chain(self, x: int):
        return self.total.obj_data[x]


def _chains(c: Fin2Cat, n: int, start: int | None = None):
    """Chains of n composable 1-cells whose interval composites all exist.

    Yields ``(vertices, cells)``; cells are 1-cell indices.
    """
    starts = range(c.n_obj) if start is None else [start]

    def extend(verts, cells, comps):
        if len(cells) == n:
            yield tuple(verts), tuple(cells)
            return
        a = verts[-1]
        for b in range(c.n_obj):
            h = c.homs[(a, b)]
            for f in range(h.n_obj):
                new = []
                ok = True
                # comps[i] is the composite from vertex i to the last vertex
                for i, g in enumerate(comps):
                    gf = c.c1(verts[i], a, b, f, g)
                    if gf is None:
                        ok = False
                        break
                    new.append(gf)
                if ok:
                    yield from extend(verts + [b], cells + [f], new + [f])

    for a in starts:
        yield from extend([a], [], [])


def segment_composite(c: Fin2Cat, verts, cells, i: int, j: int) -> int:
    """1-cell composite of ``cells[i..j-1]`` (vertices i to j); the unit if i == j."""
    if i == j:
        return c.units[verts[i]]
    g = cells[i]
    for k in range(i + 1, j):
        g = c.c1(verts[i], verts[k], verts[k + 1], cells[k], g)
    return g


def segment_cell(c: Fin2Cat, verts, alphas, i: int, j: int) -> int:
    """Horizontal composite of 2-cells ``alphas[i..j-1]``."""
    if i == j:
        return c.unit_cell(verts[i])
    g = alphas[i]
    for k in range(i + 1, j):
        g = c.c2(verts[i], verts[k], verts[k + 1], alphas[k], g)
    return g


def restrict_chain(c: Fin2Cat, verts, cells, theta):
    """``theta^*`` of a chain: vertices ``x_theta(j)``, composites over each segment."""
    nv = tuple(verts[t] for t in theta)
    nc = tuple(segment_composite(c, verts, cells, theta[j - 1], theta[j]) for j in range(1, len(theta)))
    return nv, nc


def restrict_cells(c: Fin2Cat, verts, alphas, theta):
    return tuple(segment_cell(c, verts, alphas, theta[j - 1], theta[j]) for j in range(1, len(theta)))


def _fiber_morphisms_into(c: Fin2Cat, verts, cells):
    """All tuples of 2-cells with the given targets."""
    choices = []
    for j, f in enumerate(cells):
        h = c.homs[(verts[j], verts[j + 1])]
        choices.append(h.into[f])
    return itertools.product(*choices)


def _is_iso_tuple(c: Fin2Cat, verts, alphas) -> bool:
    return all(c.homs[(verts[j], verts[j + 1])].is_iso(a) for j, a in enumerate(alphas))


def is_terminal_segment(theta: tuple, n: int) -> bool:
    m = len(theta) - 1
    return theta == tuple(range(n - m, n + 1))


def nerve2(c: Fin2Cat, d: int) -> NerveFibration:
    """Total category over ``Delta_{<=d}`` of the levels ``N(C)_n`` (products of hom categories)."""
    if c.associator is not None:
        raise TwoCategoryError("nerve2 needs strictly associative composition")
    levels = [list(_chains(c, n)) for n in range(d + 1)]
    objs = [(n, v, s) for n in range(d + 1) for v, s in levels[n]]
    present = set(objs)
    mors = []
    for n in range(d + 1):
        for v, s in levels[n]:
            for m in range(d + 1):
                for theta in monotone_maps(m, n):
                    rv, rs = restrict_chain(c, v, s, theta)
                    for alphas in _fiber_morphisms_into(c, rv, rs):
                        src = tuple(c.homs[(rv[j], rv[j + 1])].src[a] for j, a in enumerate(alphas))
                        if (m, rv, src) not in present:
                            continue
                        mors.append(((theta, n, v, s, alphas), (m, rv, src), (n, v, s)))

    def compose(g, f):
        th2, n, v, s, beta = g
        th1, m, v1, s1, alpha = f
        rv = tuple(v1[t] for t in th1)  # vertices of the middle chain restricted
        mid_v = tuple(v[t] for t in th2)
        rb = restrict_cells(c, mid_v, beta, th1)
        new = tuple(c.homs[(rv[j], rv[j + 1])].compose(rb[j], alpha[j]) for j in range(len(alpha)))
        return (mcompose(th2, th1), n, v, s, new)

    def identity(o):
        n, v, s = o
        return (ident(n), n, v, s, tuple(c.homs[(v[j], v[j + 1])].identities[f] for j, f in enumerate(s)))

    total = FinCat.from_compose(objs, mors, identity, compose, name=str, validate=False)
    dc = delta_category(d)
    proj = FunctorData(
        total,
        dc,
        [o[0] for o in objs],
        [dc.mor_index((len(k[0]) - 1, k[1], k[0])) for k in total.mor_data],
        check=False,
    )
    special = []
    for k in total.mor_data:
        theta, n, v, s, alphas = k
        rv = tuple(v[t] for t in theta)
        special.append(is_terminal_segment(theta, n) and _is_iso_tuple(c, rv, alphas))
    return NerveFibration(total, proj, special, d, c)


def mark_special(nf: NerveFibration, check: bool = True) -> list[bool]:
    """Cartesian morphisms lying over terminal-segment inclusions.

    With ``check`` the marking is compared to an exhaustive cartesianness
    test and closure under composition is verified.
    """
    marked = list(nf.special)
    if check:
        cart = classify(nf.proj).cartesian
        for k, key in enumerate(nf.total.mor_data):
            theta, n = key[0], key[1]
            if marked[k] != (cart[k] and is_terminal_segment(theta, n)):
                raise TwoCategoryError(f"special marking disagrees with cartesianness at {key}")
        t = nf.total
        for g, f in t.composable_pairs():
            if marked[g] and marked[f] and not marked[t.compose(g, f)]:
                raise TwoCategoryError("special maps are not closed under composition")
    return marked


# ---------------------------------------------------------------------------
# 2-representables


def rho_tilde(nf: NerveFibration, c: int) -> tuple[FinCat, FunctorData]:
    """Special cofibration over the nerve whose fiber over a chain is ``C(c, x_n)^op``.

    Objects are pairs of a chain ``s`` and a 1-cell ``h: c -> x_n``; a
    morphism over ``(theta, alpha)`` carries a 2-cell ``gamma: h' => g o h`` with g the composite of the target chain from
    ``theta(m)`` to its end.
    """
    two = nf.two
    d = nf.d
    objs = [(n, v, s, h) for n, v, s in nf.total.obj_data for h in range(two.homs[(c, v[-1])].n_obj)]
    by_chain: dict[tuple, list] = {}
    for o in objs:
        by_chain.setdefault((o[0], o[1], o[2]), []).append(o[3])
    mors = []
    total = nf.total
    for m_idx, key in enumerate(total.mor_data):
        theta, n, v, s, alphas = key
        m = len(theta) - 1
        rv = tuple(v[t] for t in theta)
        src_cells = tuple(two.homs[(rv[j], rv[j + 1])].src[a] for j, a in enumerate(alphas))
        g = segment_composite(two, v, s, theta[-1], n)
        for h in by_chain.get((m, rv, src_cells), []):
            gh = two.c1(c, rv[-1], v[-1], g, h) if theta[-1] < n else h
            if gh is None:
                continue
            hc = two.homs[(c, v[-1])]
            for h2 in by_chain.get((n, v, s), []):
                for gamma in hc.hom(h2, gh):
                    mors.append(((m_idx, h, h2, gamma), (m, rv, src_cells, h), (n, v, s, h2)))

    def compose(g2, g1):
        m2, hm, h2, gam2 = g2
        m1, h0, hm_, gam1 = g1
        th2, n, v, s, beta = total.mor_data[m2]
        th1, mm, v1, s1, alpha = total.mor_data[m1]
        hc = two.homs[(c, v[-1])]
        mid_v = tuple(v[t] for t in th2)
        # g2 = composite of the final chain from th2(end) to n; g1 likewise for the middle chain
        g2c = segment_composite(two, v, s, th2[-1], n)
        x_mid = mid_v[-1]
        # whisker gam1 (in C(c, x_mid)) by g2
        if th2[-1] < n:
            w1 = two.c2(c, x_mid, v[-1], two.homs[(x_mid, v[-1])].identities[g2c], gam1)
        else:
            w1 = gam1
        # transport alpha-bar: beta restricted along the middle segment [th1(end), m]
        mlen = len(mid_v) - 1
        abar = segment_cell(two, mid_v, beta, th1[-1], mlen)
        x0 = mid_v[th1[-1]]
        hcx = two.homs[(c, x0)]
        if th1[-1] < mlen:
            step = two.c2(c, x0, x_mid, abar, hcx.identities[h0])
        else:
            step = two.homs[(c, x_mid)].identities[h0]
        if th2[-1] < n:
            step = two.c2(c, x_mid, v[-1], two.homs[(x_mid, v[-1])].identities[g2c], step)
        gam = hc.compose(step, hc.compose(w1, gam2))
        return (total.compose(m2, m1), h0, h2, gam)

    def identity(o):
        n, v, s, h = o
        return (total.identities[total.obj_index((n, v, s))], h, h, two.homs[(c, v[-1])].identities[h])

    cat = FinCat.from_compose(objs, mors, identity, compose, name=str, validate=False)
    proj = FunctorData(
        cat,
        total,
        [total.obj_index((o[0], o[1], o[2])) for o in objs],
        [k[0] for k in cat.mor_data],
        check=False,
    )
    return cat, proj


def two_representable(c2: Fin2Cat, c: int, d: int, max_deg: int, route: str = "auto", nf=None):
    """Derived pushforward of the constant functor along the special cofibration at c.

    Returns ``(complex, nerve)``; the complex lives on the nerve's total category.
    With ``route="auto"`` the fiber model is used when the projection is a
    cofibration.  Size-bounded truncations can break this, since composites
    ``g o h`` leaving the bound are missing; the comma model is used then.
    """
    nf = nerve2(c2, d) if nf is None else nf
    cat, p = rho_tilde(nf, c)
    if route == "auto":
        route = "fiber" if classify(p).cofibration else "comma"
    e = CoeffFunctor.constant(cat)
    return lkan(p, e, max_deg, route=route), nf


def is_quasi_iso(f: dict[int, IntMatrix], a: ChainComplex, b: ChainComplex, upto: int) -> bool:
    """Mapping cone of ``f: A -> B`` acyclic in degrees ``0..upto``."""
    lo, hi = 0, min(upto + 1, a.hi + 1, b.hi)
    ranks = {n: (a.rank(n - 1) if n - 1 >= a.lo else 0) + b.rank(n) for n in range(lo, hi + 1)}
    diffs = {}
    for n in range(lo + 1, hi + 1):
        ra1, rb = a.rank(n - 1), b.rank(n)
        ra2, rb1 = a.rank(n - 2) if n - 2 >= a.lo else 0, b.rank(n - 1)
        trip = []
        if n - 1 > a.lo:
            for i, j, v in a.d(n - 1).items():
                trip.append((i, j, -v))
        for i, j, v in f[n - 1].items():
            trip.append((ra2 + i, j, v))
        for i, j, v in b.d(n).items():
            trip.append((ra2 + i, ra1 + j, v))
        diffs[n] = IntMatrix.from_triplets(ra2 + rb1, ra1 + rb, trip)
    cone = ChainComplex(lo, hi, ranks, diffs)
    return all(homology(cone, n).is_zero() for n in range(lo, min(upto + 1, hi)))


# ---------------------------------------------------------------------------
# spans of finite sets


def q_gamma(m: int) -> Fin2Cat:
    """Spans ``a <- S -> b`` of sets of size at most m with isomorphisms.

    Objects are sizes ``0..m``; a 1-cell is ``(k, l, r)`` with S = range(k).
    Composition is the pullback ordered lexicographically, which is strictly
    associative; composites with ``|S| > m`` are left out.  Each object also
    gets a formal unit ``("1", a)``, isomorphic to the identity span, so that
    units are strict on both sides.
    """
    sizes = list(range(m + 1))

    def span(x):
        if x[0] == "1":
            a = x[1]
            return a, tuple(range(a)), tuple(range(a))
        return x

    homs = {}
    for a in sizes:
        for b in sizes:
            cells = [(k, l, r) for k in range(m + 1)
                     for l in itertools.product(range(a), repeat=k)
                     for r in itertools.product(range(b), repeat=k)]
            if a == b:
                cells.append(("1", a))
            by_span = {}
            for x in cells:
                by_span.setdefault(span(x), []).append(x)
            mors = []
            for x in cells:
                k, l, r = span(x)
                for perm in itertools.permutations(range(k)):
                    # perm: S -> S' with l' o perm = l, r' o perm = r
                    l2 = [None] * k
                    r2 = [None] * k
                    for s in range(k):
                        l2[perm[s]] = l[s]
                        r2[perm[s]] = r[s]
                    for y in by_span[(k, tuple(l2), tuple(r2))]:
                        mors.append(((x, y, perm), x, y))
            homs[(a, b)] = FinCat.from_compose(
                cells,
                mors,
                identity=lambda x: (x, x, tuple(range(span(x)[0]))),
                compose=lambda g, f: (f[0], g[1], tuple(g[2][f[2][s]] for s in range(len(f[2])))),
                name=str,
                validate=False,
            )
    units = [homs[(a, a)].obj_index(("1", a)) for a in sizes]

    def composite(g, f):
        """Key of ``g o f`` and the labelling of its elements by pairs (s, s')."""
        if f[0] == "1":
            k, l, r = span(g)
            return g, [(l[t], t) for t in range(k)]
        if g[0] == "1":
            k, l, r = f
            return f, [(s, r[s]) for s in range(k)]
        k, l, r = f
        k2, l2, r2 = g
        pairs = [(s, t) for s in range(k) for t in range(k2) if r[s] == l2[t]]
        return (len(pairs), tuple(l[s] for s, _ in pairs), tuple(r2[t] for _, t in pairs)), pairs

    comp1, comp2 = {}, {}
    for a, b, c in itertools.product(sizes, repeat=3):
        hab, hbc, hac = homs[(a, b)], homs[(b, c)], homs[(a, c)]
        t1, t2 = {}, {}
        labels = {}
        for fi, f in enumerate(hab.obj_data):
            for gi, g in enumerate(hbc.obj_data):
                cell, pairs = composite(g, f)
                if span(cell)[0] > m:
                    continue
                t1[(gi, fi)] = hac.obj_index(cell)
                labels[(gi, fi)] = (cell, pairs)
        for ai, (fx, fy, pa) in enumerate(hab.mor_data):
            for bi, (gx, gy, pb) in enumerate(hbc.mor_data):
                src = labels.get((hbc.src[bi], hab.src[ai]))
                tgt = labels.get((hbc.tgt[bi], hab.tgt[ai]))
                if src is None or tgt is None:
                    continue
                tpos = {p: q for q, p in enumerate(tgt[1])}
                perm = tuple(tpos[(pa[s], pb[t])] for s, t in src[1])
                t2[(bi, ai)] = hac.mor_index((src[0], tgt[0], perm))
        comp1[(a, b, c)] = t1
        comp2[(a, b, c)] = t2
    return Fin2Cat([f"[{a}]" for a in sizes], homs, units, comp1, comp2, check=False)


def span_classes(two: Fin2Cat, a: int, b: int) -> int:
    """Number of isomorphism classes of 1-cells ``a -> b``."""
    h = two.homs[(a, b)]
    seen, classes = set(), 0
    for x in range(h.n_obj):
        if x in seen:
            continue
        classes += 1
        for y in range(h.n_obj):
            if any(h.is_iso(f) for f in h.hom(x, y)):
                seen.add(y)
    return classes
