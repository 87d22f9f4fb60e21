"""Functors from finite categories to free abelian groups, and Tor between them.

A ``CoeffFunctor`` stores a rank per object and an action matrix per
morphism.  For a covariant functor the matrix of ``f: c -> c'`` maps
``E(c)`` to ``E(c')``; for a contravariant one it maps ``T(c')`` to ``T(c)``.

Tor is available two ways: the normalized two-sided bar complex over
identity-free chains, and dimension shifting along free covers by
representables.  The second one never enumerates chains, so it reaches
categories far too large for the bar complex.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .exactlin import (
    ChainComplex,
    FgAbGroup,
    IntMatrix,
    Lattice,
    LocalizationSpec,
    homology,
    invariant_factors,
    kernel_basis,
    left_inverse,
    localize,
)
from .fincat import (
    CategoryError,
    FinCat,
    FunctorData,
    classify,
    comma,
    fiber,
    opposite,
)

ZZ = LocalizationSpec.integers()


class FunctorError(ValueError):
    pass


class LazyActions(Sequence):
    """Action matrices computed on first use and cached.

    Used for functors on large bases where only a generating set of
    morphisms is ever touched.
    """

    def __init__(self, n: int, fn: Callable[[int], IntMatrix]):
        self._n = n
        self._fn = fn
        self._cache: dict[int, IntMatrix] = {}

    def __len__(self):
        return self._n

    def __getitem__(self, f):
        if isinstance(f, slice):
            return [self[i] for i in range(*f.indices(self._n))]
        m = self._cache.get(f)
        if m is None:
            if not 0 <= f < self._n:
                raise IndexError(f)
            m = self._cache[f] = self._fn(f)
        return m


class CoeffFunctor:
    def __init__(
        self,
        base: FinCat,
        variance: str,
        ranks: Sequence[int],
        actions: Sequence[IntMatrix],
        ring: LocalizationSpec = ZZ,
        check: bool = True,
    ):
        if variance not in ("co", "contra"):
            raise FunctorError(f"variance must be 'co' or 'contra', not {variance!r}")
        self.base = base
        self.variance = variance
        self.ranks = list(ranks)
        self.actions = actions if isinstance(actions, LazyActions) else list(actions)
        self.ring = ring
        if check:
            self.validate()

    def rank(self, c: int) -> int:
        return self.ranks[c]

    def act(self, f: int) -> IntMatrix:
        return self.actions[f]

    @property
    def covariant(self) -> bool:
        return self.variance == "co"

    def _shape(self, f):
        b = self.base
        if self.covariant:
            return (self.ranks[b.tgt[f]], self.ranks[b.src[f]])
        return (self.ranks[b.src[f]], self.ranks[b.tgt[f]])

    def validate(self, composition: bool = True) -> None:
        b = self.base
        if len(self.ranks) != b.n_obj or len(self.actions) != b.n_mor:
            raise FunctorError("ranks/actions do not match the base category")
        for f in range(b.n_mor):
            if self.actions[f].shape != self._shape(f):
                raise FunctorError(f"action of {b.mor_names[f]} has shape {self.actions[f].shape}, expected {self._shape(f)}")
        for c in range(b.n_obj):
            if self.actions[b.identities[c]] != IntMatrix.identity(self.ranks[c]):
                raise FunctorError(f"identity at {b.objects[c]} does not act as the identity")
        if composition:
            for g, f, gf in b.composition_triples():
                if self.covariant:
                    ok = self.actions[g] @ self.actions[f] == self.actions[gf]
                else:
                    ok = self.actions[f] @ self.actions[g] == self.actions[gf]
                if not ok:
                    raise FunctorError(f"action does not respect {b.mor_names[g]} o {b.mor_names[f]}")

    # constructors -------------------------------------------------------
    @classmethod
    def constant(cls, base: FinCat, variance: str = "co", rank: int = 1, ring=ZZ) -> "CoeffFunctor":
        ident = IntMatrix.identity(rank)
        return cls(base, variance, [rank] * base.n_obj, [ident] * base.n_mor, ring, check=False)

    @classmethod
    def zero(cls, base: FinCat, variance: str = "co") -> "CoeffFunctor":
        return cls.constant(base, variance, 0)

    def pullback(self, p: FunctorData) -> "CoeffFunctor":
        """Restriction along a functor into the base."""
        if p.target is not self.base:
            raise FunctorError("pullback along a functor with the wrong target")
        return CoeffFunctor(
            p.source,
            self.variance,
            [self.ranks[x] for x in p.obj_map],
            [self.actions[m] for m in p.mor_map],
            self.ring,
            check=False,
        )

    def on_opposite(self, base_op: FinCat | None = None) -> "CoeffFunctor":
        """Same data viewed on the opposite category, with the variance flipped."""
        return CoeffFunctor(
            base_op or opposite(self.base),
            "contra" if self.covariant else "co",
            self.ranks,
            self.actions,
            self.ring,
            check=False,
        )

    def pointwise_tensor(self, other: "CoeffFunctor") -> "CoeffFunctor":
        if other.base is not self.base or other.variance != self.variance:
            raise FunctorError("pointwise tensor needs equal base and variance")
        return CoeffFunctor(
            self.base,
            self.variance,
            [a * b for a, b in zip(self.ranks, other.ranks)],
            [IntMatrix.kron(a, b) for a, b in zip(self.actions, other.actions)],
            self.ring,
            check=False,
        )

    def direct_sum(self, other: "CoeffFunctor") -> "CoeffFunctor":
        if other.base is not self.base or other.variance != self.variance:
            raise FunctorError("direct sum needs equal base and variance")
        return CoeffFunctor(
            self.base,
            self.variance,
            [a + b for a, b in zip(self.ranks, other.ranks)],
            [IntMatrix.block_diag([a, b]) for a, b in zip(self.actions, other.actions)],
            self.ring,
            check=False,
        )

    def dual(self) -> "CoeffFunctor":
        """``Hom(-, Z)``: transpose every action and flip the variance."""
        return CoeffFunctor(
            self.base,
            "contra" if self.covariant else "co",
            self.ranks,
            [a.T for a in self.actions],
            self.ring,
            check=False,
        )

    def inverts(self, marked: Sequence[bool]) -> list[int]:
        """Marked morphisms whose action is not invertible over Z."""
        bad = []
        for f, m in enumerate(marked):
            if not m:
                continue
            a = self.actions[f]
            if a.rows != a.cols or invariant_factors(a) != [1] * a.rows:
                bad.append(f)
        return bad

    # serialization ------------------------------------------------------
    def to_json(self, base_ref: str | None = None) -> dict:
        b = self.base
        return {
            "base": base_ref if base_ref is not None else b.to_json(),
            "variance": self.variance,
            "ranks": {b.objects[c]: self.ranks[c] for c in range(b.n_obj)},
            "actions": {b.mor_names[f]: self.actions[f].to_triplets() for f in range(b.n_mor)},
        }

    @classmethod
    def from_json(cls, obj: dict, base: FinCat | None = None) -> "CoeffFunctor":
        if base is None:
            base = FinCat.from_json(obj["base"])
        variance = obj["variance"]
        try:
            ranks = [int(obj["ranks"][o]) for o in base.objects]
        except KeyError as e:
            raise FunctorError(f"ranks: missing object {e}") from None
        acts = []
        for f in range(base.n_mor):
            s, t = base.src[f], base.tgt[f]
            shape = (ranks[t], ranks[s]) if variance == "co" else (ranks[s], ranks[t])
            trip = obj.get("actions", {}).get(base.mor_names[f])
            if trip is None:
                if base.is_identity(f):
                    acts.append(IntMatrix.identity(ranks[s]))
                    continue
                raise FunctorError(f"actions: missing morphism {base.mor_names[f]!r}")
            acts.append(IntMatrix.from_triplets(shape[0], shape[1], trip))
        return cls(base, variance, ranks, acts)

    def __repr__(self):
        return f"CoeffFunctor<{self.variance}, ranks={self.ranks}>"


def representable(c_cat: FinCat, c: int) -> CoeffFunctor:
    """``R_c = Z[C(c, -)]``, covariant; basis of ``R_c(x)`` is ``hom(c, x)`` in index order."""
    pos = {}
    for x in range(c_cat.n_obj):
        for k, h in enumerate(c_cat.hom(c, x)):
            pos[h] = k
    ranks = [len(c_cat.hom(c, x)) for x in range(c_cat.n_obj)]
    acts = []
    for f in range(c_cat.n_mor):
        x, y = c_cat.src[f], c_cat.tgt[f]
        trip = [(pos[c_cat.compose(f, h)], k, 1) for k, h in enumerate(c_cat.hom(c, x))]
        acts.append(IntMatrix.from_triplets(ranks[y], ranks[x], trip))
    return CoeffFunctor(c_cat, "co", ranks, acts, check=False)


def corepresentable(c_cat: FinCat, c: int) -> CoeffFunctor:
    """``Z[C(-, c)]``, contravariant, acting by precomposition."""
    pos = {}
    for x in range(c_cat.n_obj):
        for k, h in enumerate(c_cat.hom(x, c)):
            pos[h] = k
    ranks = [len(c_cat.hom(x, c)) for x in range(c_cat.n_obj)]
    acts = []
    for f in range(c_cat.n_mor):
        x, y = c_cat.src[f], c_cat.tgt[f]
        trip = [(pos[c_cat.compose(h, f)], k, 1) for k, h in enumerate(c_cat.hom(y, c))]
        acts.append(IntMatrix.from_triplets(ranks[x], ranks[y], trip))
    return CoeffFunctor(c_cat, "contra", ranks, acts, check=False)


# ---------------------------------------------------------------------------
# functor complexes


class FunctorComplex:
    """Complex of CoeffFunctors; ``diffs[n][c]`` maps ``terms[n](c)`` to ``terms[n-1](c)``.

    ``strict`` is False when transition maps are functorial only up to
    homotopy (fiberwise models of Kan extensions); naturality of the
    differentials still holds exactly.
    """

    def __init__(self, lo, hi, terms: dict, diffs: dict, valid_through=None, strict=True, check=True):
        self.lo, self.hi = lo, hi
        self.terms = terms
        self.diffs = diffs
        self.valid_through = hi if valid_through is None else valid_through
        self.strict = strict
        if check:
            self.check()

    @property
    def base(self) -> FinCat:
        return self.terms[self.lo].base

    def at(self, c: int) -> ChainComplex:
        ranks = {n: self.terms[n].rank(c) for n in range(self.lo, self.hi + 1)}
        diffs = {n: self.diffs[n][c] for n in range(self.lo + 1, self.hi + 1)}
        return ChainComplex(self.lo, self.hi, ranks, diffs, valid_through=self.valid_through)

    def homology_at(self, c: int, upto: int | None = None) -> list[FgAbGroup]:
        top = self.valid_through if upto is None else min(upto, self.valid_through)
        cc = self.at(c)
        return [homology(cc, n) for n in range(self.lo, top + 1)]

    def check(self) -> None:
        b = self.base
        for n in range(self.lo + 1, self.hi + 1):
            src, tgt = self.terms[n], self.terms[n - 1]
            for c in range(b.n_obj):
                if self.diffs[n][c].shape != (tgt.rank(c), src.rank(c)):
                    raise FunctorError(f"differential {n} at {b.objects[c]} has the wrong shape")
            for f in range(b.n_mor):
                x, y = b.src[f], b.tgt[f]
                if src.covariant:
                    lhs = self.diffs[n][y] @ src.act(f)
                    rhs = tgt.act(f) @ self.diffs[n][x]
                else:
                    lhs = self.diffs[n][x] @ src.act(f)
                    rhs = tgt.act(f) @ self.diffs[n][y]
                if lhs != rhs:
                    raise FunctorError(f"differential {n} is not natural at {b.mor_names[f]}")
        for n in range(self.lo + 2, self.hi + 1):
            for c in range(b.n_obj):
                if not (self.diffs[n - 1][c] @ self.diffs[n][c]).is_zero():
                    raise FunctorError(f"d o d != 0 at {b.objects[c]} in degree {n}")
        if self.strict:
            for n in range(self.lo, self.hi + 1):
                self.terms[n].validate()

    @classmethod
    def concentrated(cls, e: CoeffFunctor, deg: int = 0) -> "FunctorComplex":
        return cls(deg, deg, {deg: e}, {}, check=False)


# ---------------------------------------------------------------------------
# tensor product over a category


def _same_base(e: CoeffFunctor, t: CoeffFunctor):
    if e.base is not t.base:
        raise FunctorError("functors live on different base categories")
    if e.variance != "co" or t.variance != "contra":
        raise FunctorError("need a covariant E and a contravariant T")
    if e.ring != t.ring:
        raise FunctorError("coefficient rings differ")


def _generating_morphisms(c: FinCat) -> list[int]:
    gens = getattr(c, "generating_morphisms", None)
    return list(gens) if gens is not None else c.non_identity()


def tensor_presentation(e: CoeffFunctor, t: CoeffFunctor, morphisms: Sequence[int] | None = None):
    """Presentation of ``E (x)_C T`` as ``(offsets, n_generators, relation matrix)``.

    Generators are ``E(c) (x) T(c)`` for each object c; each morphism
    ``f: c -> c'`` contributes ``E(f) (x) id - id (x) T(f)`` on ``E(c) (x) T(c')``.
    Any set of morphisms generating the category gives the same cokernel.
    """
    b = e.base
    offs, tot = [], 0
    for c in range(b.n_obj):
        offs.append(tot)
        tot += e.rank(c) * t.rank(c)
    mors = _generating_morphisms(b) if morphisms is None else morphisms
    trip = []
    col = 0
    for f in mors:
        x, y = b.src[f], b.tgt[f]
        re, rt_y, rt_x = e.rank(x), t.rank(y), t.rank(x)
        if re == 0 or rt_y == 0:
            continue
        ef, tf = e.act(f), t.act(f)
        # basis a (x) b of E(x) (x) T(y), column col + a*rt_y + b
        for i, j, v in ef.items():  # E(f): E(x) -> E(y)
            for bb in range(rt_y):
                trip.append((offs[y] + i * rt_y + bb, col + j * rt_y + bb, v))
        for i, j, v in tf.items():  # T(f): T(y) -> T(x)
            for a in range(re):
                trip.append((offs[x] + a * rt_x + i, col + a * rt_y + j, -v))
        col += re * rt_y
    return offs, tot, IntMatrix.from_triplets(tot, col, trip)


def _coker(n: int, rel: IntMatrix) -> FgAbGroup:
    facs = invariant_factors(rel)
    return FgAbGroup.from_cyclic(n - len(facs), [f for f in facs if f > 1])


def tensor_over_cat(e: CoeffFunctor, t: CoeffFunctor) -> FgAbGroup:
    _same_base(e, t)
    _, n, rel = tensor_presentation(e, t)
    return localize(_coker(n, rel), e.ring)


# ---------------------------------------------------------------------------
# bar complex


def _bar_blocks(e: CoeffFunctor, t: CoeffFunctor, c: FinCat, n: int):
    chains = c.chains(n)
    offs, tot = [], 0
    for ch in chains:
        a, z = c.chain_ends(n, ch)
        offs.append(tot)
        tot += e.rank(a) * t.rank(z)
    return chains, offs, tot


def bar_complex(e: CoeffFunctor, t: CoeffFunctor, max_deg: int) -> ChainComplex:
    """Normalized two-sided bar complex in degrees ``0..max_deg``.

    Degree n is a sum over chains ``c_0 -> ... -> c_n`` of non-identity
    morphisms of ``E(c_0) (x) T(c_n)``.  Face 0 applies ``E(f_1)``, face n
    applies ``T(f_n)``, inner faces compose and vanish on identities.
    Homology is exact through ``max_deg - 1``.
    """
    _same_base(e, t)
    c = e.base
    levels = [_bar_blocks(e, t, c, n) for n in range(max_deg + 1)]
    index = [{ch: k for k, ch in enumerate(lv[0])} for lv in levels]
    ranks = {n: levels[n][2] for n in range(max_deg + 1)}
    diffs = {}
    for n in range(1, max_deg + 1):
        chains, offs, _ = levels[n]
        prev_idx, prev_offs = index[n - 1], levels[n - 1][1]
        trip = []
        for k, ch in enumerate(chains):
            c0, cn = c.src[ch[0]], c.tgt[ch[-1]]
            re, rt = e.rank(c0), t.rank(cn)
            if re == 0 or rt == 0:
                continue
            col0 = offs[k]
            # face 0: drop c_0 via E(f_1)
            f1 = ch[0]
            new = ch[1:] if n > 1 else (c.tgt[f1],)
            row0 = prev_offs[prev_idx[new]]
            for i, j, v in e.act(f1).items():
                for bb in range(rt):
                    trip.append((row0 + i * rt + bb, col0 + j * rt + bb, v))
            # inner faces
            for i in range(1, n):
                g = c.compose(ch[i], ch[i - 1])
                if c.is_identity(g):
                    continue
                new = ch[: i - 1] + (g,) + ch[i + 1:]
                row0 = prev_offs[prev_idx[new]]
                sgn = -1 if i % 2 else 1
                for a in range(re * rt):
                    trip.append((row0 + a, col0 + a, sgn))
            # face n: drop c_n via T(f_n)
            fn = ch[-1]
            new = ch[:-1] if n > 1 else (c.src[fn],)
            cm = c.src[fn]
            rt2 = t.rank(cm)
            row0 = prev_offs[prev_idx[new]]
            sgn = -1 if n % 2 else 1
            for i, j, v in t.act(fn).items():
                for a in range(re):
                    trip.append((row0 + a * rt2 + i, col0 + a * rt + j, sgn * v))
        diffs[n] = IntMatrix.from_triplets(ranks[n - 1], ranks[n], trip)
    return ChainComplex(0, max_deg, ranks, diffs, valid_through=max_deg - 1)


def bar_ranks(c: FinCat, e: CoeffFunctor, t: CoeffFunctor, max_deg: int) -> list[int]:
    return [_bar_blocks(e, t, c, n)[2] for n in range(max_deg + 1)]


def tor(e: CoeffFunctor, t: CoeffFunctor, max_deg: int, method: str = "bar") -> list[FgAbGroup]:
    """``Tor_i^C(E, T)`` for ``i = 0..max_deg``, localized at the coefficient ring."""
    _same_base(e, t)
    if method == "bar":
        cc = bar_complex(e, t, max_deg + 1)
        groups = [homology(cc, n) for n in range(max_deg + 1)]
    elif method == "resolution":
        groups = tor_by_resolution(e, t, max_deg)
    else:
        raise ValueError(f"unknown Tor method {method!r}")
    return [localize(g, e.ring) for g in groups]


def cat_homology(c: FinCat, e: CoeffFunctor, max_deg: int, method: str = "bar") -> list[FgAbGroup]:
    """``H_i(C, E) = Tor_i(E, Z)`` for ``i = 0..max_deg``."""
    if e.base is not c:
        raise FunctorError("coefficients live on a different category")
    z = CoeffFunctor.constant(c, "contra", 1, e.ring)
    return tor(e, z, max_deg, method)


# ---------------------------------------------------------------------------
# Tor by dimension shifting along free covers


@dataclass
class FreeCover:
    """A surjection ``P -> E`` with P a sum of representables, and its kernel."""

    generators: list[tuple[int, dict[int, int]]]  # (object, vector in E(object))
    p: CoeffFunctor
    map: list[IntMatrix]  # P(c) -> E(c)
    kernel: CoeffFunctor
    kernel_incl: list[IntMatrix]  # K(c) -> P(c)
    basis: list[list[tuple[int, int]]] = field(repr=False, default_factory=list)  # P(c) basis: (generator, morphism)


def _full(lat: Lattice, r: int) -> bool:
    return len(lat) == r and all(p[lead] == 1 for lead, p in lat.pivots.items())


def choose_generators(e: CoeffFunctor, order: Sequence[int] | None = None) -> list[tuple[int, dict[int, int]]]:
    """Greedy generating set for a covariant functor, objects visited in ``order``."""
    b = e.base
    if order is None:
        order = range(b.n_obj)
    lats = [Lattice(e.rank(c)) for c in range(b.n_obj)]
    gens = []
    for c in order:
        r = e.rank(c)
        for i in range(r):
            if _full(lats[c], r):
                break
            v = {i: 1}
            if lats[c].contains(v):
                continue
            gens.append((c, v))
            for f in b.out_of[c]:
                lats[b.tgt[f]].add(e.act(f).apply(v))
    for c in range(b.n_obj):
        if not _full(lats[c], e.rank(c)):
            raise FunctorError(f"generator search left {b.objects[c]} uncovered")
    return gens


def free_cover(e: CoeffFunctor, gens=None, order=None) -> FreeCover:
    if e.variance != "co":
        raise FunctorError("free covers are built for covariant functors")
    b = e.base
    if gens is None:
        gens = choose_generators(e, order)
    basis = [[] for _ in range(b.n_obj)]
    for gi, (c, _) in enumerate(gens):
        for x in range(b.n_obj):
            for h in b.hom(c, x):
                basis[x].append((gi, h))
    pos = [{bh: k for k, bh in enumerate(basis[x])} for x in range(b.n_obj)]
    ranks = [len(bs) for bs in basis]

    def act(f):
        x, y = b.src[f], b.tgt[f]
        trip = [(pos[y][(gi, b.compose(f, h))], k, 1) for k, (gi, h) in enumerate(basis[x])]
        return IntMatrix.from_triplets(ranks[y], ranks[x], trip)

    acts = LazyActions(b.n_mor, act)
    p = CoeffFunctor(b, "co", ranks, acts, e.ring, check=False)
    maps = []
    for x in range(b.n_obj):
        trip = []
        for k, (gi, h) in enumerate(basis[x]):
            for i, v in e.act(h).apply(gens[gi][1]).items():
                trip.append((i, k, v))
        maps.append(IntMatrix.from_triplets(e.rank(x), ranks[x], trip))
    incl = [kernel_basis(m) for m in maps]
    linv: dict[int, IntMatrix] = {}

    def kact(f):
        y = b.tgt[f]
        if y not in linv:
            linv[y] = left_inverse(incl[y])
        return linv[y] @ (acts[f] @ incl[b.src[f]])

    kern = CoeffFunctor(b, "co", [k.cols for k in incl], LazyActions(b.n_mor, kact), e.ring, check=False)
    return FreeCover(gens, p, maps, kern, incl, basis)


def _tor1_from_cover(cov: FreeCover, t: CoeffFunctor) -> FgAbGroup:
    """``Tor_1(E, T) = ker(K (x)_C T -> P (x)_C T)``."""
    b = t.base
    k = cov.kernel
    offs, n, rel = tensor_presentation(k, t)
    # P (x)_C T = sum over generators of T(c_g)
    goffs, gt = [], 0
    for c, _ in cov.generators:
        goffs.append(gt)
        gt += t.rank(c)
    trip = []
    for x in range(b.n_obj):
        rt = t.rank(x)
        if rt == 0 or k.rank(x) == 0:
            continue
        inc = cov.kernel_incl[x]
        for pidx, kj, coef in inc.items():
            gi, h = cov.basis[x][pidx]
            # k_j (x) e_bb  ->  coef * T(h) e_bb in block gi
            for i, bb, v in t.act(h).items():
                trip.append((goffs[gi] + i, offs[x] + kj * rt + bb, coef * v))
    phi = IntMatrix.from_triplets(gt, n, trip)
    ker = kernel_basis(phi)
    if ker.cols == 0:
        return FgAbGroup()
    coords = left_inverse(ker) @ rel
    return _coker(ker.cols, coords)


def tor_by_resolution(e: CoeffFunctor, t: CoeffFunctor, max_deg: int, order=None) -> list[FgAbGroup]:
    """Tor via ``Tor_0 = E (x) T``, ``Tor_1 = ker(K (x) T -> P (x) T)``, ``Tor_i(E) = Tor_{i-1}(K)``."""
    _same_base(e, t)
    out = [_coker(*tensor_presentation(e, t)[1:])]
    cur = e
    for i in range(1, max_deg + 1):
        cov = free_cover(cur, order=order)
        out.append(_tor1_from_cover(cov, t))
        cur = cov.kernel
    return out


# ---------------------------------------------------------------------------
# Kan extensions and relative tensor products


def _chain_map_bar(e_src: CoeffFunctor, e_tgt: CoeffFunctor, fun: FunctorData, coeff, max_deg: int):
    """Chain map between bar complexes against constant Z induced by a functor.

    ``coeff(x)`` is the matrix ``E_src(x) -> E_tgt(fun(x))`` for each object x.
    Chains whose image contains an identity map to zero.
    """
    s, t = fun.source, fun.target
    maps = {}
    for n in range(max_deg + 1):
        sch, soffs, stot = _bar_blocks(e_src, _ones(s), s, n)
        tch, toffs, ttot = _bar_blocks(e_tgt, _ones(t), t, n)
        tidx = {ch: k for k, ch in enumerate(tch)}
        trip = []
        for k, ch in enumerate(sch):
            if n == 0:
                img = (fun.obj_map[ch[0]],)
            else:
                img = tuple(fun.mor_map[m] for m in ch)
                if any(t.is_identity(m) for m in img):
                    continue
            x0 = ch[0] if n == 0 else s.src[ch[0]]
            r0 = toffs[tidx[img]]
            for i, j, v in coeff(x0).items():
                trip.append((r0 + i, soffs[k] + j, v))
        maps[n] = IntMatrix.from_triplets(ttot, stot, trip)
    return maps


_ONES: dict[int, CoeffFunctor] = {}


def _ones(c: FinCat) -> CoeffFunctor:
    key = id(c)
    z = _ONES.get(key)
    if z is None or z.base is not c:
        z = CoeffFunctor.constant(c, "contra", 1)
        _ONES[key] = z
    return z


def _assemble(base: FinCat, complexes: list[ChainComplex], transitions: dict, variance, max_deg, strict, valid):
    terms, diffs = {}, {}
    for n in range(max_deg + 1):
        ranks = [cc.rank(n) for cc in complexes]
        acts = [transitions[f][n] for f in range(base.n_mor)]
        terms[n] = CoeffFunctor(base, variance, ranks, acts, check=False)
        if n > 0:
            diffs[n] = [cc.d(n) for cc in complexes]
    return FunctorComplex(0, max_deg, terms, diffs, valid_through=valid, strict=strict)


def lkan(p: FunctorData, e: CoeffFunctor, max_deg: int, route: str = "comma") -> FunctorComplex:
    """Derived left Kan extension of a covariant E along p, as a complex on the target.

    ``route="comma"``: value at y is the bar complex of ``p/y`` with E pulled
    back; transitions are induced by the comma functors, so the result is a
    strict functor complex.  ``route="fiber"``: p must be a cofibration; the
    value at y is the bar complex of the fiber, transported along chosen
    cocartesian lifts (functorial up to homotopy).
    Homology is exact through ``max_deg``; complexes are built to ``max_deg + 1``.
    """
    if e.base is not p.source or e.variance != "co":
        raise FunctorError("lkan needs covariant coefficients on the source of p")
    tgt = p.target
    top = max_deg + 1
    if route == "comma":
        commas = [comma(p, y) for y in range(tgt.n_obj)]
        pulled = [e.pullback(proj) for _, proj in commas]
        cxs = [bar_complex(pe, _ones(cat), top) for (cat, _), pe in zip(commas, pulled)]
        trans = {}
        for u in range(tgt.n_mor):
            y, y2 = tgt.src[u], tgt.tgt[u]
            (c1, _), (c2, _) = commas[y], commas[y2]
            om = [c2.obj_index((x, tgt.compose(u, v))) for x, v in c1.obj_data]
            mm = [c2.mor_index((m, tgt.compose(u, v))) for m, v in c1.mor_data]
            fun = FunctorData(c1, c2, om, mm, check=False)
            trans[u] = _chain_map_bar(pulled[y], pulled[y2], fun,
                                      lambda x, ee=pulled[y]: IntMatrix.identity(ee.rank(x)), top)
        return _assemble(tgt, cxs, trans, "co", top, strict=True, valid=max_deg)
    if route == "fiber":
        cl = classify(p)
        if not cl.cofibration:
            raise FunctorError("the fiber route needs a cofibration")
        fibs = [fiber(p, y) for y in range(tgt.n_obj)]
        pulled = [e.pullback(inc) for _, inc in fibs]
        cxs = [bar_complex(pe, _ones(cat), top) for (cat, _), pe in zip(fibs, pulled)]
        trans = {}
        for u in range(tgt.n_mor):
            fun, lifts = cocartesian_transport(p, cl.cocartesian, fibs, u)
            y = tgt.src[u]
            inc = fibs[y][1]
            trans[u] = _chain_map_bar(pulled[y], pulled[tgt.tgt[u]], fun,
                                      lambda x, inc=inc, lifts=lifts: e.act(lifts[x]), top)
        return _assemble(tgt, cxs, trans, "co", top, strict=False, valid=max_deg)
    raise ValueError(f"unknown route {route!r}")


def cocartesian_transport(p: FunctorData, cocart: Sequence[bool], fibs, u: int):
    """Functor ``u_!`` between fibers built from chosen cocartesian lifts of u.

    Returns the functor (on fiber categories) and, per fiber object, the chosen
    lift as a morphism of the total category.
    """
    s, tgt = p.source, p.target
    y, y2 = tgt.src[u], tgt.tgt[u]
    (f1, inc1), (f2, inc2) = fibs[y], fibs[y2]
    pos2 = {x: k for k, x in enumerate(inc2.obj_map)}
    mpos2 = {m: k for k, m in enumerate(inc2.mor_map)}
    lifts, om = [], []
    for x in inc1.obj_map:
        cands = [m for m in s.out_of[x] if cocart[m] and p.mor_map[m] == u]
        if not cands:
            raise FunctorError(f"no cocartesian lift of {tgt.mor_names[u]} at {s.objects[x]}")
        lifts.append(cands[0])
        om.append(pos2[s.tgt[cands[0]]])
    idy2 = tgt.identities[y2]
    mm = []
    for m in inc1.mor_map:
        a, bb = inc1.obj_map.index(s.src[m]), inc1.obj_map.index(s.tgt[m])
        la, lb = lifts[a], lifts[bb]
        target = s.compose(lb, m)
        ks = [k for k in s.hom(s.tgt[la], s.tgt[lb]) if p.mor_map[k] == idy2 and s.compose(k, la) == target]
        if len(ks) != 1:
            raise FunctorError("cocartesian factorization is not unique")
        mm.append(mpos2[ks[0]])
    return FunctorData(f1, f2, om, mm, check=False), lifts


def relative_tensor(p: FunctorData, e: CoeffFunctor, t: CoeffFunctor, max_deg: int) -> FunctorComplex:
    """Fiberwise bar complexes ``B(E|_y, T|_y)`` assembled over the base of a cofibration.

    T must invert every cocartesian morphism; a transition along u sends
    ``a (x) b`` on a chain starting at x to ``E(l) a (x) T(l)^{-1} b`` where l is
    the chosen lift at x (applied to the chain's last object).
    """
    if e.base is not p.source or t.base is not p.source:
        raise FunctorError("coefficients must live on the total category")
    cl = classify(p)
    if not cl.cofibration:
        raise FunctorError("relative tensor needs a cofibration")
    bad = t.inverts(cl.cocartesian)
    if bad:
        raise FunctorError(f"T does not invert cocartesian morphism {p.source.mor_names[bad[0]]}")
    s, tgt = p.source, p.target
    top = max_deg + 1
    fibs = [fiber(p, y) for y in range(tgt.n_obj)]
    es = [e.pullback(inc) for _, inc in fibs]
    ts = [t.pullback(inc) for _, inc in fibs]
    cxs = [bar_complex(a, b, top) for a, b in zip(es, ts)]
    inv_cache: dict[int, IntMatrix] = {}

    def tinv(m):
        if m not in inv_cache:
            inv_cache[m] = left_inverse(t.act(m))
        return inv_cache[m]

    trans = {}
    for u in range(tgt.n_mor):
        fun, lifts = cocartesian_transport(p, cl.cocartesian, fibs, u)
        y, y2 = tgt.src[u], tgt.tgt[u]
        f1, f2 = fibs[y][0], fibs[y2][0]
        maps = {}
        for n in range(top + 1):
            sch, soffs, stot = _bar_blocks(es[y], ts[y], f1, n)
            tch, toffs, ttot = _bar_blocks(es[y2], ts[y2], f2, n)
            tidx = {ch: k for k, ch in enumerate(tch)}
            trip = []
            for k, ch in enumerate(sch):
                if n == 0:
                    img = (fun.obj_map[ch[0]],)
                    x0 = xn = ch[0]
                else:
                    img = tuple(fun.mor_map[m] for m in ch)
                    if any(f2.is_identity(m) for m in img):
                        continue
                    x0, xn = f1.src[ch[0]], f1.tgt[ch[-1]]
                # T(l_xn): T(u_! xn) -> T(xn) is invertible; use its inverse
                blk = IntMatrix.kron(e.act(lifts[x0]), tinv(lifts[xn]))
                r0 = toffs[tidx[img]]
                for i, j, v in blk.items():
                    trip.append((r0 + i, soffs[k] + j, v))
            maps[n] = IntMatrix.from_triplets(ttot, stot, trip)
        trans[u] = maps
    return _assemble(tgt, cxs, trans, "co", top, strict=False, valid=max_deg)


# ---------------------------------------------------------------------------
# internal Hom into an abelian group


def hom_coeff(t: CoeffFunctor, m: FgAbGroup):
    """Covariant ``c -> Hom(T(c), M)`` for a contravariant, pointwise free T.

    Free M gives a CoeffFunctor; torsion M gives the two-term complex
    ``Hom(T, Z^a) -> Hom(T, Z^b)`` presenting it (Hom out of a free module is exact).
    The action of f is ``T(f)^t (x) I``.
    """
    if t.variance != "contra":
        raise FunctorError("hom_coeff needs a contravariant T")
    b = t.base
    k = m.free_rank + len(m.torsion)

    def term(width):
        ident = IntMatrix.identity(width)
        return CoeffFunctor(
            b, "co", [r * width for r in t.ranks], [IntMatrix.kron(a.T, ident) for a in t.actions], t.ring,
            check=False,
        )

    if not m.torsion:
        return term(k)
    ntor = len(m.torsion)
    # relations: Z^ntor -> Z^k, e_i -> d_i e_{free + i}
    pres = IntMatrix.from_triplets(k, ntor, [(m.free_rank + i, i, d) for i, d in enumerate(m.torsion)])
    d1 = [IntMatrix.kron(IntMatrix.identity(r), pres) for r in t.ranks]
    return FunctorComplex(0, 1, {0: term(k), 1: term(ntor)}, {1: d1})


def hom_group_mod(rel: IntMatrix, n: int) -> FgAbGroup:
    """``{x in (Z/n)^k : rel^t x = 0}`` for ``n > 0``, or ``{x in Z^k : rel^t x = 0}`` for ``n = 0``.

    This is ``Hom(coker rel, Z/n)``; rows of rel index the generators.
    """
    return kernel_mod(rel.T, n)


def kernel_mod(a: IntMatrix, n: int) -> FgAbGroup:
    """The group ``{x : a x = 0}`` over ``Z/n`` (``n = 0`` means over Z)."""
    facs = invariant_factors(a)
    free_cols = a.cols - len(facs)
    if n == 0:
        return FgAbGroup(free_cols)
    orders = [_gcd(s, n) for s in facs] + [n] * free_cols
    return FgAbGroup.from_cyclic(0, [o for o in orders if o > 1])


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


def naturality_constraints(e: CoeffFunctor, h: CoeffFunctor) -> IntMatrix:
    """Linear conditions ``H(f) phi_x = phi_y E(f)`` on families ``phi_c: E(c) -> H(c)``.

    Unknowns are the entries of every ``phi_c`` (row-major, objects in order);
    one block of rows per non-identity morphism.
    """
    if e.base is not h.base or e.variance != "co" or h.variance != "co":
        raise FunctorError("need two covariant functors on one base")
    b = e.base
    offs, tot = [], 0
    for c in range(b.n_obj):
        offs.append(tot)
        tot += h.rank(c) * e.rank(c)
    trip = []
    row = 0
    for f in b.non_identity():
        x, y = b.src[f], b.tgt[f]
        hf, ef = h.act(f), e.act(f)
        rex, rey = e.rank(x), e.rank(y)
        # entry (i, j) of H(f) phi_x - phi_y E(f), an rank H(y) x rank E(x) matrix
        for i, k, v in hf.items():  # H(f)[i, k] * phi_x[k, j]
            for j in range(rex):
                trip.append((row + i * rex + j, offs[x] + k * rex + j, v))
        for k, j, v in ef.items():  # phi_y[i, k] * E(f)[k, j]
            for i in range(h.rank(y)):
                trip.append((row + i * rex + j, offs[y] + i * rey + k, -v))
        row += h.rank(y) * rex
    return IntMatrix.from_triplets(row, tot, trip)


def nat_group(e: CoeffFunctor, h: CoeffFunctor, n: int) -> FgAbGroup:
    """``Nat(E, H (x) Z/n)`` for pointwise free H (``n = 0``: plain ``Nat(E, H)``)."""
    return kernel_mod(naturality_constraints(e, h), n)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True)
