"""Finite categories, functors between them, slices and the Grothendieck construction.

Objects and morphisms are identified by index; names and attached data are
metadata only.  Composition is a table ``(g, f) -> g o f`` filled for every
composable pair (``tgt f == src g``).
"""

from __future__ import annotations

import itertools
import json
from array import array
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

DENSE_COMPOSITION_LIMIT = 10_000


class CategoryError(ValueError):
    """A category, functor or family failed one of its axioms."""


class FinCat:
    def __init__(
        self,
        objects: Sequence[str],
        mor_names: Sequence[str],
        src: Sequence[int],
        tgt: Sequence[int],
        identities: Sequence[int],
        composition: Iterable[tuple[int, int, int]],
        obj_data: Sequence[Hashable] | None = None,
        mor_data: Sequence[Hashable] | None = None,
        validate: bool = True,
    ):
        self.objects = list(objects)
        self.mor_names = list(mor_names)
        self.src = list(src)
        self.tgt = list(tgt)
        self.identities = list(identities)
        self.obj_data = list(obj_data) if obj_data is not None else list(self.objects)
        self.mor_data = list(mor_data) if mor_data is not None else list(self.mor_names)
        n_obj, n_mor = len(self.objects), len(self.mor_names)
        if len(self.src) != n_mor or len(self.tgt) != n_mor:
            raise CategoryError("src/tgt length does not match morphism count")
        if len(self.identities) != n_obj:
            raise CategoryError("need exactly one identity per object")
        self._dense = n_mor <= DENSE_COMPOSITION_LIMIT
        if self._dense:
            self._table = array("i", [-1]) * (n_mor * n_mor)
        else:
            self._table = {}
        n = n_mor
        for g, f, gf in composition:
            if not (0 <= g < n and 0 <= f < n and 0 <= gf < n):
                raise CategoryError(f"composition entry ({g}, {f}, {gf}) refers to unknown morphism")
            if self._dense:
                self._table[g * n + f] = gf
            else:
                self._table[(g, f)] = gf
        self.out_of: list[list[int]] = [[] for _ in range(n_obj)]
        self.into: list[list[int]] = [[] for _ in range(n_obj)]
        self._hom: dict[tuple[int, int], list[int]] = {}
        for m in range(n_mor):
            self.out_of[self.src[m]].append(m)
            self.into[self.tgt[m]].append(m)
            self._hom.setdefault((self.src[m], self.tgt[m]), []).append(m)
        self._is_id = [False] * n_mor
        for i in self.identities:
            if 0 <= i < n_mor:
                self._is_id[i] = True
        self._mor_index = None
        self._obj_index = None
        self._chains: dict[int, list[tuple[int, ...]]] = {}
        if validate:
            self.validate()

    # basic queries ------------------------------------------------------
    @property
    def n_obj(self) -> int:
        return len(self.objects)

    @property
    def n_mor(self) -> int:
        return len(self.mor_names)

    def hom(self, a: int, b: int) -> list[int]:
        return self._hom.get((a, b), [])

    def is_identity(self, m: int) -> bool:
        return self._is_id[m]

    def identity(self, a: int) -> int:
        return self.identities[a]

    def compose(self, g: int, f: int) -> int:
        """``g o f``; raises if the pair is not composable."""
        if self._dense:
            gf = self._table[g * self.n_mor + f]
        else:
            gf = self._table.get((g, f), -1)
        if gf < 0:
            raise CategoryError(f"{self.mor_names[g]} o {self.mor_names[f]} is not defined")
        return gf

    def compose_path(self, path: Sequence[int]) -> int:
        """Compose ``f_1, ..., f_n`` (first map first)."""
        m = path[0]
        for f in path[1:]:
            m = self.compose(f, m)
        return m

    def obj_index(self, data: Hashable) -> int:
        if self._obj_index is None:
            self._obj_index = {d: i for i, d in enumerate(self.obj_data)}
        return self._obj_index[data]

    def mor_index(self, data: Hashable) -> int:
        if self._mor_index is None:
            self._mor_index = {d: i for i, d in enumerate(self.mor_data)}
        return self._mor_index[data]

    def non_identity(self) -> list[int]:
        return [m for m in range(self.n_mor) if not self._is_id[m]]

    def composable_pairs(self) -> Iterable[tuple[int, int]]:
        for b in range(self.n_obj):
            for f in self.into[b]:
                for g in self.out_of[b]:
                    yield g, f

    def chains(self, n: int) -> list[tuple[int, ...]]:
        """Identity-free composable chains ``(f_1, ..., f_n)``, lexicographic by index.

        Degree 0 returns one length-1 tuple ``(obj,)`` per object.
        """
        if n in self._chains:
            return self._chains[n]
        if n == 0:
            out = [(a,) for a in range(self.n_obj)]
        elif n == 1:
            out = [(m,) for m in self.non_identity()]
        else:
            nonid_out = [[m for m in self.out_of[a] if not self._is_id[m]] for a in range(self.n_obj)]
            out = []
            for ch in self.chains(n - 1):
                for m in nonid_out[self.tgt[ch[-1]]]:
                    out.append(ch + (m,))
        self._chains[n] = out
        return out

    def chain_ends(self, n: int, ch: tuple[int, ...]) -> tuple[int, int]:
        if n == 0:
            return ch[0], ch[0]
        return self.src[ch[0]], self.tgt[ch[-1]]

    def is_iso(self, m: int) -> bool:
        return self.inverse(m) is not None

    def inverse(self, m: int) -> int | None:
        a, b = self.src[m], self.tgt[m]
        for k in self.hom(b, a):
            if self.compose(k, m) == self.identities[a] and self.compose(m, k) == self.identities[b]:
                return k
        return None

    # validation ---------------------------------------------------------
    def validate(self) -> None:
        """Raise CategoryError naming the first failing axiom instance."""
        n_obj = self.n_obj
        for m in range(self.n_mor):
            if not (0 <= self.src[m] < n_obj and 0 <= self.tgt[m] < n_obj):
                raise CategoryError(f"morphism {self.mor_names[m]} has unknown endpoint")
        for a, i in enumerate(self.identities):
            if not 0 <= i < self.n_mor:
                raise CategoryError(f"identity of {self.objects[a]} is not a morphism")
            if self.src[i] != a or self.tgt[i] != a:
                raise CategoryError(f"identity of {self.objects[a]} is not an endomorphism of it")
        # table entries only on composable pairs
        n = self.n_mor
        if self._table is None:
            entries = ()
        elif self._dense:
            entries = ((k // n, k % n, v) for k, v in enumerate(self._table) if v >= 0)
        else:
            entries = ((g, f, v) for (g, f), v in self._table.items())
        for g, f, gf in entries:
            if self.tgt[f] != self.src[g]:
                raise CategoryError(f"composition {self.mor_names[g]} o {self.mor_names[f]} given for a non-composable pair")
        for g, f in self.composable_pairs():
            try:
                gf = self.compose(g, f)
            except CategoryError:
                raise CategoryError(f"closure: {self.mor_names[g]} o {self.mor_names[f]} missing") from None
            if self.src[gf] != self.src[f] or self.tgt[gf] != self.tgt[g]:
                raise CategoryError(
                    f"closure: {self.mor_names[g]} o {self.mor_names[f]} = {self.mor_names[gf]} has wrong endpoints"
                )
        for m in range(self.n_mor):
            if self.compose(m, self.identities[self.src[m]]) != m:
                raise CategoryError(f"right unit law fails at {self.mor_names[m]}")
            if self.compose(self.identities[self.tgt[m]], m) != m:
                raise CategoryError(f"left unit law fails at {self.mor_names[m]}")
        for b in range(n_obj):
            for f in self.into[b]:
                for g in self.out_of[b]:
                    gf = self.compose(g, f)
                    for h in self.out_of[self.tgt[g]]:
                        if self.compose(h, gf) != self.compose(self.compose(h, g), f):
                            raise CategoryError(
                                "associativity fails at "
                                f"({self.mor_names[h]}, {self.mor_names[g]}, {self.mor_names[f]})"
                            )

    # construction -------------------------------------------------------
    @classmethod
    def from_compose(
        cls,
        objects: Sequence[Hashable],
        morphisms: Sequence[tuple[Hashable, Hashable, Hashable]],
        identity: Callable[[Hashable], Hashable],
        compose: Callable[[Hashable, Hashable], Hashable],
        name: Callable[[Hashable], str] = str,
        validate: bool = True,
    ) -> "FinCat":
        """Build a category from keyed data.

        ``morphisms`` is a list of ``(key, src_key, tgt_key)``; ``compose(g, f)``
        must return the key of ``g o f``.
        """
        obj_index = {o: i for i, o in enumerate(objects)}
        if len(obj_index) != len(objects):
            raise CategoryError("duplicate object keys")
        mor_index = {}
        src, tgt = [], []
        for k, (m, s, t) in enumerate(morphisms):
            if m in mor_index:
                raise CategoryError(f"duplicate morphism key {m!r}")
            mor_index[m] = k
            src.append(obj_index[s])
            tgt.append(obj_index[t])
        mkeys = [m for m, _, _ in morphisms]
        try:
            idents = [mor_index[identity(o)] for o in objects]
        except KeyError as e:
            raise CategoryError(f"identity {e} is not among the morphisms") from None
        out_of = [[] for _ in objects]
        into = [[] for _ in objects]
        for k in range(len(mkeys)):
            out_of[src[k]].append(k)
            into[tgt[k]].append(k)
        table = []
        for b in range(len(objects)):
            for f in into[b]:
                fk = mkeys[f]
                for g in out_of[b]:
                    key = compose(mkeys[g], fk)
                    try:
                        table.append((g, f, mor_index[key]))
                    except KeyError:
                        raise CategoryError(f"closure: composite {key!r} is not a listed morphism") from None
        return cls(
            [name(o) for o in objects],
            [name(m) for m in mkeys],
            src,
            tgt,
            idents,
            table,
            obj_data=list(objects),
            mor_data=mkeys,
            validate=validate,
        )

    def composition_triples(self) -> list[tuple[int, int, int]]:
        return [(g, f, self.compose(g, f)) for g, f in self.composable_pairs()]

    def to_json(self) -> dict:
        return {
            "objects": list(self.objects),
            "morphisms": [
                {"name": self.mor_names[m], "src": self.objects[self.src[m]], "tgt": self.objects[self.tgt[m]]}
                for m in range(self.n_mor)
            ],
            "identities": [self.mor_names[i] for i in self.identities],
            "composition": [
                [self.mor_names[g], self.mor_names[f], self.mor_names[gf]] for g, f, gf in self.composition_triples()
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FinCat":
        objects = list(obj["objects"])
        oidx = {o: i for i, o in enumerate(objects)}
        if len(oidx) != len(objects):
            raise CategoryError("duplicate object names")
        mors = obj["morphisms"]
        names = [m["name"] for m in mors]
        midx = {m: i for i, m in enumerate(names)}
        if len(midx) != len(names):
            raise CategoryError("duplicate morphism names")
        try:
            src = [oidx[m["src"]] for m in mors]
            tgt = [oidx[m["tgt"]] for m in mors]
            ids = [midx[i] for i in obj["identities"]]
            comp = [(midx[g], midx[f], midx[gf]) for g, f, gf in obj["composition"]]
        except KeyError as e:
            raise CategoryError(f"unknown name {e}") from None
        return cls(objects, names, src, tgt, ids, comp)

    @classmethod
    def load(cls, path) -> "FinCat":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def __repr__(self):
        return f"FinCat<{self.n_obj} objects, {self.n_mor} morphisms>"


# ---------------------------------------------------------------------------
# standard small categories


class LazyCat(FinCat):
    """A category given by keyed data whose composites are computed on demand.

    Same inputs as ``FinCat.from_compose``; ``compose`` results are cached.
    Used for total categories whose full table would dominate the run time.
    """

    def __init__(self, objects, morphisms, identity, compose, name=str):
        obj_index = {o: i for i, o in enumerate(objects)}
        if len(obj_index) != len(objects):
            raise CategoryError("duplicate object keys")
        keys = [m for m, _, _ in morphisms]
        pos = {k: i for i, k in enumerate(keys)}
        if len(pos) != len(keys):
            raise CategoryError("duplicate morphism keys")
        try:
            idents = [pos[identity(o)] for o in objects]
        except KeyError as e:
            raise CategoryError(f"identity {e} is not among the morphisms") from None
        super().__init__(
            [name(o) for o in objects],
            [name(k) for k in keys],
            [obj_index[s] for _, s, _ in morphisms],
            [obj_index[t] for _, _, t in morphisms],
            idents,
            (),
            obj_data=list(objects),
            mor_data=keys,
            validate=False,
        )
        self._table = None
        self._obj_index = obj_index
        self._mor_index = pos
        self._compose_key = compose
        self._cache: dict[tuple[int, int], int] = {}

    def compose(self, g: int, f: int) -> int:
        gf = self._cache.get((g, f))
        if gf is None:
            if self.tgt[f] != self.src[g]:
                raise CategoryError(f"{self.mor_names[g]} o {self.mor_names[f]} is not defined")
            key = self._compose_key(self.mor_data[g], self.mor_data[f])
            try:
                gf = self._mor_index[key]
            except KeyError:
                raise CategoryError(f"closure: composite {key!r} is not a listed morphism") from None
            self._cache[(g, f)] = gf
        return gf


def point() -> FinCat:
    return FinCat(["*"], ["id"], [0], [0], [0], [(0, 0, 0)])


def discrete(n: int) -> FinCat:
    return FinCat([f"x{i}" for i in range(n)], [f"id{i}" for i in range(n)], range(n), range(n), range(n),
                  [(i, i, i) for i in range(n)])


def poset(n: int, relations: Iterable[tuple[int, int]]) -> FinCat:
    """Category of the preorder generated by ``relations`` (pairs i <= j) on n elements."""
    le = {(i, i) for i in range(n)} | set(relations)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(list(le), list(le)):
            if b == c and (a, d) not in le:
                le.add((a, d))
                changed = True
    mors = sorted(le)
    return FinCat.from_compose(
        list(range(n)),
        [((a, b), a, b) for a, b in mors],
        identity=lambda a: (a, a),
        compose=lambda g, f: (f[0], g[1]),
        name=lambda k: f"{k[0]}<={k[1]}" if isinstance(k, tuple) else f"p{k}",
    )


def arrow() -> FinCat:
    """The category a -> b."""
    return FinCat(["a", "b"], ["id_a", "id_b", "f"], [0, 1, 0], [0, 1, 1], [0, 1],
                  [(0, 0, 0), (1, 1, 1), (2, 0, 2), (1, 2, 2)])


def group_category(order: int, mult: Callable[[int, int], int], name: str = "g") -> FinCat:
    """One-object category of a group on ``range(order)`` with unit 0."""
    return FinCat.from_compose(
        ["*"],
        [(g, "*", "*") for g in range(order)],
        identity=lambda _: 0,
        compose=mult,
        name=lambda k: k if isinstance(k, str) else (f"{name}{k}" if k else "e"),
    )


def cyclic_group(n: int) -> FinCat:
    return group_category(n, lambda a, b: (a + b) % n)


def monoid_category(elements: Sequence[Hashable], unit: Hashable, mult) -> FinCat:
    return FinCat.from_compose(["*"], [(e, "*", "*") for e in elements], identity=lambda _: unit,
                               compose=mult, name=str)


def product(a: FinCat, b: FinCat) -> FinCat:
    objs = [(x, y) for x in range(a.n_obj) for y in range(b.n_obj)]
    mors = [((f, g), (a.src[f], b.src[g]), (a.tgt[f], b.tgt[g])) for f in range(a.n_mor) for g in range(b.n_mor)]
    return FinCat.from_compose(
        objs,
        mors,
        identity=lambda o: (a.identities[o[0]], b.identities[o[1]]),
        compose=lambda g, f: (a.compose(g[0], f[0]), b.compose(g[1], f[1])),
        name=lambda k: f"({_nm(a, b, k)})",
    )


def _nm(a, b, k):
    x, y = k
    if isinstance(x, int) and isinstance(y, int) and x < a.n_mor and y < b.n_mor:
        return f"{a.mor_names[x]},{b.mor_names[y]}"
    return f"{x},{y}"


def opposite(c: FinCat) -> FinCat:
    """Same objects and morphism indices with source and target swapped."""
    return FinCat(
        c.objects,
        c.mor_names,
        c.tgt,
        c.src,
        c.identities,
        [(f, g, gf) for g, f, gf in c.composition_triples()],
        obj_data=c.obj_data,
        mor_data=c.mor_data,
        validate=False,
    )


def full_subcategory(c: FinCat, objs: Sequence[int]) -> tuple[FinCat, "FunctorData"]:
    keep = set(objs)
    mors = [m for m in range(c.n_mor) if c.src[m] in keep and c.tgt[m] in keep]
    return subcategory(c, objs, mors)


def subcategory(c: FinCat, objs: Sequence[int], mors: Sequence[int]) -> tuple[FinCat, "FunctorData"]:
    """Subcategory on given objects and morphisms (must be closed), with its inclusion."""
    opos = {o: k for k, o in enumerate(objs)}
    mpos = {m: k for k, m in enumerate(mors)}
    table = []
    into: dict[int, list[int]] = {}
    out_of: dict[int, list[int]] = {}
    for m in mors:
        into.setdefault(c.tgt[m], []).append(m)
        out_of.setdefault(c.src[m], []).append(m)
    for b, fs in into.items():
        for f in fs:
            for g in out_of.get(b, []):
                gf = c.compose(g, f)
                if gf not in mpos:
                    raise CategoryError("subcategory is not closed under composition")
                table.append((mpos[g], mpos[f], mpos[gf]))
    try:
        ids = [mpos[c.identities[o]] for o in objs]
    except KeyError:
        raise CategoryError("subcategory misses an identity") from None
    sub = FinCat(
        [c.objects[o] for o in objs],
        [c.mor_names[m] for m in mors],
        [opos[c.src[m]] for m in mors],
        [opos[c.tgt[m]] for m in mors],
        ids,
        table,
        obj_data=[c.obj_data[o] for o in objs],
        mor_data=[c.mor_data[m] for m in mors],
        validate=False,
    )
    return sub, FunctorData(sub, c, list(objs), list(mors), check=False)


# ---------------------------------------------------------------------------
# functors


class FunctorData:
    """A functor given by object and morphism maps."""

    def __init__(self, source: FinCat, target: FinCat, obj_map: Sequence[int], mor_map: Sequence[int], check=True):
        self.source = source
        self.target = target
        self.obj_map = list(obj_map)
        self.mor_map = list(mor_map)
        if check:
            self.validate()

    def validate(self) -> None:
        s, t = self.source, self.target
        if len(self.obj_map) != s.n_obj or len(self.mor_map) != s.n_mor:
            raise CategoryError("functor maps have the wrong length")
        for m in range(s.n_mor):
            fm = self.mor_map[m]
            if t.src[fm] != self.obj_map[s.src[m]] or t.tgt[fm] != self.obj_map[s.tgt[m]]:
                raise CategoryError(f"functor does not preserve endpoints of {s.mor_names[m]}")
        for a in range(s.n_obj):
            if self.mor_map[s.identities[a]] != t.identities[self.obj_map[a]]:
                raise CategoryError(f"functor does not preserve the identity of {s.objects[a]}")
        for g, f, gf in s.composition_triples():
            if t.compose(self.mor_map[g], self.mor_map[f]) != self.mor_map[gf]:
                raise CategoryError(f"functor does not preserve {s.mor_names[g]} o {s.mor_names[f]}")

    def __call__(self, m: int) -> int:
        return self.mor_map[m]

    def on_obj(self, a: int) -> int:
        return self.obj_map[a]

    def then(self, other: "FunctorData") -> "FunctorData":
        """``other o self``."""
        if other.source is not self.target:
            raise CategoryError("functors are not composable")
        return FunctorData(
            self.source,
            other.target,
            [other.obj_map[x] for x in self.obj_map],
            [other.mor_map[x] for x in self.mor_map],
            check=False,
        )

    def opposite(self, src_op: FinCat | None = None, tgt_op: FinCat | None = None) -> "FunctorData":
        return FunctorData(src_op or opposite(self.source), tgt_op or opposite(self.target), self.obj_map,
                           self.mor_map, check=False)

    def __eq__(self, other):
        return (isinstance(other, FunctorData) and self.obj_map == other.obj_map
                and self.mor_map == other.mor_map)

    @classmethod
    def identity(cls, c: FinCat) -> "FunctorData":
        return cls(c, c, range(c.n_obj), range(c.n_mor), check=False)


def is_equivalence(f: FunctorData) -> bool:
    """Fully faithful and essentially surjective, checked by enumeration."""
    s, t = f.source, f.target
    for a in range(s.n_obj):
        for b in range(s.n_obj):
            img = sorted(f.mor_map[m] for m in s.hom(a, b))
            if img != sorted(t.hom(f.obj_map[a], f.obj_map[b])):
                return False
    hit = set(f.obj_map)
    for y in range(t.n_obj):
        if y in hit:
            continue
        if not any(t.is_iso(m) for x in hit for m in t.hom(x, y)):
            return False
    return True


# ---------------------------------------------------------------------------
# slices, comma categories and fibers


def slice(c: FinCat, x: int) -> tuple[FinCat, FunctorData]:
    """``C/x`` with its forgetful functor to C."""
    objs = list(c.into[x])
    mors = []
    for f in objs:
        for g in c.into[c.src[f]]:
            mors.append(((g, f), c.compose(f, g), f))
    cat = FinCat.from_compose(
        objs,
        mors,
        identity=lambda f: (c.identities[c.src[f]], f),
        compose=lambda h, g: (c.compose(h[0], g[0]), h[1]),
        name=lambda k: _slice_name(c, k),
    )
    fg = FunctorData(cat, c, [c.src[f] for f in objs], [k[0] for k in cat.mor_data], check=False)
    return cat, fg


def coslice(c: FinCat, x: int) -> tuple[FinCat, FunctorData]:
    """``x\\C`` with the forgetful functor to C (the target projection)."""
    objs = list(c.out_of[x])
    mors = []
    for f in objs:
        for g in c.out_of[c.tgt[f]]:
            mors.append(((g, f), f, c.compose(g, f)))
    cat = FinCat.from_compose(
        objs,
        mors,
        identity=lambda f: (c.identities[c.tgt[f]], f),
        compose=lambda h, g: (c.compose(h[0], g[0]), g[1]),
        name=lambda k: _slice_name(c, k),
    )
    fg = FunctorData(cat, c, [c.tgt[f] for f in objs], [k[0] for k in cat.mor_data], check=False)
    return cat, fg


def _slice_name(c, k):
    if isinstance(k, tuple):
        return f"{c.mor_names[k[0]]}|{c.mor_names[k[1]]}"
    return c.mor_names[k]


def comma(p: FunctorData, y: int) -> tuple[FinCat, FunctorData]:
    """``p / y``: objects ``(x, u: p(x) -> y)``, with the projection to the source of p."""
    s, t = p.source, p.target
    objs = [(x, u) for x in range(s.n_obj) for u in t.hom(p.obj_map[x], y)]
    mors = []
    for x, u in objs:
        for m in s.into[x]:
            mors.append(((m, u), (s.src[m], t.compose(u, p.mor_map[m])), (x, u)))
    cat = FinCat.from_compose(
        objs,
        mors,
        identity=lambda o: (s.identities[o[0]], o[1]),
        compose=lambda g, f: (s.compose(g[0], f[0]), g[1]),
        name=lambda k: f"{k[0]}|{k[1]}",
    )
    proj = FunctorData(cat, s, [o[0] for o in objs], [k[0] for k in cat.mor_data], check=False)
    return cat, proj


def fiber(p: FunctorData, y: int) -> tuple[FinCat, FunctorData]:
    """Subcategory of objects over y and morphisms over ``id_y``, with its inclusion."""
    s = p.source
    objs = [x for x in range(s.n_obj) if p.obj_map[x] == y]
    idy = p.target.identities[y]
    keep = set(objs)
    mors = [m for m in range(s.n_mor) if s.src[m] in keep and p.mor_map[m] == idy]
    return subcategory(s, objs, mors)


# ---------------------------------------------------------------------------
# (co)cartesian morphisms and classification


def cartesian_morphisms(p: FunctorData) -> list[bool]:
    """Mark each morphism of the source cartesian by exhaustive unique factorization."""
    s, t = p.source, p.target
    out = []
    for phi in range(s.n_mor):
        y, x = s.src[phi], s.tgt[phi]
        f = p.mor_map[phi]
        ok = True
        for z in range(s.n_obj):
            into_x = s.hom(z, x)
            if not into_x:
                continue
            # (composite, base map) -> number of factorizations
            counts: dict[tuple[int, int], int] = {}
            for chi in s.hom(z, y):
                key = (s.compose(phi, chi), p.mor_map[chi])
                counts[key] = counts.get(key, 0) + 1
            pz, py = p.obj_map[z], p.obj_map[y]
            base = [(g, t.compose(f, g)) for g in t.hom(pz, py)]
            for psi in into_x:
                ppsi = p.mor_map[psi]
                if any(fg == ppsi and counts.get((psi, g), 0) != 1 for g, fg in base):
                    ok = False
                    break
            if not ok:
                break
        out.append(ok)
    return out


@dataclass
class Classification:
    fibration: bool
    cofibration: bool
    discrete_fibration: bool
    discrete_cofibration: bool
    cartesian: list[bool] = field(repr=False)
    cocartesian: list[bool] = field(repr=False)
    cartesian_closed: bool = True
    cocartesian_closed: bool = True

    @property
    def discrete(self) -> bool:
        return self.discrete_fibration


def _has_lifts(p: FunctorData, marked: list[bool]) -> bool:
    """Every base map into p(x) has a marked lift with target x."""
    s, t = p.source, p.target
    for x in range(s.n_obj):
        lifted = {p.mor_map[m] for m in s.into[x] if marked[m]}
        if any(f not in lifted for f in t.into[p.obj_map[x]]):
            return False
    return True


def _unique_lifts(p: FunctorData) -> bool:
    s, t = p.source, p.target
    for x in range(s.n_obj):
        seen: dict[int, int] = {}
        for m in s.into[x]:
            seen[p.mor_map[m]] = seen.get(p.mor_map[m], 0) + 1
        for f in t.into[p.obj_map[x]]:
            if seen.get(f, 0) != 1:
                return False
    return True


def _closed(c: FinCat, marked: list[bool]) -> bool:
    return all(marked[c.compose(g, f)] for g, f in c.composable_pairs() if marked[g] and marked[f])


def classify(p: FunctorData) -> Classification:
    cart = cartesian_morphisms(p)
    pop = p.opposite()
    cocart = cartesian_morphisms(pop)
    cc = _closed(p.source, cart)
    coc = _closed(p.source, cocart)
    return Classification(
        fibration=_has_lifts(p, cart) and cc,
        cofibration=_has_lifts(pop, cocart) and coc,
        discrete_fibration=_unique_lifts(p),
        discrete_cofibration=_unique_lifts(pop),
        cartesian=cart,
        cocartesian=cocart,
        cartesian_closed=cc,
        cocartesian_closed=coc,
    )


# ---------------------------------------------------------------------------
# Cat-valued functors and the Grothendieck construction


class CatValuedFunctor:
    """A family of finite categories indexed by a base category.

    For ``variance="co"`` the transition of ``f: c -> c'`` is a functor
    ``F(c) -> F(c')``; for ``"contra"`` it is ``F(c') -> F(c)``.  Strict by
    default.  A pseudofunctor supplies ``compat[(g, f)]``, a list indexed by
    objects x giving the comparison morphism needed to compose in the total
    category: ``F(gf)x -> F(g)F(f)x`` (co) or ``F(f)F(g)x -> F(gf)x`` (contra).
    """

    def __init__(
        self,
        base: FinCat,
        fibers: Sequence[FinCat],
        transitions: Sequence[FunctorData],
        variance: str = "co",
        compat: dict[tuple[int, int], list[int]] | None = None,
        check: bool = True,
    ):
        if variance not in ("co", "contra"):
            raise CategoryError(f"variance must be 'co' or 'contra', not {variance!r}")
        self.base = base
        self.fibers = list(fibers)
        self.transitions = list(transitions)
        self.variance = variance
        self.compat = compat or {}
        if check:
            self.validate()

    def validate(self) -> None:
        b = self.base
        if len(self.fibers) != b.n_obj or len(self.transitions) != b.n_mor:
            raise CategoryError("family data does not match the base")
        for f in range(b.n_mor):
            tr = self.transitions[f]
            s, t = (b.src[f], b.tgt[f]) if self.variance == "co" else (b.tgt[f], b.src[f])
            if tr.source is not self.fibers[s] or tr.target is not self.fibers[t]:
                raise CategoryError(f"transition of {b.mor_names[f]} has the wrong fibers")
            tr.validate()
        for a in range(b.n_obj):
            if self.transitions[b.identities[a]] != FunctorData.identity(self.fibers[a]):
                raise CategoryError(f"transition of the identity at {b.objects[a]} is not the identity")
        if self.compat:
            return  # coherence is checked when the total category is built
        for g, f, gf in b.composition_triples():
            tf, tg = self.transitions[f], self.transitions[g]
            comp = tf.then(tg) if self.variance == "co" else tg.then(tf)
            if comp != self.transitions[gf]:
                raise CategoryError(
                    f"transitions do not compose strictly at {b.mor_names[g]} o {b.mor_names[f]}"
                )

    @classmethod
    def constant(cls, base: FinCat, d: FinCat, variance="co") -> "CatValuedFunctor":
        ident = FunctorData.identity(d)
        return cls(base, [d] * base.n_obj, [ident] * base.n_mor, variance)


def grothendieck_total(fam: CatValuedFunctor, variance: str | None = None) -> tuple[FinCat, FunctorData]:
    """Total category of pairs ``(c, x)`` with its projection to the base."""
    variance = variance or fam.variance
    if variance != fam.variance:
        raise CategoryError("requested variance does not match the family")
    b, F = fam.base, fam.fibers
    tr = fam.transitions
    objs = [(c, x) for c in range(b.n_obj) for x in range(F[c].n_obj)]
    mors = []
    if variance == "co":
        # (f, x, phi) with phi: F(f)x -> y in F(tgt f)
        for f in range(b.n_mor):
            c, c2 = b.src[f], b.tgt[f]
            for x in range(F[c].n_obj):
                fx = tr[f].obj_map[x]
                for phi in F[c2].out_of[fx]:
                    mors.append(((f, x, phi), (c, x), (c2, F[c2].tgt[phi])))

        def compose(g, f):
            gm, y, psi = g
            fm, x, phi = f
            c3 = b.tgt[gm]
            gf = b.compose(gm, fm)
            m = F[c3].compose(psi, tr[gm].mor_map[phi])
            mu = fam.compat.get((gm, fm))
            if mu is not None:
                m = F[c3].compose(m, mu[x])
            return (gf, x, m)
    else:
        # (f, x, phi) with phi: x -> F(f)x' in F(src f)
        for f in range(b.n_mor):
            c, c2 = b.src[f], b.tgt[f]
            for x2 in range(F[c2].n_obj):
                fx2 = tr[f].obj_map[x2]
                for phi in F[c].into[fx2]:
                    mors.append(((f, x2, phi), (c, F[c].src[phi]), (c2, x2)))

        def compose(g, f):
            gm, x3, psi = g
            fm, x2, phi = f
            c1 = b.src[fm]
            gf = b.compose(gm, fm)
            m = F[c1].compose(tr[fm].mor_map[psi], phi)
            mu = fam.compat.get((gm, fm))
            if mu is not None:
                m = F[c1].compose(mu[x3], m)
            return (gf, x3, m)

    def ident(o):
        c, x = o
        return (b.identities[c], x, F[c].identities[x])

    def name(k):
        if len(k) == 2:
            return f"{b.objects[k[0]]}:{F[k[0]].objects[k[1]]}"
        return f"{b.mor_names[k[0]]}:{k[1]}:{k[2]}"

    try:
        total = FinCat.from_compose(objs, mors, ident, compose, name=name)
    except CategoryError as e:
        raise CategoryError(f"inconsistent transition data: {e}") from None
    proj = FunctorData(total, b, [o[0] for o in objs], [k[0] for k in total.mor_data], check=False)
    return total, proj


def gr_of_fibration(p: FunctorData) -> tuple[CatValuedFunctor, list[FunctorData]]:
    """Contravariant family of cartesian sections, with evaluation equivalences.

    ``Gr(p)(c)`` is the category of cartesian functors ``C/c -> E`` over C.  Such a
    section is fixed by its value x at the terminal object and a cartesian
    lift into x of every ``f: c' -> c``; a vertical transformation is fixed by
    its component at the terminal object.  Returns the family and, for each
    base object, the evaluation functor ``Gr(p)(c) -> fiber(p, c)``, each
    checked to be an equivalence.
    """
    cl = classify(p)
    if not cl.fibration:
        raise CategoryError("gr_of_fibration needs a fibration")
    s, b = p.source, p.target
    cart = cl.cartesian
    fibers, evals, sections_all = [], [], []
    for c in range(b.n_obj):
        fc, inc = fiber(p, c)
        over = list(b.into[c])  # objects of C/c
        secs = []
        for xi, x in enumerate(inc.obj_map):
            choices = []
            for f in over:
                choices.append([m for m in s.into[x] if cart[m] and p.mor_map[m] == f])
            for pick in itertools.product(*choices):
                # value at the terminal object must be the identity of x
                if pick[over.index(b.identities[c])] != s.identities[x]:
                    continue
                secs.append((x, pick))
        sections_all.append((over, secs))
        objs = list(range(len(secs)))
        mors = []
        for i, (x, _) in enumerate(secs):
            for j, (x2, _) in enumerate(secs):
                for u in s.hom(x, x2):
                    if p.mor_map[u] == b.identities[c]:
                        mors.append(((i, j, u), i, j))
        gr = FinCat.from_compose(
            objs,
            mors,
            identity=lambda i, secs=secs: (i, i, s.identities[secs[i][0]]),
            compose=lambda g, f: (f[0], g[1], s.compose(g[2], f[2])),
            name=lambda k: f"s{k}" if isinstance(k, int) else f"{k[0]}>{k[1]}:{s.mor_names[k[2]]}",
        )
        fibers.append(gr)
        pos = {x: k for k, x in enumerate(inc.obj_map)}
        mpos = {m: k for k, m in enumerate(inc.mor_map)}
        ev = FunctorData(gr, fc, [pos[secs[i][0]] for i in objs], [mpos[k[2]] for k in gr.mor_data])
        if not is_equivalence(ev):
            raise CategoryError(f"evaluation at {b.objects[c]} is not an equivalence")
        evals.append(ev)

    # transitions: h: c1 -> c2 sends a section over c2 to its restriction along h
    transitions = []
    for h in range(b.n_mor):
        c1, c2 = b.src[h], b.tgt[h]
        over1, secs1 = sections_all[c1]
        over2, secs2 = sections_all[c2]
        sec_index = {sec: i for i, sec in enumerate(secs1)}
        pos2 = {f: k for k, f in enumerate(over2)}
        obj_map, restricted = [], []
        for x, pick in secs2:
            lift_h = pick[pos2[h]]
            x1 = s.src[lift_h]
            new = []
            for f in over1:
                hf = b.compose(h, f)
                lift_hf = pick[pos2[hf]]
                # unique k over f with lift_h o k = lift_hf
                ks = [k for k in s.hom(s.src[lift_hf], x1) if p.mor_map[k] == f and s.compose(lift_h, k) == lift_hf]
                new.append(ks[0])
            sec = (x1, tuple(new))
            obj_map.append(sec_index[sec])
            restricted.append(lift_h)
        gr1, gr2 = fibers[c1], fibers[c2]
        mor_map = []
        for i, j, u in gr2.mor_data:
            li, lj = restricted[i], restricted[j]
            ks = [k for k in s.hom(s.src[li], s.src[lj])
                  if p.mor_map[k] == b.identities[c1] and s.compose(lj, k) == s.compose(u, li)]
            a, bb = obj_map[i], obj_map[j]
            mor_map.append(gr1.mor_index((a, bb, ks[0])))
        transitions.append(FunctorData(gr2, gr1, obj_map, mor_map))
    fam = CatValuedFunctor(b, fibers, transitions, variance="contra")
    fam.sections = sections_all
    return fam, evals


def total_to_source(fam: CatValuedFunctor, p: FunctorData, total: FinCat) -> FunctorData:
    """Comparison ``Tot(Gr(p)) -> source(p)`` sending ``(c, s)`` to ``s(id_c)``."""
    s, b = p.source, p.target
    obj_map = [fam.sections[c][1][i][0] for c, i in total.obj_data]
    mor_map = []
    for h, j, u in total.mor_data:
        # u: s1 -> h^* s2 in Gr(src h); its image is (lift of h chosen by s2) o u
        c2 = b.tgt[h]
        over, secs = fam.sections[c2]
        lift = secs[j][1][over.index(h)]
        uu = fam.fibers[b.src[h]].mor_data[u][2]
        mor_map.append(s.compose(lift, uu))
    return FunctorData(total, s, obj_map, mor_map)
