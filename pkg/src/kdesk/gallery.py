"""Small categories and families used by tests, the acceptance battery and fixtures."""

from __future__ import annotations

import itertools
import random

from .fincat import (
    CatValuedFunctor,
    CategoryError,
    FinCat,
    FunctorData,
    arrow,
    cyclic_group,
    discrete,
    grothendieck_total,
    point,
    poset,
    product,
)


def parallel_pair() -> FinCat:
    """Two objects with two parallel arrows a => b."""
    return FinCat(["a", "b"], ["id_a", "id_b", "f", "g"], [0, 1, 0, 0], [0, 1, 1, 1], [0, 1],
                  [(0, 0, 0), (1, 1, 1), (2, 0, 2), (3, 0, 3), (1, 2, 2), (1, 3, 3)])


def concrete_category(sizes, generators) -> FinCat:
    """Subcategory of finite sets generated by functions.

    ``sizes[i]`` is the size of object i; a generator is ``(i, j, values)``
    with ``values`` a tuple of length ``sizes[i]`` in ``range(sizes[j])``.
    """
    mors = {(i, i, tuple(range(n))) for i, n in enumerate(sizes)}
    mors |= {(i, j, tuple(v)) for i, j, v in generators}
    frontier = set(mors)
    while frontier:
        new = set()
        for f in frontier:
            for g in mors | frontier:
                if f[1] == g[0]:
                    new.add((f[0], g[1], tuple(g[2][x] for x in f[2])))
                if g[1] == f[0]:
                    new.add((g[0], f[1], tuple(f[2][x] for x in g[2])))
        new -= mors
        mors |= new
        frontier = new
    mors = sorted(mors)
    return FinCat.from_compose(
        list(range(len(sizes))),
        [(m, m[0], m[1]) for m in mors],
        identity=lambda i: (i, i, tuple(range(sizes[i]))),
        compose=lambda g, f: (f[0], g[1], tuple(g[2][x] for x in f[2])),
        name=lambda k: f"o{k}" if isinstance(k, int) else f"{k[0]}>{k[1]}:{''.join(map(str, k[2]))}",
    )


def random_concrete(rng: random.Random, max_obj: int = 4, max_mor: int = 12) -> FinCat:
    while True:
        n = rng.randint(1, max_obj)
        sizes = [rng.randint(1, 3) for _ in range(n)]
        gens = []
        for _ in range(rng.randint(0, 4)):
            i, j = rng.randrange(n), rng.randrange(n)
            gens.append((i, j, tuple(rng.randrange(sizes[j]) for _ in range(sizes[i]))))
        try:
            c = concrete_category(sizes, gens)
        except CategoryError:
            continue
        if c.n_mor <= max_mor:
            return c


def random_poset(rng: random.Random, n: int) -> FinCat:
    rel = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.5]
    return poset(n, rel)


def random_category(rng: random.Random, max_obj: int = 4, max_mor: int = 12) -> FinCat:
    """Mix of concrete set categories, posets and small groups."""
    kind = rng.random()
    if kind < 0.6:
        return random_concrete(rng, max_obj, max_mor)
    if kind < 0.85:
        return random_poset(rng, rng.randint(1, max_obj))
    return cyclic_group(rng.choice([2, 3]))


# ---------------------------------------------------------------------------
# random strict families and their totals


def monotone_functors(a: FinCat, b: FinCat):
    """All functors between preorder categories built by ``poset``."""
    out = []
    for obj_map in itertools.product(range(b.n_obj), repeat=a.n_obj):
        ok = True
        mor_map = []
        for m in range(a.n_mor):
            hs = b.hom(obj_map[a.src[m]], obj_map[a.tgt[m]])
            if not hs:
                ok = False
                break
            mor_map.append(hs[0])
        if ok:
            out.append(FunctorData(a, b, obj_map, mor_map, check=False))
    return out


def crown() -> FinCat:
    """Poset 0,1 < 2,3 whose nerve is a circle."""
    return poset(4, [(0, 2), (0, 3), (1, 2), (1, 3)])


def constant_functors(a: FinCat, b: FinCat):
    return [FunctorData(a, b, [y] * a.n_obj, [b.identities[y]] * a.n_mor, check=False) for y in range(b.n_obj)]


def simple_functors(a: FinCat, b: FinCat):
    """Monotone maps between posets, constant functors otherwise."""
    if getattr(a, "is_poset", False) and getattr(b, "is_poset", False):
        return monotone_functors(a, b)
    return constant_functors(a, b)


def random_fiber(rng: random.Random, max_fiber: int = 3) -> FinCat:
    r = rng.random()
    if r < 0.15:
        c = crown()
    elif r < 0.3:
        return cyclic_group(2)
    else:
        c = random_poset(rng, rng.randint(1, max_fiber))
    c.is_poset = True
    return c


def tree_bases():
    """Posets whose Hasse diagrams have unique paths, plus their Hasse edges."""
    return [
        (poset(1, []), []),
        (poset(2, [(0, 1)]), [(0, 1)]),
        (poset(3, [(0, 1), (1, 2)]), [(0, 1), (1, 2)]),
        (poset(3, [(0, 1), (0, 2)]), [(0, 1), (0, 2)]),
        (poset(3, [(0, 2), (1, 2)]), [(0, 2), (1, 2)]),
        (poset(2, []), []),
    ]


def _path(edges, a, b):
    """Unique Hasse path a -> b as a list of edges."""
    if a == b:
        return []
    for e in edges:
        if e[0] == a:
            rest = _path(edges, e[1], b)
            if rest is not None:
                return [e] + rest
    return None


def random_family(rng: random.Random, max_fiber: int = 3) -> CatValuedFunctor:
    """Strict covariant family over a tree-shaped poset.

    Fibers are posets (sometimes a crown, a circle up to homotopy) or Z/2.
    """
    base, edges = rng.choice(tree_bases())
    fibers = [random_fiber(rng, max_fiber) for _ in range(base.n_obj)]
    edge_fun = {}
    for a, b in edges:
        edge_fun[(a, b)] = rng.choice(simple_functors(fibers[a], fibers[b]))
    transitions = []
    for f in range(base.n_mor):
        a, b = base.src[f], base.tgt[f]
        fun = FunctorData.identity(fibers[a])
        for e in _path(edges, a, b):
            fun = fun.then(edge_fun[e])
        transitions.append(fun)
    return CatValuedFunctor(base, fibers, transitions, "co")


def swap_family() -> CatValuedFunctor:
    """Z/2 acting on the discrete category with two objects by swapping them."""
    base = cyclic_group(2)
    d = discrete(2)
    swap = FunctorData(d, d, [1, 0], [1, 0])
    return CatValuedFunctor(base, [d], [FunctorData.identity(d), swap], "co")


def random_cofibration(rng: random.Random):
    """Total category of a random strict family with its projection (a cofibration)."""
    r = rng.random()
    if r < 0.15:
        fam = swap_family()
    elif r < 0.3:
        base, _ = rng.choice(tree_bases())
        fam = CatValuedFunctor.constant(base, random_fiber(rng), "co")
    else:
        fam = random_family(rng)
    total, p = grothendieck_total(fam)
    return fam, total, p


__all__ = [
    "arrow",
    "concrete_category",
    "crown",
    "cyclic_group",
    "discrete",
    "monotone_functors",
    "parallel_pair",
    "point",
    "poset",
    "product",
    "random_category",
    "random_cofibration",
    "random_concrete",
    "random_family",
    "random_poset",
    "swap_family",
    "tree_bases",
]
