"""Acceptance battery: one check per criterion, each returning a Verdict.

Shared by ``tests/test_acceptance.py`` and ``kdesk selftest``.  Every check
computes its result faithfully and compares it at the stated tolerance
(exact group equality, wall-clock limit, memory limit where one is given).
"""

from __future__ import annotations

import random
import resource
import time
from dataclasses import dataclass, field

from .exactlin import (
    ChainComplex,
    FgAbGroup,
    IntMatrix,
    LocalizationSpec,
    homology,
    invariant_factors,
    is_unimodular,
    kernel_basis,
    render_local,
    smith_normal_form,
)
from .fincat import arrow, cyclic_group, point
from .funhom import CoeffFunctor, cat_homology, corepresentable, lkan, representable, tor
from .gallery import crown, parallel_pair, random_category, random_cofibration
from .gammafam import (
    additivize,
    gamma_plus,
    h_gamma,
    lazy_tensor,
    reduced_free,
    reduced_representable,
    symmetric_square,
    tilde,
)
from .kpipe import Budget, build_fq_vect, kr_homology
from .simpset import (
    chains,
    dk_comparison,
    dold_kan_D,
    dold_kan_N,
    free_module,
    is_simplicial_map,
    nerve,
)
from .twocat import one_object_2group, two_representable


@dataclass
class Verdict:
    number: int
    title: str
    ok: bool
    detail: str
    seconds: float
    limit: float | None = None
    data: dict = field(default_factory=dict)

    def line(self) -> str:
        mark = "PASS" if self.ok else "FAIL"
        lim = f" (limit {self.limit:g}s)" if self.limit else ""
        return f"[{mark}] criterion {self.number}: {self.title} | {self.seconds:.2f}s{lim} | {self.detail}"


def _strs(groups):
    return [str(g) for g in groups]


def _timed(number, title, limit, fn):
    t0 = time.perf_counter()
    ok, detail, data = fn()
    dt = time.perf_counter() - t0
    if limit is not None and dt >= limit:
        ok, detail = False, f"{detail}; over the time limit"
    return Verdict(number, title, ok, detail, dt, limit, data)


# ---------------------------------------------------------------------------


def _random_matrix(rng, rows, cols):
    return IntMatrix.from_dense([[rng.randint(-9, 9) for _ in range(cols)] for _ in range(rows)], cols)


def criterion_1(n=200, seed=1) -> Verdict:
    def run():
        rng = random.Random(seed)
        for k in range(n):
            a = _random_matrix(rng, rng.randint(1, 6), rng.randint(1, 6))
            u, s, v = smith_normal_form(a)
            if not (is_unimodular(u) and is_unimodular(v)):
                return False, f"matrix {k}: transforms not unimodular", {}
            if u @ a @ v != s:
                return False, f"matrix {k}: U A V != S", {}
            diag = [s[i, i] for i in range(min(s.rows, s.cols))]
            off = any(s[i, j] for i, j, _ in s.items() if i != j)
            if off or any(x < 0 for x in diag):
                return False, f"matrix {k}: S not a nonnegative diagonal", {}
            nz = [x for x in diag if x]
            if diag[: len(nz)] != nz or any(nz[i + 1] % nz[i] for i in range(len(nz) - 1)):
                return False, f"matrix {k}: divisibility chain broken", {}
            if nz != invariant_factors(a):
                return False, f"matrix {k}: disagrees with invariant_factors", {}
        return True, f"{n} matrices", {}

    return _timed(1, "Smith normal form", 5, run)


def criterion_2(n=20, seed=2) -> Verdict:
    def run():
        rng = random.Random(seed)
        for k in range(n):
            c = random_category(rng, 4, 12)
            a = _strs(cat_homology(c, CoeffFunctor.constant(c), 3))
            cc = chains(nerve(c, 3))
            b = _strs(homology(cc, i) for i in range(4))
            if a != b:
                return False, f"category {k}: bar {a} vs nerve {b}", {}
        return True, f"{n} random categories, degrees 0..3", {}

    return _timed(2, "nerve and bar homology agree", 60, run)


def criterion_3() -> Verdict:
    want = ["Z", "Z/2", "0", "Z/2"]

    def run():
        c = cyclic_group(2)
        e = CoeffFunctor.constant(c)
        routes = {
            "bar": _strs(cat_homology(c, e, 3)),
            "resolution": _strs(cat_homology(c, e, 3, method="resolution")),
            "nerve": _strs(homology(chains(nerve(c, 3)), i) for i in range(4)),
        }
        ok = all(v == want for v in routes.values())
        return ok, ", ".join(f"{k}={v}" for k, v in routes.items()), {"routes": routes}

    return _timed(3, "group homology of Z/2", 10, run)


def criterion_4(n=20, seed=4) -> Verdict:
    def run():
        rng = random.Random(seed)
        for k in range(n):
            fam, total, p = random_cofibration(rng)
            if p.target.n_obj > 3:
                return False, f"cofibration {k}: base too large", {}
            e = CoeffFunctor.constant(total) if k % 2 else representable(total, rng.randrange(total.n_obj))
            a, b = lkan(p, e, 2, "comma"), lkan(p, e, 2, "fiber")
            for y in range(p.target.n_obj):
                ha, hb = _strs(a.homology_at(y)), _strs(b.homology_at(y))
                if ha != hb:
                    return False, f"cofibration {k}, object {y}: comma {ha} vs fiber {hb}", {}
        return True, f"{n} cofibrations, degrees 0..2", {}

    return _timed(4, "base change: comma and fiber pushforwards agree", 120, run)


def random_complex(rng: random.Random, max_rank=3, max_deg=4) -> ChainComplex:
    hi = rng.randint(0, max_deg)
    ranks = {k: rng.randint(0, max_rank) for k in range(hi + 1)}
    diffs, prev = {}, None
    for k in range(1, hi + 1):
        if prev is None:
            d = IntMatrix.from_dense([[rng.randint(-2, 2) for _ in range(ranks[k])] for _ in range(ranks[k - 1])],
                                     ranks[k])
        else:
            kb = kernel_basis(prev)
            c = IntMatrix.from_dense([[rng.randint(-2, 2) for _ in range(ranks[k])] for _ in range(kb.cols)],
                                     ranks[k])
            d = kb @ c
        diffs[k] = prev = d
    return ChainComplex(0, hi, ranks, diffs)


def criterion_5(n=50, seed=5) -> Verdict:
    def run():
        rng = random.Random(seed)
        for k in range(n):
            e = random_complex(rng)
            dm = dold_kan_D(e)
            ne = dold_kan_N(dm)
            if any(ne.rank(i) != e.rank(i) for i in range(e.hi + 1)) or any(
                ne.d(i) != e.d(i) for i in range(1, e.hi + 1)
            ):
                return False, f"complex {k}: N(D(E)) != E", {}
            # D(N(M)) -> M for M = D(E) and for free modules on nerves
            for m in (dm, free_module(nerve(random_category(rng, 3, 6), 1))[0]):
                nm, comp = dk_comparison(m)
                if not (is_simplicial_map(dold_kan_D(nm, m.top), m, comp) and all(is_unimodular(c) for c in comp)):
                    return False, f"complex {k}: comparison D(N(M)) -> M is not a simplicial isomorphism", {}
        return True, f"{n} complexes", {}

    return _timed(5, "Dold-Kan round trips", 30, run)


def test_categories(seed=6):
    rng = random.Random(seed)
    cats = [point(), arrow(), cyclic_group(2), cyclic_group(3), crown(), parallel_pair()]
    while len(cats) < 10:
        cats.append(random_category(rng, 4, 12))
    return cats


def criterion_6() -> Verdict:
    def run():
        for k, c in enumerate(test_categories()):
            ts = [CoeffFunctor.constant(c, "contra")] + [corepresentable(c, x) for x in range(c.n_obj)]
            for x in range(c.n_obj):
                r = representable(c, x)
                for t in ts:
                    g = tor(r, t, 2)
                    if not (g[0] == FgAbGroup(t.rank(x)) and g[1].is_zero() and g[2].is_zero()):
                        return False, f"category {k}, object {x}: Tor = {_strs(g)}, T(c) has rank {t.rank(x)}", {}
        return True, "10 categories, every object, constant and corepresentable T", {}

    return _timed(6, "representables are acyclic", 60, run)


def criterion_7() -> Verdict:
    mods = [FgAbGroup(1), FgAbGroup(2), FgAbGroup.from_cyclic(0, [2]), FgAbGroup.from_cyclic(0, [3])]

    def run():
        table = {}
        for m in (2, 3, 4):
            g = gamma_plus(m)
            for mod in mods:
                got = additivize(tilde(g, mod))[0]
                table[f"m={m},M={mod}"] = str(got)
                if got != mod:
                    return False, f"m={m}: Add(~{mod}) = {got}", {"table": table}
        return True, "M in {Z, Z^2, Z/2, Z/3}, m in {2,3,4}", {"table": table}

    return _timed(7, "additivization recovers M", 60, run)


def criterion_8() -> Verdict:
    def run():
        c = cyclic_group(2)
        want = _strs(cat_homology(c, CoeffFunctor.constant(c), 2))
        fc, nf = two_representable(one_object_2group(2), 0, 2, 2)
        for y in range(nf.total.n_obj):
            got = _strs(fc.homology_at(y))
            if got != want:
                return False, f"object {nf.total.objects[y]}: {got} vs {want}", {}
        return True, f"all {nf.total.n_obj} nerve objects give {want}", {}

    return _timed(8, "2-representable of the one-object 2-group", 60, run)


def criterion_9(q=2, dim_bound=1, d=2) -> Verdict:
    ring = LocalizationSpec.at(2)

    def run():
        w = build_fq_vect(q, dim_bound)
        res = kr_homology(w, q, ring, (d, 0, 1), 2)
        got = [None if g is None else render_local(g, ring) for g in res.groups]
        want = ["Z_(2)", "0", "0"]
        return got == want, f"H_0..2 = {got}, expected {want}", {"groups": got}

    return _timed(9, "pipeline at set-size truncation 0", 10, run)


def criterion_10(degs=(2, 3), budget: Budget | None = None) -> Verdict:
    ring = LocalizationSpec.at(2)
    mem_limit = 8 * 1024 ** 3

    def run():
        w = build_fq_vect(2, 1)
        tower, ok = {}, True
        for d in degs:
            res = kr_homology(w, 2, ring, (d, 2, 1), 1, budget)
            h0 = res.groups[0]
            tower[f"D=1,d={d}"] = render_local(h0, ring)
            # the rank augmentation lands in Z_(2); surjective needs a free summand in H_0
            ok = ok and h0.free_rank >= 1
        rss = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024
        ok = ok and rss <= mem_limit
        return ok, f"H_0 tower {tower} (target Z_(2)); peak RSS {rss / 2 ** 20:.0f} MB", {"H0": tower}

    return _timed(10, "pipeline desk run", 1800, run)


def pointed_fixtures(g):
    return {
        "t,t": (reduced_free(g, lazy=True), reduced_free(g, lazy=True)),
        "R~1,R~2": (reduced_representable(g, 1), reduced_representable(g, 2)),
        "t,Sym2 t": (reduced_free(g, lazy=True), symmetric_square(reduced_free(g, lazy=True))),
    }


def _size(g: FgAbGroup) -> int:
    return g.free_rank + len(g.torsion)


def criterion_11(ms=(3, 4, 5)) -> Verdict:
    def run():
        towers: dict = {}
        for m in ms:
            g = gamma_plus(m)
            for name, (a, b) in pointed_fixtures(g).items():
                towers.setdefault(name, {})[m] = h_gamma(lazy_tensor(a, b), 1)
        ok = True
        for name, tw in towers.items():
            for deg in (0, 1):
                sizes = [_size(tw[m][deg]) for m in ms]
                ok = ok and all(x >= y for x, y in zip(sizes, sizes[1:]))
        table = {name: {m: _strs(v) for m, v in tw.items()} for name, tw in towers.items()}
        return ok, f"towers {table}", {"towers": table}

    return _timed(11, "H^Γ towers of pointed tensor products", 600, run)


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
    11: criterion_11,
}


def run_all(only=None, echo=print) -> list[Verdict]:
    out = []
    for k, fn in CRITERIA.items():
        if only and k not in only:
            continue
        v = fn()
        if echo:
            echo(v.line())
        out.append(v)
    return out
