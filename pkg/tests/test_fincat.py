import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kdesk.fincat import (
    CategoryError,
    CatValuedFunctor,
    FinCat,
    FunctorData,
    LazyCat,
    arrow,
    classify,
    comma,
    cyclic_group,
    fiber,
    gr_of_fibration,
    grothendieck_total,
    is_equivalence,
    opposite,
    point,
    poset,
    product,
    total_to_source,
)
from kdesk.gallery import crown, parallel_pair, random_category, random_family, swap_family

seeds = st.integers(0, 10 ** 6)


def corrupted_tables(c: FinCat):
    """Every composition table obtained by changing one entry to another morphism with the same endpoints."""
    triples = c.composition_triples()
    for k, (g, f, gf) in enumerate(triples):
        for h in c.hom(c.src[gf], c.tgt[gf]):
            if h != gf:
                yield triples[:k] + [(g, f, h)] + triples[k + 1:]


def rebuild(c: FinCat, triples):
    return FinCat(c.objects, c.mor_names, c.src, c.tgt, c.identities, triples, validate=False)


def test_standard_categories_validate():
    for c in (point(), arrow(), cyclic_group(3), crown(), parallel_pair(), product(arrow(), cyclic_group(2))):
        c.validate()
    assert arrow().n_mor == 3
    assert product(arrow(), arrow()).n_mor == 9


@pytest.mark.parametrize("c", [cyclic_group(3), cyclic_group(4), product(arrow(), cyclic_group(2))],
                         ids=["z3", "z4", "arrow_x_z2"])
def test_every_single_corruption_is_rejected(c):
    n = 0
    for triples in corrupted_tables(c):
        n += 1
        with pytest.raises(CategoryError):
            rebuild(c, triples).validate()
    assert n > 0


@given(st.integers(3, 6), seeds)
def test_corruption_fuzz_on_groups(order, seed):
    rng = random.Random(seed)
    c = cyclic_group(order)
    triples = c.composition_triples()
    k = rng.randrange(len(triples))
    g, f, gf = triples[k]
    h = rng.choice([m for m in range(c.n_mor) if m != gf])
    triples[k] = (g, f, h)
    with pytest.raises(CategoryError) as err:
        rebuild(c, triples).validate()
    assert any(w in str(err.value) for w in ("associativity", "unit law", "closure"))


def test_missing_composite_is_reported():
    c = arrow()
    triples = [t for t in c.composition_triples() if c.is_identity(t[0]) and c.is_identity(t[1])]
    with pytest.raises(CategoryError, match="missing|closure|unit"):
        FinCat(c.objects, c.mor_names, c.src, c.tgt, c.identities, triples)


def test_json_round_trip():
    for c in (arrow(), cyclic_group(3), crown()):
        c2 = FinCat.from_json(c.to_json())
        assert c2.to_json() == c.to_json()


def test_json_rejects_unknown_names():
    obj = arrow().to_json()
    obj["composition"].append(["nope", "nope", "nope"])
    with pytest.raises(CategoryError, match="unknown name"):
        FinCat.from_json(obj)


def test_opposite_is_involutive():
    c = crown()
    cc = opposite(opposite(c))
    assert cc.to_json() == c.to_json()


def test_hom_and_iso():
    z = cyclic_group(3)
    assert all(z.is_iso(f) for f in range(z.n_mor))
    a = arrow()
    f = next(m for m in range(a.n_mor) if not a.is_identity(m))
    assert not a.is_iso(f)
    assert len(a.hom(0, 1)) == 1 and len(a.hom(1, 0)) == 0


def test_lazy_category_composes_on_demand():
    objs = [0, 1, 2]
    mors = [(a, b) for a in objs for b in objs if a <= b]
    c = LazyCat(objs, [(m, m[0], m[1]) for m in mors], identity=lambda a: (a, a),
                compose=lambda g, f: (f[0], g[1]))
    c.validate()
    assert c.compose(c.mor_index((1, 2)), c.mor_index((0, 1))) == c.mor_index((0, 2))
    with pytest.raises(CategoryError):
        c.compose(c.mor_index((0, 1)), c.mor_index((0, 1)))


# ---------------------------------------------------------------------------
# Grothendieck constructions


def contravariant(fam: CatValuedFunctor) -> CatValuedFunctor:
    """The same data read as a contravariant family over the opposite base."""
    return CatValuedFunctor(opposite(fam.base), fam.fibers, fam.transitions, "contra")


@given(seeds)
def test_covariant_total_is_cofibration(seed):
    fam = random_family(random.Random(seed))
    total, p = grothendieck_total(fam)
    total.validate()
    assert classify(p).cofibration
    for c in range(fam.base.n_obj):
        fc, _ = fiber(p, c)
        assert fc.n_obj == fam.fibers[c].n_obj and fc.n_mor == fam.fibers[c].n_mor


@given(seeds)
def test_contravariant_round_trip(seed):
    fam = contravariant(random_family(random.Random(seed)))
    total, p = grothendieck_total(fam)
    total.validate()
    assert classify(p).fibration
    gr, evals = gr_of_fibration(p)
    for c, ev in enumerate(evals):
        assert is_equivalence(ev)
        assert ev.target.n_obj == fam.fibers[c].n_obj
    tot2, p2 = grothendieck_total(gr)
    assert is_equivalence(total_to_source(gr, p, tot2))


def test_swap_family_total():
    total, p = grothendieck_total(swap_family())
    cl = classify(p)
    assert cl.cofibration and cl.fibration
    # Z/2 acting freely on two points: the total category is equivalent to a point
    assert total.n_obj == 2
    assert all(len(total.hom(a, b)) == 1 for a in range(2) for b in range(2))


def test_comma_of_identity_has_terminal_object():
    c = crown()
    ident = FunctorData.identity(c)
    for y in range(c.n_obj):
        cat, proj = comma(ident, y)
        term = [x for x in range(cat.n_obj) if all(len(cat.hom(z, x)) == 1 for z in range(cat.n_obj))]
        assert term


def test_non_fibration_detected():
    # inclusion of the endpoints of an arrow is neither a fibration nor a cofibration
    a = arrow()
    d = poset(2, [])
    inc = FunctorData(d, a, [0, 1], [a.identities[0], a.identities[1]])
    cl = classify(inc)
    assert not cl.fibration and not cl.cofibration


def test_random_category_generator_is_valid():
    rng = random.Random(0)
    for _ in range(20):
        c = random_category(rng, 4, 12)
        c.validate()
        assert c.n_obj <= 4 and c.n_mor <= 12
