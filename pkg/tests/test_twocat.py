import pytest

from kdesk.exactlin import homology
from kdesk.fincat import arrow, cyclic_group, poset
from kdesk.funhom import CoeffFunctor, cat_homology
from kdesk.gallery import crown
from kdesk.simpset import chains, nerve, tot_of_simpset
from kdesk.twocat import (
    Fin2Cat,
    TwoCategoryError,
    mark_special,
    nerve2,
    one_object_2group,
    q_gamma,
    span_classes,
    two_representable,
)


def strs(gs):
    return [str(g) for g in gs]


@pytest.mark.parametrize("c", [arrow(), crown(), cyclic_group(2), poset(3, [(0, 1), (1, 2)])],
                         ids=["arrow", "crown", "z2", "chain3"])
def test_one_categories_collapse_to_nerves(c):
    d = 2
    nf = nerve2(Fin2Cat.from_category(c), d)
    nf.total.validate()
    tot, _ = tot_of_simpset(nerve(c, d))
    # the category of simplices: same objects and arrows up to renaming
    assert (nf.total.n_obj, nf.total.n_mor) == (tot.n_obj, tot.n_mor)
    h_total = cat_homology(nf.total, CoeffFunctor.constant(nf.total), d - 1)
    cc = chains(nerve(c, d))
    assert h_total == [homology(cc, n) for n in range(d)]


def test_special_maps_compose_and_contain_identities():
    for two in (one_object_2group(2), Fin2Cat.from_category(crown())):
        nf = nerve2(two, 2)
        special = mark_special(nf)
        t = nf.total
        assert all(special[i] for i in t.identities)
        for g, f in t.composable_pairs():
            if special[g] and special[f]:
                assert special[t.compose(g, f)]


def test_two_representable_of_z2_two_group():
    c = cyclic_group(2)
    want = cat_homology(c, CoeffFunctor.constant(c), 2)
    fc, nf = two_representable(one_object_2group(2), 0, 2, 2)
    fc.check()
    for y in range(nf.total.n_obj):
        assert fc.homology_at(y) == want


def test_two_representable_of_spans():
    q = q_gamma(1)
    fc, nf = two_representable(q, 1, 1, 1)
    for y in range(nf.total.n_obj):
        n, v, s = nf.total.obj_data[y]
        h = q.homs[(1, v[-1])]
        assert fc.homology_at(y) == cat_homology(h, CoeffFunctor.constant(h), 1)


def test_span_two_category_validates():
    q = q_gamma(2)
    q.validate()
    # isomorphism classes of spans [1] <- S -> [1] with |S| <= 2
    assert span_classes(q, 1, 1) == 3


def test_broken_interchange_is_rejected():
    two = one_object_2group(3)
    comp2 = {k: dict(v) for k, v in two.comp2.items()}
    table = comp2[(0, 0, 0)]
    key = next(k for k, v in table.items() if k[0] and k[1])
    table[key] = (table[key] + 1) % 3
    with pytest.raises(TwoCategoryError):
        Fin2Cat(two.objects, two.homs, two.units, two.comp1, comp2)
