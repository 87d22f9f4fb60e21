import pytest
from hypothesis import given
from hypothesis import strategies as st

from kdesk.exactlin import FgAbGroup
from kdesk.fincat import classify
from kdesk.funhom import FunctorError, tor
from kdesk.gammafam import (
    GammaModule,
    additivize,
    gamma_plus,
    h_gamma,
    h_gamma_tower,
    is_additive,
    is_pointed,
    join_chain,
    lazy_tensor,
    pointed_sets_with_wedge,
    reduced_dual,
    reduced_free,
    reduced_representable,
    representable_plus,
    split_r1,
    symmetric_square,
    tilde,
    wedge_defect,
    wreath_plus,
)


def strs(gs):
    return [str(g) for g in gs]


groups = st.builds(FgAbGroup.from_cyclic, st.integers(0, 2), st.lists(st.integers(2, 12), max_size=2))


def test_truncated_gamma_validates():
    for m in range(4):
        g = gamma_plus(m)
        g.validate()
        assert g.n_mor == sum((k + 1) ** n for n in range(m + 1) for k in range(m + 1))


@pytest.mark.parametrize("a,b", [(0, 0), (0, 2), (1, 1), (1, 2), (2, 1)])
def test_wedge_retractions(a, b):
    g = gamma_plus(3)
    n, p, p2, i1, i2 = g.wedge(a, b)
    assert n == a + b
    assert g.compose(p, i1) == g.identities[a]
    assert g.compose(p2, i2) == g.identities[b]
    # the cross composites factor through the base point
    assert g.mor_data[g.compose(p2, i1)][2] == (0,) * a
    assert g.mor_data[g.compose(p, i2)][2] == (0,) * b


def test_wedge_beyond_bound_is_refused():
    with pytest.raises(ValueError):
        gamma_plus(2).wedge(2, 1)


def test_standard_modules_are_functors():
    g = gamma_plus(2)
    for e in (reduced_free(g), reduced_dual(g), representable_plus(g, 1), reduced_representable(g, 2),
              symmetric_square(reduced_free(g))):
        e.validate()


def test_pointed_and_additive():
    g = gamma_plus(3)
    t = reduced_free(g)
    assert is_pointed(t) and is_additive(t)
    r1 = representable_plus(g, 1)
    assert not is_pointed(r1)
    assert wedge_defect(r1)
    # Sym^2 t picks up cross terms on a wedge
    s = symmetric_square(t)
    assert is_pointed(s) and (1, 1) in wedge_defect(s)


def test_r1_splits():
    with pytest.raises(ValueError):
        split_r1(gamma_plus(0))
    for m in range(1, 4):
        t, r1, it, i0 = split_r1(gamma_plus(m))
        assert all(r1.rank(x) == t.rank(x) + 1 for x in range(m + 1))


@given(groups, groups)
def test_additivization_of_tilde_is_additive(m1, m2):
    g = gamma_plus(2)
    a = additivize(tilde(g, m1))[0]
    b = additivize(tilde(g, m2))[0]
    assert a == m1 and b == m2
    assert additivize(tilde(g, m1 + m2))[0] == a + b


def test_presented_module_rejects_higher_degrees():
    g = gamma_plus(2)
    with pytest.raises(FunctorError):
        additivize(tilde(g, FgAbGroup.from_cyclic(0, [2])), 1)


def test_relation_naturality_check():
    g = gamma_plus(2)
    mod = tilde(g, FgAbGroup.from_cyclic(0, [3]))
    mod.check()
    bad = GammaModule(mod.gens, mod.rels, [m.scale(2) if k == 2 else m for k, m in enumerate(mod.map)])
    with pytest.raises(FunctorError):
        bad.check()


def test_co_yoneda_for_pointed_representables():
    # R_n (x)_Γ T = T([n]+) = Z^n and the higher Tor vanish
    g = gamma_plus(2)
    for n in range(3):
        got = h_gamma(representable_plus(g, n), 2)
        assert got == [FgAbGroup(n), FgAbGroup(), FgAbGroup()]


def test_gamma_homology_of_t():
    for m in (1, 2, 3):
        assert strs(h_gamma(reduced_free(gamma_plus(m)), 2)) == ["Z", "0", "0"]


def test_cross_effect_class_at_m2():
    g = gamma_plus(2)
    t = reduced_free(g)
    e = lazy_tensor(t, symmetric_square(t))
    by_resolution = h_gamma(e, 1)
    by_bar = tor(e, reduced_dual(g), 1, method="bar")
    assert by_resolution == by_bar
    assert strs(by_resolution) == ["0", "Z"]


def test_towers():
    def build(g):
        t = reduced_free(g)
        return lazy_tensor(t, symmetric_square(t))

    rows = h_gamma_tower(build, [2, 3], 1)
    assert strs(rows[2]) == ["0", "Z"]
    assert strs(rows[3]) == ["0", "0"]
    rows = h_gamma_tower(lambda g: lazy_tensor(reduced_free(g), reduced_free(g)), [2, 3], 1)
    assert all(strs(r) == ["0", "0"] for r in rows.values())


def test_coproduct_data_validates():
    pointed_sets_with_wedge(2).validate()
    join_chain(3).validate()


@pytest.mark.parametrize("cd,sizes", [(pointed_sets_with_wedge(1), [1, 2, 3]),
                                      (join_chain(2), [1, 2, 4]),
                                      (join_chain(3), [1, 3, 9])],
                         ids=["gamma1", "chain2", "chain3"])
def test_wreath_products(cd, sizes):
    fam, total, p = wreath_plus(cd, 2)
    assert [f.n_obj for f in fam.fibers] == sizes
    total.validate()
    assert classify(p).cofibration
