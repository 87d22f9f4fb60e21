import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kdesk.exactlin import FgAbGroup, LocalizationSpec, is_unimodular
from kdesk.fincat import CategoryError, classify
from kdesk.kpipe import (
    GF,
    Budget,
    BudgetExceeded,
    FqVect,
    VectAction,
    _block_diag,
    build_fq_vect,
    build_k_total,
    k0_via_h1,
    kr_h0_presentation,
    kr_homology,
    mat_k,
    rank_matrix,
    s_construction,
    truncation_bound,
    zero_waldhausen,
)

Z2 = LocalizationSpec.at(2)


@pytest.fixture(scope="module")
def w21():
    return build_fq_vect(2, 1)


@pytest.fixture(scope="module")
def sc21(w21):
    return s_construction(w21, 2)


def gl_order(q, n):
    out = 1
    for i in range(n):
        out *= q ** n - q ** i
    return out


@pytest.mark.parametrize("q", [2, 3, 4])
def test_field_axioms_and_counts(q):
    f = GF(q)
    els = range(q)
    for a, b, c in itertools.product(els, repeat=3):
        assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
    for a in range(1, q):
        assert f.mul(a, f.inv(a)) == 1
    for n in (1, 2):
        mats = list(f.matrices(n, n))
        assert len(mats) == q ** (n * n)
        assert sum(1 for m in mats if f.rank(m, n, n) == n) == gl_order(q, n) == f.gl_order(n)


def test_vector_space_category():
    c = FqVect(2, 2)
    c.validate()
    assert c.n_mor == sum(2 ** (a * b) for a in range(3) for b in range(3))
    assert sum(1 for m in range(c.n_mor) if c.is_iso(m)) == 1 + 1 + 6


@given(st.integers(0, 10 ** 6))
def test_block_sum_rank_is_additive(seed):
    import random

    rng = random.Random(seed)
    f = GF(rng.choice([2, 3]))
    a, b = rng.randint(1, 3), rng.randint(1, 3)
    ma = tuple(tuple(rng.randrange(f.q) for _ in range(a)) for _ in range(a))
    mb = tuple(tuple(rng.randrange(f.q) for _ in range(b)) for _ in range(b))
    assert f.rank(_block_diag([ma, mb]), a + b, a + b) == f.rank(ma, a, a) + f.rank(mb, b, b)


def test_waldhausen_structure(w21):
    w21.validate()
    zero_waldhausen().validate()
    with pytest.raises(ValueError):
        build_fq_vect(5, 1)


def test_s_construction_is_fibered(sc21):
    assert classify(sc21.s).fibration
    assert [len(sc21.level(n)) for n in range(3)] == [1, 2, 3]


def test_admissible_maps_compose(sc21):
    full, adm = sc21.full, sc21.admissible
    for g, f in full.composable_pairs():
        if adm[g] and adm[f]:
            assert adm[full.compose(g, f)]
    assert all(adm[i] for i in full.identities)


def test_fiber_product_sizes(sc21):
    act = VectAction(sc21, mat_k(2, 2, 1), 2)
    levels = [len(sc21.level(j)) for j in range(3)]
    for k, fp in enumerate(act.fp):
        assert fp.n_obj == sum(n ** k for n in levels)


def test_matrix_two_category_ranks_multiply():
    two = mat_k(2, 2, 1)
    for (a, b, c), table in two.comp1.items():
        hab, hbc, hac = two.homs[(a, b)], two.homs[(b, c)], two.homs[(a, c)]
        for (gi, fi), h in table.items():
            lhs = rank_matrix(hac.obj_data[h], (a, c))
            rhs = rank_matrix(hbc.obj_data[gi], (b, c)) @ rank_matrix(hab.obj_data[fi], (a, b))
            assert lhs == rhs
    for a in range(3):
        u = two.units[a]
        for b in range(3):
            for x in range(two.homs[(a, b)].n_obj):
                assert two.comp1[(a, a, b)][(x, u)] == x


def test_matrix_two_category_bounds():
    with pytest.raises(ValueError):
        mat_k(2, 4, 1)


def test_k0_via_first_homology(w21, sc21):
    assert k0_via_h1(w21, 2, sc=sc21) == FgAbGroup(1)
    assert k0_via_h1(zero_waldhausen(), 2).is_zero()


def test_rank_coefficients_invert_isomorphisms(w21):
    kt, t = build_k_total(w21, 2, (1, 1, 1))
    c = kt.cat
    isos = [f for f in range(c.n_mor) if c.is_iso(f)]
    assert isos
    assert all(is_unimodular(t.act(f)) for f in isos)


def test_routes_agree_in_degree_zero(w21):
    for d, m in ((1, 0), (1, 1), (2, 0)):
        sc = s_construction(w21, d)
        full = kr_homology(w21, 2, Z2, (d, m, 1), 1, route="full", sc=sc)
        pres = kr_homology(w21, 2, Z2, (d, m, 1), 1, route="presentation", sc=sc)
        assert full.groups[0] == pres.groups[0]
        assert pres.groups[1] is None
        assert full.valid_through <= truncation_bound(d, 1)
        assert pres.valid_through <= min(0, truncation_bound(d, 1))


def test_degree_zero_vanishes(w21):
    # the zero vector over the zero chain is a zero object for the rank coefficients
    for d in (1, 2):
        assert kr_h0_presentation(w21, 2, (d, 1, 1)).group.is_zero()


def test_full_route_first_homology(w21, sc21):
    res = kr_homology(w21, 2, Z2, (2, 1, 1), 1, route="full", sc=sc21)
    assert res.route == "full"
    assert res.groups == [FgAbGroup(), FgAbGroup(1)]
    assert res.valid_through == 1


def test_budget_refusal(w21, sc21):
    with pytest.raises(BudgetExceeded):
        kr_homology(w21, 2, Z2, (2, 1, 1), 1, Budget(max_objects=10), route="full", sc=sc21)
    res = kr_homology(w21, 2, Z2, (2, 1, 1), 1, Budget(max_objects=10), route="auto", sc=sc21)
    assert res.route == "presentation" and "budget" in res.sizes


def test_ring_must_match_characteristic(w21):
    with pytest.raises(ValueError):
        kr_homology(w21, 2, LocalizationSpec.at(3), (1, 1, 1), 0)


def test_truncation_bound():
    assert [truncation_bound(d, 3) for d in range(5)] == [0, 0, 1, 2, 3]
    assert truncation_bound(4, 1) == 1


def test_nerve_degree_guard(w21):
    with pytest.raises(ValueError):
        s_construction(w21, 5)


def test_corrupted_waldhausen_rejected():
    w = build_fq_vect(2, 1)
    cof = list(w.cof)
    cof[w.cat.identities[1]] = False
    w.cof = cof
    with pytest.raises(CategoryError):
        w.validate()
