import random

from hypothesis import given
from hypothesis import strategies as st

from kdesk.exactlin import IntMatrix, homology, is_unimodular
from kdesk.fincat import arrow, cyclic_group, poset
from kdesk.gallery import crown, random_category
from kdesk.simpset import (
    TruncSimpSet,
    assembly_matrix,
    chains,
    codegeneracy,
    coface,
    compose,
    compose_all,
    delta_category,
    dk_comparison,
    dold_kan_D,
    dold_kan_N,
    elementary_factorization,
    epi_mono,
    free_module,
    from_vertices,
    ident,
    is_simplicial_map,
    monotone_maps,
    nerve,
    points,
    tautological_map,
    triangle_boundary,
)
from test_exactlin import complexes

seeds = st.integers(0, 10 ** 6)


@st.composite
def monotone(draw, max_n=4):
    m = draw(st.integers(0, max_n))
    n = draw(st.integers(0, max_n))
    maps = monotone_maps(m, n)
    return m, n, maps[draw(st.integers(0, len(maps) - 1))]


def test_monotone_map_counts():
    # |Hom([m],[n])| = binom(m+n+1, m+1)
    from math import comb

    for m in range(4):
        for n in range(4):
            assert len(monotone_maps(m, n)) == comb(m + n + 1, m + 1)


def test_cosimplicial_identities():
    for n in range(1, 5):
        for i in range(n + 1):
            for j in range(i + 1, n + 1):
                assert compose(coface(n, j), coface(n - 1, i)) == compose(coface(n, i), coface(n - 1, j - 1))
        for j in range(n):
            for i in range(n + 1):
                lhs = compose(codegeneracy(n - 1, j), coface(n, i))
                if i in (j, j + 1):
                    assert lhs == ident(n - 1)


@given(monotone())
def test_epi_mono_and_elementary_factorization(data):
    m, n, theta = data
    mu, tau = epi_mono(theta)
    assert compose(mu, tau) == theta
    assert len(set(mu)) == len(mu)
    assert set(tau) == set(range(len(mu)))
    assert compose_all(elementary_factorization(theta, n), m) == theta


def test_delta_category():
    d = delta_category(2)
    d.validate()
    assert d.n_mor == sum(len(monotone_maps(a, b)) for a in range(3) for b in range(3))


@given(seeds)
def test_nerves_satisfy_identities(seed):
    c = random_category(random.Random(seed), 4, 10)
    x = nerve(c, 2)
    x.check_identities()
    free_module(x)[0].check_identities()


def test_nerve_homology_of_known_categories():
    def h(c, d=3):
        cc = chains(nerve(c, d))
        return [str(homology(cc, n)) for n in range(d + 1)]

    assert h(arrow()) == ["Z", "0", "0", "0"]
    assert h(crown()) == ["Z", "Z", "0", "0"]
    assert h(cyclic_group(2)) == ["Z", "Z/2", "0", "Z/2"]
    assert h(poset(3, [(0, 1), (1, 2)])) == ["Z", "0", "0", "0"]


def test_simplicial_complexes():
    circle = triangle_boundary(2)
    cc = chains(circle)
    assert [str(homology(cc, n)) for n in range(3)] == ["Z", "Z", "0"]
    sphere = from_vertices(2, [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)])
    cc = chains(sphere)
    assert [str(homology(cc, n)) for n in range(3)] == ["Z", "0", "Z"]
    cc = chains(points(1, 3))
    assert str(homology(cc, 0)) == "Z^3"


def test_json_round_trip():
    x = nerve(crown(), 1)
    y = TruncSimpSet.from_json(x.to_json())
    assert y.to_json() == x.to_json()


@given(complexes(max_rank=3, max_deg=4))
def test_dold_kan_round_trips(e):
    dm = dold_kan_D(e)
    dm.check_identities()
    ne = dold_kan_N(dm)
    assert all(ne.rank(n) == e.rank(n) for n in range(e.hi + 1))
    assert all(ne.d(n) == e.d(n) for n in range(1, e.hi + 1))
    nm, comp = dk_comparison(dm)
    assert is_simplicial_map(dold_kan_D(nm, dm.top), dm, comp)
    assert all(is_unimodular(c) for c in comp)


@given(seeds)
def test_dold_kan_on_free_modules(seed):
    x = nerve(random_category(random.Random(seed), 3, 6), 1)
    m, _ = free_module(x)
    nm, comp = dk_comparison(m)
    assert is_simplicial_map(dold_kan_D(nm, m.top), m, comp)
    # normalized chains of Z[X] have the nondegenerate simplices as basis
    assert [nm.rank(n) for n in range(m.top + 1)] == [len(x.nd[n]) for n in range(m.top + 1)]


def test_tautological_map_factors_through_assembly():
    x = nerve(arrow(), 2)
    from kdesk.exactlin import ChainComplex

    e = ChainComplex(0, 1, {0: 1, 1: 1}, {1: IntMatrix.from_dense([[0]])})
    phi = {0: IntMatrix.from_dense([[1, 1]]), 1: IntMatrix.from_dense([[1]])}
    u = tautological_map(x, e, phi)
    zx, bases = free_module(x)
    assert is_simplicial_map(zx, dold_kan_D(e, x.top), u)
    for n in range(2):
        proj = IntMatrix.from_triplets(len(bases[n]), len(x.nd[n]),
                                       [(bases[n].index(x.nondegenerate(n, k)), k, 1) for k in range(len(x.nd[n]))])
        assert assembly_matrix(e, n) @ u[n] @ proj == phi[n]
