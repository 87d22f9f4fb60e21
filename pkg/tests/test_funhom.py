import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kdesk.exactlin import FgAbGroup, IntMatrix, LocalizationSpec, homology
from kdesk.fincat import FunctorData, arrow, cyclic_group
from kdesk.funhom import (
    CoeffFunctor,
    FunctorError,
    bar_complex,
    bar_ranks,
    cat_homology,
    corepresentable,
    lkan,
    relative_tensor,
    representable,
    tensor_over_cat,
    tor,
    tor_by_resolution,
)
from kdesk.gallery import crown, parallel_pair, random_category, random_cofibration
from kdesk.simpset import chains, nerve

seeds = st.integers(0, 10 ** 6)


def strs(gs):
    return [str(g) for g in gs]


def sign_rep():
    c = cyclic_group(2)
    return CoeffFunctor(c, "co", [1], [IntMatrix.identity(1), IntMatrix.from_dense([[-1]])])


def random_coeff(rng, c, variance):
    """Sums of (co)representables and constants: enough variety for cross-checks."""
    make = representable if variance == "co" else corepresentable
    e = make(c, rng.randrange(c.n_obj))
    if rng.random() < 0.5:
        other = make(c, rng.randrange(c.n_obj)) if rng.random() < 0.5 else CoeffFunctor.constant(c, variance)
        e = e.direct_sum(other)
    return e


# ---------------------------------------------------------------------------
# frozen values (group homology and nerves of small posets)


def test_cyclic_group_homology():
    c = cyclic_group(3)
    assert strs(cat_homology(c, CoeffFunctor.constant(c), 4)) == ["Z", "Z/3", "0", "Z/3", "0"]


def test_sign_representation_of_z2():
    # H_n(Z/2; Z^-) is Z/2 in even degrees and 0 in odd degrees
    e = sign_rep()
    assert strs(cat_homology(e.base, e, 3)) == ["Z/2", "0", "Z/2", "0"]
    assert strs(cat_homology(e.base, e, 3, method="resolution")) == ["Z/2", "0", "Z/2", "0"]


def test_circles():
    for c in (crown(), parallel_pair()):
        assert strs(cat_homology(c, CoeffFunctor.constant(c), 2)) == ["Z", "Z", "0"]


def test_localized_coefficients():
    c = cyclic_group(2)
    e = CoeffFunctor.constant(c, ring=LocalizationSpec.at(3))
    assert strs(cat_homology(c, e, 2)) == ["Z", "0", "0"]
    e = CoeffFunctor.constant(c, ring=LocalizationSpec.at(2))
    assert strs(cat_homology(c, e, 2)) == ["Z", "Z/2", "0"]


# ---------------------------------------------------------------------------
# properties


@given(seeds)
def test_co_yoneda(seed):
    rng = random.Random(seed)
    c = random_category(rng, 4, 12)
    t = random_coeff(rng, c, "contra")
    for x in range(c.n_obj):
        r = representable(c, x)
        for method in ("bar", "resolution"):
            g = tor(r, t, 2, method=method)
            assert g[0] == FgAbGroup(t.rank(x))
            assert g[1].is_zero() and g[2].is_zero()
        assert tensor_over_cat(r, t) == FgAbGroup(t.rank(x))


@given(seeds)
def test_bar_and_resolution_agree(seed):
    rng = random.Random(seed)
    c = random_category(rng, 4, 12)
    e = random_coeff(rng, c, "co")
    t = random_coeff(rng, c, "contra")
    assert tor(e, t, 2) == tor(e, t, 2, method="resolution")


@given(seeds)
def test_constant_coefficients_match_nerve(seed):
    c = random_category(random.Random(seed), 4, 12)
    cc = chains(nerve(c, 3))
    assert cat_homology(c, CoeffFunctor.constant(c), 3) == [homology(cc, n) for n in range(4)]


@given(seeds)
def test_base_change_and_naturality(seed):
    rng = random.Random(seed)
    fam, total, p = random_cofibration(rng)
    e = CoeffFunctor.constant(total) if rng.random() < 0.5 else representable(total, rng.randrange(total.n_obj))
    a, b = lkan(p, e, 2, "comma"), lkan(p, e, 2, "fiber")
    a.check()
    b.check()
    rt = relative_tensor(p, e, CoeffFunctor.constant(total, "contra"), 2)
    rt.check()
    for y in range(p.target.n_obj):
        assert a.homology_at(y) == b.homology_at(y) == rt.homology_at(y)


def test_lkan_along_identity_is_the_functor():
    c = crown()
    e = representable(c, 0).direct_sum(CoeffFunctor.constant(c))
    fc = lkan(FunctorData.identity(c), e, 1)
    for y in range(c.n_obj):
        assert fc.homology_at(y) == [FgAbGroup(e.rank(y)), FgAbGroup()]


def test_bar_complex_ranks():
    c = arrow()
    e, t = CoeffFunctor.constant(c), CoeffFunctor.constant(c, "contra")
    # normalized chains: 2 objects, 1 non-identity arrow, nothing longer
    assert bar_ranks(c, e, t, 2) == [2, 1, 0]
    cc = bar_complex(e, t, 2)
    cc.check()


def test_functor_validation():
    c = cyclic_group(2)
    bad = CoeffFunctor(c, "co", [1], [IntMatrix.identity(1), IntMatrix.from_dense([[2]])], check=False)
    with pytest.raises(FunctorError):
        bad.validate()
    with pytest.raises(FunctorError):
        CoeffFunctor(c, "sideways", [1], [IntMatrix.identity(1)] * 2)


def test_coeff_json_round_trip():
    c = crown()
    e = representable(c, 1)
    e2 = CoeffFunctor.from_json(e.to_json(), c)
    assert e2.ranks == e.ranks and all(e2.act(f) == e.act(f) for f in range(c.n_mor))


def test_tor_rejects_mismatched_bases():
    a, b = arrow(), arrow()
    with pytest.raises(FunctorError):
        tor(CoeffFunctor.constant(a), CoeffFunctor.constant(b, "contra"), 1)


def test_resolution_engine_low_degrees_on_z2():
    c = cyclic_group(2)
    got = tor_by_resolution(CoeffFunctor.constant(c), CoeffFunctor.constant(c, "contra"), 3)
    assert strs(got) == ["Z", "Z/2", "0", "Z/2"]
