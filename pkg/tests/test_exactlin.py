import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kdesk.exactlin import (
    ChainComplex,
    ChainComplexError,
    FgAbGroup,
    IntMatrix,
    Lattice,
    LocalizationSpec,
    det,
    homology,
    inverse_unimodular,
    invariant_factors,
    is_unimodular,
    kernel_basis,
    left_inverse,
    localize,
    rank,
    render_local,
    smith_normal_form,
    solve,
)
from oracles import homology_oracle, invariant_factors as brute_factors, rational_rank


@st.composite
def dense(draw, max_rows=5, max_cols=5, lo=-9, hi=9):
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    rows = [[draw(st.integers(lo, hi)) for _ in range(c)] for _ in range(r)]
    return rows, c


def random_unimodular(rng, n, steps=8):
    m = IntMatrix.identity(n)
    for _ in range(steps):
        if n < 2:
            break
        i, j = rng.sample(range(n), 2)
        e = IntMatrix.from_triplets(n, n, [(k, k, 1) for k in range(n)] + [(i, j, rng.choice([-2, -1, 1, 2]))])
        m = e @ m
    return m


# ---------------------------------------------------------------------------
# Smith normal form


@given(dense())
def test_snf_reconstructs(data):
    rows, c = data
    a = IntMatrix.from_dense(rows, c)
    u, s, v = smith_normal_form(a)
    assert is_unimodular(u) and is_unimodular(v)
    assert abs(det(u)) == 1 and abs(det(v)) == 1
    assert inverse_unimodular(u) @ s @ inverse_unimodular(v) == a
    diag = [s[i, i] for i in range(min(s.rows, s.cols))]
    nz = [x for x in diag if x]
    assert all(nz[i + 1] % nz[i] == 0 for i in range(len(nz) - 1))


@given(dense(max_rows=4, max_cols=4))
def test_invariant_factors_match_determinantal_divisors(data):
    rows, c = data
    assert invariant_factors(IntMatrix.from_dense(rows, c)) == brute_factors(rows, c)


@given(dense(max_rows=5, max_cols=6, lo=-3, hi=3))
def test_rank_matches_rational_rank(data):
    rows, c = data
    assert rank(IntMatrix.from_dense(rows, c)) == rational_rank(rows, c)


def test_invariant_factors_known():
    assert invariant_factors(IntMatrix.from_dense([[2, 0], [0, 3]])) == [1, 6]
    assert invariant_factors(IntMatrix.from_dense([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])) == [2, 6, 12]
    assert invariant_factors(IntMatrix.zeros(3, 2)) == []


def test_sparse_path_agrees_with_dense():
    # above the dense cutoff the sparse unit-pivot phase runs first
    rng = random.Random(11)
    n = 70
    trip = [(i, i, rng.choice([1, 1, 2, 3])) for i in range(n)]
    trip += [(rng.randrange(n), rng.randrange(n), rng.randint(-2, 2)) for _ in range(120)]
    a = IntMatrix.from_triplets(n, n, trip)
    u, s, v = smith_normal_form(a)
    diag = [s[i, i] for i in range(n) if s[i, i]]
    assert invariant_factors(a) == diag


@given(dense(max_rows=4, max_cols=5, lo=-4, hi=4))
def test_kernel_basis_is_saturated(data):
    rows, c = data
    a = IntMatrix.from_dense(rows, c)
    k = kernel_basis(a)
    assert (a @ k).is_zero()
    assert k.cols == c - rational_rank(rows, c)
    if k.cols:
        assert left_inverse(k) @ k == IntMatrix.identity(k.cols)


@given(dense(max_rows=3, max_cols=3, lo=-5, hi=5), st.lists(st.integers(-5, 5), min_size=3, max_size=3))
def test_solve_finds_integer_solutions(data, x):
    rows, c = data
    a = IntMatrix.from_dense(rows, c)
    xv = IntMatrix.from_dense([[v] for v in x[:c]], 1)
    b = a @ xv
    sol = solve(a, b)
    assert sol is not None and a @ sol == b


def test_solve_reports_no_solution():
    assert solve(IntMatrix.from_dense([[2]]), IntMatrix.from_dense([[1]])) is None


def test_lattice_membership():
    lat = Lattice(2)
    lat.add({0: 2, 1: 0})
    lat.add({0: 0, 1: 3})
    assert lat.contains({0: 4, 1: -3})
    assert not lat.contains({0: 1})
    assert not lat.add({0: 6, 1: 9})
    assert lat.add({0: 1, 1: 1})


# ---------------------------------------------------------------------------
# groups and localization


def test_group_normal_form():
    g = FgAbGroup.from_cyclic(1, [4, 6, 0])
    assert g.free_rank == 2 and g.torsion == (2, 12)
    assert str(g) == "Z^2 ⊕ Z/2 ⊕ Z/12"
    with pytest.raises(ValueError):
        FgAbGroup(0, (4, 2))


@given(st.integers(0, 3), st.lists(st.integers(2, 60), max_size=4), st.sampled_from([2, 3, 5, 7]))
def test_localize_idempotent(free, orders, p):
    g = FgAbGroup.from_cyclic(free, orders)
    r = LocalizationSpec.at(p)
    once = localize(g, r)
    assert localize(once, r) == once
    assert once.free_rank == g.free_rank
    assert all(d == p ** _v(d, p) for d in once.torsion)


def _v(n, p):
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def test_localize_examples():
    g = FgAbGroup.from_cyclic(1, [6, 4])
    assert localize(g, LocalizationSpec.at(2)) == FgAbGroup(1, (2, 4))
    assert render_local(localize(g, LocalizationSpec.at(3)), LocalizationSpec.at(3)) == "Z_(3) ⊕ Z/3"
    assert localize(g, LocalizationSpec.rationals()) == FgAbGroup(1)
    with pytest.raises(ValueError):
        LocalizationSpec.at(4)


# ---------------------------------------------------------------------------
# chain complexes


@st.composite
def complexes(draw, max_rank=3, max_deg=3):
    rng = random.Random(draw(st.integers(0, 10 ** 6)))
    hi = draw(st.integers(1, max_deg))
    ranks = {n: rng.randint(0, max_rank) for n in range(hi + 1)}
    diffs, prev = {}, None
    for n in range(1, hi + 1):
        if prev is None:
            d = IntMatrix.from_dense([[rng.randint(-3, 3) for _ in range(ranks[n])] for _ in range(ranks[0])],
                                     ranks[n])
        else:
            kb = kernel_basis(prev)
            c = IntMatrix.from_dense([[rng.randint(-3, 3) for _ in range(ranks[n])] for _ in range(kb.cols)],
                                     ranks[n])
            d = kb @ c
        diffs[n] = prev = d
    return ChainComplex(0, hi, ranks, diffs)


@given(complexes())
def test_homology_matches_oracle(c):
    dense_d = {n: c.d(n).to_dense() for n in range(1, c.hi + 1)}
    for n in range(c.hi + 1):
        free, tors = homology_oracle(c.ranks, dense_d, n)
        assert homology(c, n) == FgAbGroup.from_cyclic(free, tors)


@given(complexes(), st.integers(0, 10 ** 6))
def test_homology_invariant_under_basis_change(c, seed):
    rng = random.Random(seed)
    g = {n: random_unimodular(rng, c.rank(n)) for n in range(c.hi + 1)}
    diffs = {n: g[n - 1] @ c.d(n) @ inverse_unimodular(g[n]) for n in range(1, c.hi + 1)}
    c2 = ChainComplex(0, c.hi, dict(c.ranks), diffs)
    assert [homology(c, n) for n in range(c.hi + 1)] == [homology(c2, n) for n in range(c.hi + 1)]


def test_homology_of_circle_and_rp2():
    circle = ChainComplex(0, 1, {0: 1, 1: 1}, {1: IntMatrix.zeros(1, 1)})
    assert [str(homology(circle, n)) for n in range(2)] == ["Z", "Z"]
    rp2 = ChainComplex(0, 2, {0: 1, 1: 1, 2: 1}, {1: IntMatrix.zeros(1, 1), 2: IntMatrix.from_dense([[2]])})
    assert [str(homology(rp2, n)) for n in range(3)] == ["Z", "Z/2", "0"]


def test_non_complex_rejected():
    d1 = IntMatrix.from_dense([[1]])
    c = ChainComplex(0, 2, {0: 1, 1: 1, 2: 1}, {1: d1, 2: d1})
    with pytest.raises(ChainComplexError):
        homology(c, 1)
    with pytest.raises(ChainComplexError):
        ChainComplex(0, 1, {0: 2, 1: 1}, {1: d1})


def test_complex_json_round_trip():
    c = ChainComplex(0, 2, {0: 1, 1: 2, 2: 1}, {1: IntMatrix.from_dense([[0, 0]]),
                                                  2: IntMatrix.from_dense([[1], [-1]])})
    c2 = ChainComplex.from_json(c.to_json())
    assert c2.to_json() == c.to_json()
