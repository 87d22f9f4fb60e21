"""Brute-force reference computations, independent of the library's elimination code."""

import itertools
import math
from fractions import Fraction


def det(rows):
    n = len(rows)
    if n == 0:
        return 1
    total = 0
    for perm in itertools.permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        total += sign * math.prod(rows[i][perm[i]] for i in range(n))
    return total


def determinantal_divisors(rows, ncols):
    """d_k = gcd of all k x k minors, for k = 1.. while nonzero."""
    m = len(rows)
    out = []
    for k in range(1, min(m, ncols) + 1):
        g = 0
        for ri in itertools.combinations(range(m), k):
            for ci in itertools.combinations(range(ncols), k):
                g = math.gcd(g, det([[rows[i][j] for j in ci] for i in ri]))
        if g == 0:
            break
        out.append(g)
    return out


def invariant_factors(rows, ncols):
    d = determinantal_divisors(rows, ncols)
    return [d[0]] + [d[k] // d[k - 1] for k in range(1, len(d))] if d else []


def rational_rank(rows, ncols):
    a = [[Fraction(x) for x in r] for r in rows]
    rank, col = 0, 0
    while rank < len(a) and col < ncols:
        piv = next((i for i in range(rank, len(a)) if a[i][col]), None)
        if piv is None:
            col += 1
            continue
        a[rank], a[piv] = a[piv], a[rank]
        for i in range(len(a)):
            if i != rank and a[i][col]:
                f = a[i][col] / a[rank][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[rank])]
        rank += 1
        col += 1
    return rank


def homology_oracle(ranks, dense_diffs, n):
    """(free rank, torsion) of H_n; dense_diffs[k] is d_k as rows, maps degree k to k-1."""
    d_out = dense_diffs.get(n)
    d_in = dense_diffs.get(n + 1)
    r_out = rational_rank(d_out, ranks[n]) if d_out is not None else 0
    facs = invariant_factors(d_in, ranks[n + 1]) if d_in is not None else []
    return ranks[n] - r_out - len(facs), [f for f in facs if f > 1]
