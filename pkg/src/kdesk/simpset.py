"""Truncated simplicial sets and simplicial modules.

Levels follow the usual indexing: an n-simplex has n + 1 vertices and the
nerve of a category has the length-n composable chains in level n.  A
monotone map ``[m] -> [n]`` is a tuple of length m + 1.

A simplex of a ``TruncSimpSet`` is a triple ``(sigma, k, x)``: a surjection
``sigma: [n] -> [k]`` and the index x of a nondegenerate k-simplex.  Only
nondegenerate simplices and their faces are stored.
"""

from __future__ import annotations

import itertools
import json
from functools import lru_cache
from typing import Hashable, Sequence

from .exactlin import ChainComplex, IntMatrix, inverse_unimodular, kernel_basis
from .fincat import FinCat, FunctorData
from .funhom import left_inverse

# ---------------------------------------------------------------------------
# the simplex category


def compose(g: tuple, f: tuple) -> tuple:
    """``g o f`` for monotone maps as tuples."""
    return tuple(g[x] for x in f)


def ident(n: int) -> tuple:
    return tuple(range(n + 1))


def coface(n: int, i: int) -> tuple:
    """``delta_i: [n-1] -> [n]`` skipping i."""
    return tuple(x if x < i else x + 1 for x in range(n))


def codegeneracy(n: int, j: int) -> tuple:
    """``sigma_j: [n+1] -> [n]`` hitting j twice."""
    return tuple(x if x <= j else x - 1 for x in range(n + 2))


def is_surjective(theta: tuple, n: int) -> bool:
    return len(set(theta)) == n + 1


def epi_mono(theta: tuple) -> tuple[tuple, tuple]:
    """Factor ``theta = mu o tau`` with tau surjective and mu injective."""
    image = sorted(set(theta))
    pos = {v: k for k, v in enumerate(image)}
    return tuple(image), tuple(pos[v] for v in theta)


@lru_cache(maxsize=None)
def monotone_maps(m: int, n: int) -> tuple:
    """All monotone maps ``[m] -> [n]`` in lexicographic order."""
    return tuple(t for t in itertools.combinations_with_replacement(range(n + 1), m + 1))


@lru_cache(maxsize=None)
def surjections(n: int, k: int) -> tuple:
    return tuple(t for t in monotone_maps(n, k) if is_surjective(t, k))


def elementary_factorization(theta: tuple, n: int) -> list[tuple]:
    """Cofaces and codegeneracies whose composite (first entry outermost) is theta."""
    mu, tau = epi_mono(theta)
    out = []
    # mu = delta_{i_1} o ... o delta_{i_r}, peeling the largest missing value first
    missing = sorted(set(range(n + 1)) - set(mu), reverse=True)
    size = n
    for i in missing:
        out.append(coface(size, i))
        size -= 1
    # tau: [m] -> [k]; repeated values give codegeneracies
    k = len(mu) - 1
    cur = tau
    degs = []
    while len(cur) - 1 > k:
        j = next(a for a in range(len(cur) - 1) if cur[a] == cur[a + 1])
        # cur = cur' o sigma_j with cur' dropping position j + 1
        degs.append(codegeneracy(len(cur) - 2, j))
        cur = cur[: j + 1] + cur[j + 2:]
    out.extend(reversed(degs))
    return out


def compose_all(maps: Sequence[tuple], m: int) -> tuple:
    out = ident(m)
    for f in reversed(maps):
        out = compose(f, out)
    return out


def delta_category(d: int) -> FinCat:
    """``Delta_{<=d}``: objects ``[0..d]``, all monotone maps."""
    mors = [((m, n, t), m, n) for m in range(d + 1) for n in range(d + 1) for t in monotone_maps(m, n)]
    return FinCat.from_compose(
        list(range(d + 1)),
        mors,
        identity=lambda n: (n, n, ident(n)),
        compose=lambda g, f: (f[0], g[1], compose(g[2], f[2])),
        name=lambda k: f"[{k}]" if isinstance(k, int) else f"{k[0]}>{k[1]}:{''.join(map(str, k[2]))}",
        validate=False,
    )


# ---------------------------------------------------------------------------
# truncated simplicial sets


class SimplicialError(ValueError):
    pass


class TruncSimpSet:
    """Simplicial set stored through level ``d + 1``; homology certified through d.

    ``nd[n]`` lists keys of nondegenerate n-simplices; ``faces[n][x][i]`` is
    the i-th face of ``nd[n][x]`` as a simplex ``(sigma, k, y)``.
    """

    def __init__(self, d: int, nd: Sequence[Sequence[Hashable]], faces, check: bool = True):
        self.d = d
        self.nd = [list(level) for level in nd]
        self.faces = faces
        if len(self.nd) != d + 2:
            raise SimplicialError(f"need levels 0..{d + 1}, got {len(self.nd)}")
        self.valid_through = d
        if check:
            self.check_identities()

    @property
    def top(self) -> int:
        return self.d + 1

    def restrict(self, s: tuple, theta: tuple) -> tuple:
        """``theta^* s`` for ``theta: [m] -> [n]``."""
        sigma, k, x = s
        st = compose(sigma, theta)
        mu, tau = epi_mono(st)
        if len(mu) == k + 1:
            return (tau, k, x)
        # mu misses some i: mu = delta_i o mu'
        i = next(v for v in range(k + 1) if v not in mu)
        mu2 = tuple(v if v < i else v - 1 for v in mu)
        f = self.faces[k][x][i]
        inner = self.restrict(f, mu2)
        return (compose(inner[0], tau), inner[1], inner[2])

    def face(self, s: tuple, i: int) -> tuple:
        n = len(s[0]) - 1
        return self.restrict(s, coface(n, i))

    def degen(self, s: tuple, j: int) -> tuple:
        return (compose(s[0], codegeneracy(len(s[0]) - 1, j)), s[1], s[2])

    def nondegenerate(self, n: int, x: int) -> tuple:
        return (ident(n), n, x)

    def simplices(self, n: int) -> list[tuple]:
        """All n-simplices (degenerate included), ordered by (k, sigma, x)."""
        out = []
        for k in range(n + 1):
            for sigma in surjections(n, k):
                for x in range(len(self.nd[k])):
                    out.append((sigma, k, x))
        return out

    def count(self, n: int) -> int:
        return sum(len(surjections(n, k)) * len(self.nd[k]) for k in range(n + 1))

    def check_identities(self) -> None:
        """Simplicial identities on every stored simplex."""
        for n in range(1, self.top + 1):
            for x in range(len(self.nd[n])):
                for i in range(n + 1):
                    f = self.faces[n][x][i]
                    if len(f[0]) != n or not is_surjective(f[0], f[1]):
                        raise SimplicialError(f"face {i} of {self.nd[n][x]!r} is malformed")
        for n in range(0, self.top + 1):
            for s in self.simplices(n):
                for i in range(n + 1):
                    for j in range(i + 1, n + 1):
                        if n >= 2 and self.face(self.face(s, j), i) != self.face(self.face(s, i), j - 1):
                            raise SimplicialError(f"d_{i} d_{j} != d_{j - 1} d_{i} on {s}")
                if n + 1 > self.top:
                    continue
                for j in range(n + 1):
                    t = self.degen(s, j)
                    for i in range(n + 2):
                        lhs = self.face(t, i)
                        if i in (j, j + 1):
                            rhs = s
                        elif i < j:
                            rhs = self.degen(self.face(s, i), j - 1) if n >= 1 else None
                        else:
                            rhs = self.degen(self.face(s, i - 1), j) if n >= 1 else None
                        if rhs is not None and lhs != rhs:
                            raise SimplicialError(f"d_{i} s_{j} identity fails on {s}")

    def to_json(self) -> dict:
        return {
            "dim": self.d,
            "valid_through": self.valid_through,
            "nondegenerate": [[_key(k) for k in level] for level in self.nd],
            "faces": [
                [[[list(f[0]), f[1], f[2]] for f in fs] for fs in self.faces[n]] if n else []
                for n in range(self.top + 1)
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TruncSimpSet":
        d = obj["dim"]
        nd = obj["nondegenerate"]
        faces = [[[(tuple(f[0]), f[1], f[2]) for f in fs] for fs in level] for level in obj["faces"]]
        return cls(d, nd, faces)


def _key(k):
    return k if isinstance(k, (str, int)) else list(k)


def from_vertices(d: int, top_simplices: Sequence[Sequence[int]]) -> TruncSimpSet:
    """Simplicial set of an ordered simplicial complex given by its facets."""
    simp = set()
    for t in top_simplices:
        t = tuple(sorted(t))
        for r in range(1, len(t) + 1):
            simp.update(itertools.combinations(t, r))
    nd = [sorted(s for s in simp if len(s) == n + 1) for n in range(d + 2)]
    idx = [{s: k for k, s in enumerate(level)} for level in nd]
    faces = [[] for _ in range(d + 2)]
    for n in range(1, d + 2):
        for s in nd[n]:
            faces[n].append([(ident(n - 1), n - 1, idx[n - 1][s[:i] + s[i + 1:]]) for i in range(n + 1)])
    return TruncSimpSet(d, nd, faces)


def points(d: int, k: int) -> TruncSimpSet:
    return from_vertices(d, [(i,) for i in range(k)])


def triangle_boundary(d: int = 2) -> TruncSimpSet:
    return from_vertices(d, [(0, 1), (1, 2), (0, 2)])


# ---------------------------------------------------------------------------
# nerves


def _chain_simplex(c: FinCat, chain: tuple, start: int, idx) -> tuple:
    """A chain of n morphisms (identities allowed) as ``(sigma, k, x)``."""
    sigma = [0]
    kept = []
    for m in chain:
        if c.is_identity(m):
            sigma.append(sigma[-1])
        else:
            sigma.append(sigma[-1] + 1)
            kept.append(m)
    k = len(kept)
    key = tuple(kept) if k else (start,)
    return (tuple(sigma), k, idx[k][key])


def nerve(c: FinCat, d: int) -> TruncSimpSet:
    """Nerve stored through level d + 1; nondegenerate simplices are identity-free chains."""
    nd = [c.chains(n) for n in range(d + 2)]
    idx = [{ch: k for k, ch in enumerate(level)} for level in nd]
    faces: list = [[]]
    for n in range(1, d + 2):
        lv = []
        for ch in nd[n]:
            fs = []
            for i in range(n + 1):
                if i == 0:
                    new, start = ch[1:], c.tgt[ch[0]]
                elif i == n:
                    new, start = ch[:-1], c.src[ch[0]]
                else:
                    new = ch[: i - 1] + (c.compose(ch[i], ch[i - 1]),) + ch[i + 1:]
                    start = c.src[ch[0]]
                fs.append(_chain_simplex(c, new, start, idx))
            lv.append(fs)
        faces.append(lv)
    return TruncSimpSet(d, nd, faces, check=False)


def chains(x: TruncSimpSet, ring=None) -> ChainComplex:
    """Normalized chain complex in degrees ``0..d+1`` (homology valid through d).

    The ring tag is applied by localizing homology afterwards; the complex
    itself is integral.
    """
    ranks = {n: len(x.nd[n]) for n in range(x.top + 1)}
    diffs = {}
    for n in range(1, x.top + 1):
        acc: dict[tuple[int, int], int] = {}
        for j in range(len(x.nd[n])):
            for i in range(n + 1):
                sigma, k, y = x.faces[n][j][i]
                if k == n - 1:
                    acc[(y, j)] = acc.get((y, j), 0) + (-1 if i % 2 else 1)
        diffs[n] = IntMatrix.from_triplets(ranks[n - 1], ranks[n], [(a, b, v) for (a, b), v in acc.items()])
    return ChainComplex(0, x.top, ranks, diffs, valid_through=x.d)


def tot_of_simpset(x: TruncSimpSet) -> tuple[FinCat, FunctorData]:
    """Category of simplices over ``Delta_{<=d}``: objects ``([n], s)``, maps theta with ``theta^* t = s``."""
    d = x.d
    objs = [(n, s) for n in range(d + 1) for s in x.simplices(n)]
    mors = []
    for m in range(d + 1):
        for t in x.simplices(m):
            for n in range(d + 1):
                for theta in monotone_maps(n, m):
                    mors.append(((theta, m, t), (n, x.restrict(t, theta)), (m, t)))
    tot = FinCat.from_compose(
        objs,
        mors,
        identity=lambda o: (ident(o[0]), o[0], o[1]),
        compose=lambda g, f: (compose(g[0], f[0]), g[1], g[2]),
        name=lambda k: str(k),
        validate=False,
    )
    dc = delta_category(d)
    proj = FunctorData(
        tot,
        dc,
        [o[0] for o in objs],
        [dc.mor_index((len(k[0]) - 1, k[1], k[0])) for k in tot.mor_data],
        check=False,
    )
    return tot, proj


# ---------------------------------------------------------------------------
# simplicial modules


class SimpModule:
    """Simplicial free module through level ``top``: face and degeneracy matrices."""

    def __init__(self, ranks: Sequence[int], faces: dict, degens: dict, check: bool = True):
        self.ranks = list(ranks)
        self.top = len(self.ranks) - 1
        self.faces = faces  # faces[n][i]: rank(n-1) x rank(n)
        self.degens = degens  # degens[n][j]: rank(n+1) x rank(n)
        if check:
            self.check_identities()

    def d(self, n, i) -> IntMatrix:
        return self.faces[n][i]

    def s(self, n, j) -> IntMatrix:
        return self.degens[n][j]

    def restrict_matrix(self, theta: tuple, n: int) -> IntMatrix:
        """Matrix of ``theta^*: M_n -> M_m`` for ``theta: [m] -> [n]``."""
        m = len(theta) - 1
        mat = IntMatrix.identity(self.ranks[n])
        size = n
        for e in elementary_factorization(theta, n):
            src = len(e) - 1
            if src < size:  # coface delta_i: [size-1] -> [size]
                i = next(v for v in range(size + 1) if v not in e)
                mat = self.faces[size][i] @ mat
            else:  # codegeneracy sigma_j: [size+1] -> [size]
                j = next(v for v in range(size + 1) if e[v] == e[v + 1])
                mat = self.degens[size][j] @ mat
            size = src
        assert size == m
        return mat

    def check_identities(self) -> None:
        n_top = self.top
        for n in range(2, n_top + 1):
            for i in range(n + 1):
                for j in range(i + 1, n + 1):
                    if self.d(n - 1, i) @ self.d(n, j) != self.d(n - 1, j - 1) @ self.d(n, i):
                        raise SimplicialError(f"d_{i} d_{j} identity fails at level {n}")
        for n in range(0, n_top):
            for j in range(n + 1):
                sj = self.s(n, j)
                for i in range(n + 2):
                    lhs = self.d(n + 1, i) @ sj
                    if i in (j, j + 1):
                        rhs = IntMatrix.identity(self.ranks[n])
                    elif n == 0:
                        continue
                    elif i < j:
                        rhs = self.s(n - 1, j - 1) @ self.d(n, i)
                    else:
                        rhs = self.s(n - 1, j) @ self.d(n, i - 1)
                    if lhs != rhs:
                        raise SimplicialError(f"d_{i} s_{j} identity fails at level {n}")
            if n + 1 < n_top:
                for i in range(n + 1):
                    for j in range(i, n + 1):
                        if self.s(n + 1, i) @ self.s(n, j) != self.s(n + 1, j + 1) @ self.s(n, i):
                            raise SimplicialError(f"s_{i} s_{j} identity fails at level {n}")


def free_module(x: TruncSimpSet) -> tuple[SimpModule, list[list[tuple]]]:
    """``Z[X]`` with all simplices (degenerate included) as basis, and the bases."""
    bases = [x.simplices(n) for n in range(x.top + 1)]
    pos = [{s: k for k, s in enumerate(b)} for b in bases]
    faces, degens = {}, {}
    for n in range(1, x.top + 1):
        faces[n] = [
            IntMatrix.from_triplets(len(bases[n - 1]), len(bases[n]),
                                    [(pos[n - 1][x.face(s, i)], k, 1) for k, s in enumerate(bases[n])])
            for i in range(n + 1)
        ]
    for n in range(x.top):
        degens[n] = [
            IntMatrix.from_triplets(len(bases[n + 1]), len(bases[n]),
                                    [(pos[n + 1][x.degen(s, j)], k, 1) for k, s in enumerate(bases[n])])
            for j in range(n + 1)
        ]
    return SimpModule([len(b) for b in bases], faces, degens, check=False), bases


# ---------------------------------------------------------------------------
# Dold-Kan


class DoldKanError(ValueError):
    pass


def _dk_blocks(e: ChainComplex, n: int):
    """Basis blocks of ``D(E)_n``: one per surjection ``[n] -> [k]``, holding E_k."""
    blocks, off = [], 0
    for k in range(0, min(n, e.hi) + 1):
        for sigma in surjections(n, k):
            blocks.append((sigma, k, off))
            off += e.rank(k)
    return blocks, off


def dk_restrict(e: ChainComplex, theta: tuple, n: int) -> IntMatrix:
    """``theta^*: D(E)_n -> D(E)_m``.

    On the summand of ``sigma: [n] -> [k]``, factor ``sigma o theta = mu o tau``.
    If mu is the identity the value lands in the tau summand; if mu is
    ``delta_0`` it lands there after applying the differential; otherwise 0.
    """
    m = len(theta) - 1
    src, ns = _dk_blocks(e, n)
    tgt, nt = _dk_blocks(e, m)
    tpos = {(sigma, k): off for sigma, k, off in tgt}
    trip = []
    for sigma, k, off in src:
        mu, tau = epi_mono(compose(sigma, theta))
        j = len(mu) - 1
        if j == k:
            o2 = tpos[(tau, j)]
            for a in range(e.rank(k)):
                trip.append((o2 + a, off + a, 1))
        elif j == k - 1 and mu == coface(k, 0):
            o2 = tpos[(tau, j)]
            for r, c, v in e.d(k).items():
                trip.append((o2 + r, off + c, v))
    return IntMatrix.from_triplets(nt, ns, trip)


def dold_kan_D(e: ChainComplex, top: int | None = None) -> SimpModule:
    """Denormalization of a nonnegatively graded complex, levels ``0..top``."""
    if e.lo < 0:
        raise DoldKanError("Dold-Kan needs a complex in nonnegative degrees")
    if e.lo > 0:
        e = ChainComplex(0, e.hi, {n: e.rank(n) for n in range(0, e.hi + 1)},
                         {n: e.d(n) for n in range(1, e.hi + 1)})
    top = e.hi + 1 if top is None else top
    ranks = [_dk_blocks(e, n)[1] for n in range(top + 1)]
    faces = {n: [dk_restrict(e, coface(n, i), n) for i in range(n + 1)] for n in range(1, top + 1)}
    degens = {n: [dk_restrict(e, codegeneracy(n, j), n) for j in range(n + 1)] for n in range(top)}
    return SimpModule(ranks, faces, degens, check=False)


def _degenerate_image(m: SimpModule, n: int) -> IntMatrix:
    if n == 0:
        return IntMatrix.zeros(m.ranks[0], 0)
    return IntMatrix.hstack([m.s(n - 1, j) for j in range(n)], rows=m.ranks[n])


def _quotient_map(deg: IntMatrix) -> IntMatrix:
    """Surjection ``Z^rows -> Z^q`` whose kernel is the (saturated) column span of deg."""
    cols = set()
    aligned = True
    colmap: dict[int, list[tuple[int, int]]] = {}
    for i, j, v in deg.items():
        colmap.setdefault(j, []).append((i, v))
    for j, entries in colmap.items():
        if len(entries) != 1 or abs(entries[0][1]) != 1:
            aligned = False
            break
        cols.add(entries[0][0])
    if aligned:
        keep = [i for i in range(deg.rows) if i not in cols]
        return IntMatrix.from_triplets(len(keep), deg.rows, [(k, i, 1) for k, i in enumerate(keep)])
    return kernel_basis(deg.T).T


def dold_kan_N(m: SimpModule) -> ChainComplex:
    """Normalized complex ``M_n / degenerate``, degrees ``0..top`` (all certified)."""
    qs = [_quotient_map(_degenerate_image(m, n)) for n in range(m.top + 1)]
    secs = [left_inverse(q.T).T for q in qs]  # right inverses of the quotient maps
    ranks = {n: qs[n].rows for n in range(m.top + 1)}
    diffs = {}
    for n in range(1, m.top + 1):
        alt = m.d(n, 0)
        for i in range(1, n + 1):
            alt = alt + m.d(n, i).scale(-1 if i % 2 else 1)
        diffs[n] = qs[n - 1] @ alt @ secs[n]
    return ChainComplex(0, m.top, ranks, diffs)


def moore_section(m: SimpModule, n: int) -> IntMatrix:
    """Inclusion ``N_n -> M_n`` onto ``ker d_1 cap ... cap ker d_n``, inverse to the quotient there."""
    q = _quotient_map(_degenerate_image(m, n))
    if n == 0:
        moore = IntMatrix.identity(m.ranks[0])
    else:
        stacked = IntMatrix.vstack([m.d(n, i) for i in range(1, n + 1)], cols=m.ranks[n])
        moore = kernel_basis(stacked)
    qk = q @ moore
    if qk.rows != qk.cols:
        raise DoldKanError(f"normalized and Moore complexes differ in rank at level {n}")
    return moore @ inverse_unimodular(qk)


def dk_comparison(m: SimpModule) -> tuple[ChainComplex, list[IntMatrix]]:
    """The isomorphism ``D(N(M)) -> M`` levelwise, with ``N(M)``.

    The summand of ``sigma: [n] -> [k]`` maps by ``sigma^*`` composed with the
    Moore section at level k.
    """
    nm = dold_kan_N(m)
    sections = [moore_section(m, k) for k in range(m.top + 1)]
    out = []
    for n in range(m.top + 1):
        blocks, total = _dk_blocks(nm, n)
        cols = []
        for sigma, k, off in blocks:
            cols.append(m.restrict_matrix(sigma, k) @ sections[k])
        out.append(IntMatrix.hstack(cols, rows=m.ranks[n]) if cols else IntMatrix.zeros(m.ranks[n], 0))
    return nm, out


def is_simplicial_map(a: SimpModule, b: SimpModule, maps: Sequence[IntMatrix]) -> bool:
    top = min(a.top, b.top)
    for n in range(1, top + 1):
        for i in range(n + 1):
            if maps[n - 1] @ a.d(n, i) != b.d(n, i) @ maps[n]:
                return False
    for n in range(top):
        for j in range(n + 1):
            if maps[n + 1] @ a.s(n, j) != b.s(n, j) @ maps[n]:
                return False
    return True


# ---------------------------------------------------------------------------
# tautological and assembly maps


def assembly_matrix(e: ChainComplex, n: int) -> IntMatrix:
    """Projection of ``D(E)_n`` onto its identity summand ``E_n``.

    Sending a simplex of D(E) to this component gives the counit chain map
    ``C(D(E)) -> E`` on normalized chains.
    """
    blocks, total = _dk_blocks(e, n)
    for sigma, k, off in blocks:
        if k == n:
            return IntMatrix.from_triplets(e.rank(n), total, [(a, off + a, 1) for a in range(e.rank(n))])
    return IntMatrix.zeros(e.rank(n) if n <= e.hi else 0, total)


def tautological_map(x: TruncSimpSet, e: ChainComplex, phi: dict[int, IntMatrix]) -> list[IntMatrix]:
    """Simplicial map ``u: X -> D(E)`` adjoint to a chain map ``phi: C(X) -> E``.

    Returned as matrices ``Z[X_n] -> D(E)_n`` in the all-simplices basis; the
    image of each simplex is a single element of ``D(E)_n``.  Built as
    ``D(phi) o (D(N(Z[X])) -> Z[X])^{-1}``.
    """
    zx, bases = free_module(x)
    nzx, comp = dk_comparison(zx)
    # N(Z[X]) is indexed like the normalized chains; move phi to that basis
    out = []
    for n in range(x.top + 1):
        inv = inverse_unimodular(comp[n])
        # D(phi) blockwise: summand sigma:[n]->[k] maps N_k(Z[X]) -> E_k by phi_k o (N_k -> C_k)
        src_blocks, ns = _dk_blocks(nzx, n)
        tgt_blocks, nt = _dk_blocks(e, n)
        tpos = {(s, k): off for s, k, off in tgt_blocks}
        trip = []
        for sigma, k, off in src_blocks:
            if k > e.hi:
                continue
            sec = moore_section(zx, k)
            # N_k(Z[X]) -> normalized chains C_k: keep nondegenerate coordinates
            to_c = _nd_projection(bases[k], k) @ sec
            blk = phi[k] @ to_c
            o2 = tpos[(sigma, k)]
            for i, j, v in blk.items():
                trip.append((o2 + i, off + j, v))
        dphi = IntMatrix.from_triplets(nt, ns, trip)
        out.append(dphi @ inv)
    return out


def _nd_projection(basis: list[tuple], k: int) -> IntMatrix:
    """Coordinates of the nondegenerate simplices among all k-simplices."""
    trip = []
    for col, (sigma, kk, x) in enumerate(basis):
        if kk == k:
            trip.append((x, col, 1))
    n_nd = sum(1 for s in basis if s[1] == k)
    return IntMatrix.from_triplets(n_nd, len(basis), trip)


def dumps_simpset(x: TruncSimpSet) -> str:
    return json.dumps(x.to_json(), sort_keys=True)
