"""Run the localized K-theory pipeline over a grid of truncations and print one line per run.

Both routes are reported where the full route fits the budget, so the
degree-0 agreement can be read off directly.

    python3 scripts/kr_desk.py --dims 1 --degs 1 2 --sizes 0 1
"""

import argparse
import resource

from kdesk.exactlin import LocalizationSpec, render_local
from kdesk.kpipe import Budget, BudgetExceeded, build_fq_vect, k0_via_h1, kr_homology, s_construction


def fmt(groups, ring):
    return [None if g is None else render_local(g, ring) for g in groups]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q", type=int, default=2)
    ap.add_argument("--dims", type=int, nargs="+", default=[1])
    ap.add_argument("--degs", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--sizes", type=int, nargs="+", default=[0, 1])
    ap.add_argument("--rank-bound", type=int, default=1)
    ap.add_argument("--max-deg", type=int, default=1)
    args = ap.parse_args(argv)
    ring = LocalizationSpec.at({2: 2, 3: 3, 4: 2}[args.q])
    for dim in args.dims:
        w = build_fq_vect(args.q, dim)
        for d in args.degs:
            sc = s_construction(w, d)
            print(f"D={dim} d={d}: K_0 via H_1 of the S-construction nerve = {k0_via_h1(w, d, sc=sc)}", flush=True)
            for m in args.sizes:
                trunc = (d, m, args.rank_bound)
                pres = kr_homology(w, args.q, ring, trunc, args.max_deg, route="presentation", sc=sc)
                try:
                    full = kr_homology(w, args.q, ring, trunc, args.max_deg, Budget(), route="full", sc=sc)
                    full_s = f"{fmt(full.groups, ring)} valid<= {full.valid_through} ({full.wall_time:.1f}s)"
                except BudgetExceeded as e:
                    full_s = f"refused: {e}"
                print(f"  m={m}: presentation H_0 = {fmt(pres.groups[:1], ring)[0]}; full {full_s}", flush=True)
    rss = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024
    print(f"peak RSS {rss:.0f} MB")


if __name__ == "__main__":
    main()
