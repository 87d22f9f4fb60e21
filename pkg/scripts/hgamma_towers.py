"""Print H^Γ towers of pointed tensor products for a range of truncations.

    python3 scripts/hgamma_towers.py --m 2 3 4 5 --max-deg 1
"""

import argparse
import time

from kdesk.acceptance import pointed_fixtures
from kdesk.gammafam import gamma_plus, h_gamma, lazy_tensor


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, nargs="+", default=[2, 3, 4, 5])
    ap.add_argument("--max-deg", type=int, default=1)
    args = ap.parse_args(argv)
    for m in args.m:
        g = gamma_plus(m)
        for name, (a, b) in pointed_fixtures(g).items():
            t0 = time.perf_counter()
            groups = h_gamma(lazy_tensor(a, b), args.max_deg)
            print(f"m={m} {name:10s} {[str(x) for x in groups]}  ({time.perf_counter() - t0:.2f}s)", flush=True)


if __name__ == "__main__":
    main()
