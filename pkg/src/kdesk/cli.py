"""Command-line driver: ``kdesk {homology,nerve,tor,hgamma,kzero,kr,selftest}``.

Reports are JSON with sorted keys and fixed enumeration orders, so a fixed
config gives byte-identical output.  Wall-clock time is only written when
``--timing`` is passed.  ``KDESK_THREADS`` bounds the worker pool used for
tower rows (default 1, i.e. in-process).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .exactlin import FgAbGroup, LocalizationSpec, homology, localize, render_local
from .fincat import CategoryError, FinCat
from .funhom import CoeffFunctor, FunctorError, cat_homology, tor
from .kpipe import BudgetExceeded
from .simpset import chains, nerve

FIXTURES = Path(__file__).parent / "fixtures"
THREADS_ENV = "KDESK_THREADS"


class SchemaError(ValueError):
    pass


class BudgetRefused(RuntimeError):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    ring: str = "Z"
    max_deg: int = 0
    out: str | None = None
    threads: int = 1
    timing: bool = False


# ---------------------------------------------------------------------------
# input


def parse_ring(text: str) -> LocalizationSpec:
    t = text.strip().replace(" ", "")
    if t in ("Z", "integers"):
        return LocalizationSpec.integers()
    if t in ("Q", "rationals"):
        return LocalizationSpec.rationals()
    for pre in ("Z_(", "Z("):
        if t.startswith(pre) and t.endswith(")"):
            return LocalizationSpec.at(int(t[len(pre):-1]))
    if t.isdigit():
        return LocalizationSpec.at(int(t))
    raise argparse.ArgumentTypeError(f"ring must be Z, Q, Z_(p) or a prime, not {text!r}")


def load_json(path) -> object:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None


def _expect(cond, path, where, msg):
    if not cond:
        raise SchemaError(f"{path}: field {where}: {msg}")


def check_category_schema(obj, path="<input>"):
    _expect(isinstance(obj, dict), path, "$", "expected an object")
    for key in ("objects", "morphisms", "identities", "composition"):
        _expect(key in obj, path, key, "missing")
        _expect(isinstance(obj[key], list), path, key, "expected a list")
    for i, o in enumerate(obj["objects"]):
        _expect(isinstance(o, (str, int)), path, f"objects[{i}]", "expected a name")
    for i, m in enumerate(obj["morphisms"]):
        _expect(isinstance(m, dict), path, f"morphisms[{i}]", "expected an object")
        for key in ("name", "src", "tgt"):
            _expect(key in m, path, f"morphisms[{i}].{key}", "missing")
    for i, c in enumerate(obj["composition"]):
        _expect(isinstance(c, list) and len(c) == 3, path, f"composition[{i}]", "expected [g, f, g o f]")


def load_category(path) -> FinCat:
    obj = load_json(path)
    check_category_schema(obj, path)
    try:
        c = FinCat.from_json(obj)
        c.validate()
    except CategoryError as e:
        raise CategoryError(f"{path}: {e}") from None
    return c


def load_coeff(path, base: FinCat | None = None) -> CoeffFunctor:
    obj = load_json(path)
    _expect(isinstance(obj, dict), path, "$", "expected an object")
    for key in ("base", "variance", "ranks", "actions"):
        _expect(key in obj, path, key, "missing")
    if isinstance(obj["base"], dict):
        check_category_schema(obj["base"], f"{path}: base")
        inline = FinCat.from_json(obj["base"])
        if base is None:
            base = inline
        elif inline.to_json() != base.to_json():
            raise SchemaError(f"{path}: field base: differs from the category it is paired with")
    _expect(base is not None, path, "base", "a reference needs a category given elsewhere")
    try:
        return CoeffFunctor.from_json(obj, base)
    except FunctorError as e:
        raise FunctorError(f"{path}: {e}") from None


# ---------------------------------------------------------------------------
# budgets


def chain_counts(c: FinCat, top: int, weights=None) -> list[int]:
    """Number of identity-free chains of length 0..top, each weighted by a rank at its start."""
    w = weights or [1] * c.n_obj
    ends = list(w)  # weighted count of chains ending at each object
    out = [sum(ends)]
    adj = [[0] * c.n_obj for _ in range(c.n_obj)]
    for f in range(c.n_mor):
        if not c.is_identity(f):
            adj[c.src[f]][c.tgt[f]] += 1
    for _ in range(top):
        ends = [sum(ends[x] * adj[x][y] for x in range(c.n_obj)) for y in range(c.n_obj)]
        out.append(sum(ends))
    return out


def preflight(what: str, estimate: int, limit: int):
    if estimate > limit:
        raise BudgetRefused(f"{what}: estimated {estimate} exceeds the limit {limit}")


# ---------------------------------------------------------------------------
# reports


def group_entry(g: FgAbGroup, ring: LocalizationSpec) -> dict:
    return {"group": render_local(g, ring), "free_rank": g.free_rank, "torsion": list(g.torsion)}


def dumps_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise SystemExit(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def _pool_map(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(threads, len(items))) as ex:
        return list(ex.map(fn, items))


def cmd_homology(cfg: RunConfig) -> dict:
    ring = parse_ring(cfg.ring)
    c = load_category(cfg.inputs[0])
    coeff_path = cfg.inputs[1] if len(cfg.inputs) > 1 else None
    e = load_coeff(coeff_path, c) if coeff_path else CoeffFunctor.constant(c, "co", 1, ring)
    if e.variance != "co":
        raise FunctorError("homology coefficients must be covariant")
    e.ring = ring
    weights = [e.rank(x) for x in range(c.n_obj)]
    bar = chain_counts(c, cfg.max_deg + 1, weights)
    preflight("bar complex rank", max(bar), cfg.params["max_bar_rank"])
    groups = cat_homology(c, e, cfg.max_deg, method=cfg.params["method"])
    constant_rank = _constant_rank(e)
    if constant_rank is not None:
        cc = chains(nerve(c, cfg.max_deg))
        via_nerve = []
        for n in range(cfg.max_deg + 1):
            h = homology(cc, n)
            via_nerve.append(localize(FgAbGroup.from_cyclic(h.free_rank * constant_rank,
                                                            list(h.torsion) * constant_rank), ring))
        if via_nerve != groups:
            raise RuntimeError(f"nerve route disagrees: {[str(g) for g in via_nerve]} vs {[str(g) for g in groups]}")
        check = "agree"
    else:
        check = "skipped: coefficients are not constant"
    return {
        "sizes": {"objects": c.n_obj, "morphisms": c.n_mor, "bar_ranks": bar},
        "groups": [group_entry(g, ring) for g in groups],
        "valid_through": cfg.max_deg,
        "nerve_check": check,
    }


def _constant_rank(e: CoeffFunctor):
    r = e.rank(0) if e.base.n_obj else 0
    if any(e.rank(x) != r for x in range(e.base.n_obj)):
        return None
    from .exactlin import IntMatrix

    ident = IntMatrix.identity(r)
    return r if all(e.act(f) == ident for f in range(e.base.n_mor)) else None


def cmd_nerve(cfg: RunConfig) -> dict:
    ring = parse_ring(cfg.ring)
    c = load_category(cfg.inputs[0])
    d = cfg.max_deg
    counts = chain_counts(c, d + 1)
    preflight("nerve simplices", sum(counts), cfg.params["max_simplices"])
    x = nerve(c, d)
    cc = chains(x)
    return {
        "sizes": {"nondegenerate": [len(x.nd[n]) for n in range(x.top + 1)]},
        "groups": [group_entry(localize(homology(cc, n), ring), ring) for n in range(d + 1)],
        "valid_through": d,
    }


def cmd_tor(cfg: RunConfig) -> dict:
    ring = parse_ring(cfg.ring)
    e = load_coeff(cfg.inputs[0])
    t = load_coeff(cfg.inputs[1], e.base)
    if e.variance != "co" or t.variance != "contra":
        raise FunctorError("tor needs a covariant first and a contravariant second argument")
    e.ring = ring
    bar = chain_counts(e.base, cfg.max_deg + 1, [e.rank(x) for x in range(e.base.n_obj)])
    preflight("bar complex rank", max(bar), cfg.params["max_bar_rank"])
    groups = tor(e, t, cfg.max_deg, method=cfg.params["method"])
    return {
        "sizes": {"objects": e.base.n_obj, "morphisms": e.base.n_mor, "bar_ranks": bar},
        "groups": [group_entry(g, ring) for g in groups],
        "valid_through": cfg.max_deg,
    }


# -- H^Γ ---------------------------------------------------------------------


def gamma_morphism_count(m: int) -> int:
    # pointed maps [a]+ -> [b]+ for a, b <= m
    return sum((b + 1) ** a for a in range(m + 1) for b in range(m + 1))


def _factor(g, name: str):
    from . import gammafam as gf

    if name == "t":
        return gf.reduced_free(g, lazy=True)
    if name == "Sym2 t":
        return gf.symmetric_square(gf.reduced_free(g, lazy=True))
    if name.startswith("R~"):
        return gf.reduced_representable(g, int(name[2:]))
    if name.startswith("R_"):
        return gf.representable_plus(g, int(name[2:]))
    raise SchemaError(f"unknown factor {name!r} (use t, Sym2 t, R~n, R_n)")


def _hgamma_row(args):
    desc, m, max_deg = args
    from . import gammafam as gf

    g = gf.gamma_plus(m)
    if desc["kind"] == "tilde":
        grp = desc["group"]
        mod = FgAbGroup.from_cyclic(int(grp.get("free_rank", 0)), grp.get("torsion", []))
        return m, gf.additivize(gf.tilde(g, mod), max_deg)
    fs = [_factor(g, n) for n in desc["factors"]]
    e = fs[0]
    for f in fs[1:]:
        e = gf.lazy_tensor(e, f)
    return m, gf.h_gamma(e, max_deg)


def load_gamma_module(path) -> dict:
    desc = load_json(path)
    _expect(isinstance(desc, dict), path, "$", "expected an object")
    _expect(desc.get("kind") in ("tilde", "tensor"), path, "kind", "expected 'tilde' or 'tensor'")
    if desc["kind"] == "tilde":
        _expect(isinstance(desc.get("group"), dict), path, "group", "expected {free_rank, torsion}")
    else:
        fs = desc.get("factors")
        _expect(isinstance(fs, list) and fs, path, "factors", "expected a nonempty list of factor names")
    return desc


def cmd_hgamma(cfg: RunConfig) -> dict:
    desc = load_gamma_module(cfg.inputs[0])
    ms = cfg.params["m"]
    for m in ms:
        preflight(f"Γ₊ truncation m={m} morphisms", gamma_morphism_count(m), cfg.params["max_morphisms"])
    if desc["kind"] == "tilde" and desc["group"].get("torsion") and cfg.max_deg > 0:
        raise FunctorError("higher H^Γ needs a free-valued module")
    rows = _pool_map(_hgamma_row, [(desc, m, cfg.max_deg) for m in ms], cfg.threads)
    ring = LocalizationSpec.integers()
    towers = {f"H{i}": {str(m): render_local(gs[i], ring) for m, gs in rows} for i in range(cfg.max_deg + 1)}
    return {
        "module": desc,
        "sizes": {str(m): {"objects": m + 1, "morphisms": gamma_morphism_count(m)} for m in ms},
        "towers": towers,
        "valid_through": cfg.max_deg,
    }


# -- K-theory ----------------------------------------------------------------


def _kzero_row(args):
    from . import kpipe

    q, dim, d, ring_text = args
    ring = parse_ring(ring_text)
    w = kpipe.zero_waldhausen() if q == 0 else kpipe.build_fq_vect(q, dim)
    sc = kpipe.s_construction(w, d)
    h1 = kpipe.k0_via_h1(w, d, ring, sc=sc)
    return (dim, d), h1, {"objects": sc.sc.n_obj, "morphisms": sc.sc.n_mor}


def cmd_kzero(cfg: RunConfig) -> dict:
    from . import kpipe

    ring = parse_ring(cfg.ring)
    p = cfg.params
    q = 0 if p["zero"] else p["q"]
    dims = [0] if p["zero"] else p["dim_bound"]
    for d in p["nerve_deg"]:
        if not 1 <= d <= 4:
            raise BudgetRefused(f"S-construction nerve degree {d} is outside 1..4")
    rows = _pool_map(_kzero_row, [(q, dim, d, cfg.ring) for dim in dims for d in p["nerve_deg"]], cfg.threads)
    key = "zero" if p["zero"] else "D={},d={}"
    values = {("zero,d=%d" % k[1]) if p["zero"] else key.format(*k): render_local(h, ring) for k, h, _ in rows}
    sizes = {("zero,d=%d" % k[1]) if p["zero"] else key.format(*k): s for k, _, s in rows}
    return {"sizes": sizes, "towers": {"K0": values}, "target": "Z", "note": kpipe.K0_NOTE, "valid_through": 1}


def _kr_row(args):
    from . import kpipe

    q, ring_text, dim, d, m, r, max_deg, budget, route = args
    ring = parse_ring(ring_text)
    w = kpipe.build_fq_vect(q, dim)
    res = kpipe.kr_homology(w, q, ring, (d, m, r), max_deg, kpipe.Budget(**budget), route=route)
    res.groups = [None if g is None else render_local(g, ring) for g in res.groups]
    return (dim, d), res


def cmd_kr(cfg: RunConfig) -> dict:
    from . import kpipe

    p = cfg.params
    ring = LocalizationSpec.at(p["p"])
    if ring.p != kpipe._char(p["q"]):
        raise ValueError(f"--p must be the characteristic of F_{p['q']}")
    budget = {"max_objects": p["max_objects"], "max_morphisms": p["max_morphisms"]}
    args = [(p["q"], str(ring), dim, d, p["set_size"], p["rank_bound"], cfg.max_deg, budget, p["route"])
            for dim in p["dim_bound"] for d in p["nerve_deg"]]
    rows = _pool_map(_kr_row, args, cfg.threads)
    towers = {f"H{i}": {f"D={dim},d={d}": res.groups[i] for (dim, d), res in rows} for i in range(cfg.max_deg + 1)}
    return {
        "params": dict(p, ring=str(ring), max_deg=cfg.max_deg),
        "sizes": {f"D={dim},d={d}": dict(res.sizes, route=res.route) for (dim, d), res in rows},
        "towers": towers,
        "valid_through": {f"D={dim},d={d}": res.valid_through for (dim, d), res in rows},
        "target": str(ring),
    }


COMMANDS = {
    "homology": cmd_homology,
    "nerve": cmd_nerve,
    "tor": cmd_tor,
    "hgamma": cmd_hgamma,
    "kzero": cmd_kzero,
    "kr": cmd_kr,
}


def run(cfg: RunConfig) -> str:
    t0 = time.perf_counter()
    body = COMMANDS[cfg.command](cfg)
    report = {"command": cfg.command, "config": _config_echo(cfg)}
    report.update(body)
    if cfg.timing:
        report["wall_time"] = round(time.perf_counter() - t0, 3)
    return dumps_report(report)


def _config_echo(cfg: RunConfig) -> dict:
    echo = asdict(cfg)
    for k in ("out", "threads", "timing", "command"):
        echo.pop(k)
    # file names only, so reports do not depend on where the inputs live
    echo["inputs"] = [Path(p).name for p in cfg.inputs]
    echo["params"].pop("fixtures", None)
    return echo


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kdesk", description="Finite category homology and truncated K-theory.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, max_deg_default=2):
        sp.add_argument("--max-deg", type=int, default=max_deg_default)
        sp.add_argument("--out", help="write the JSON report here instead of stdout")
        sp.add_argument("--timing", action="store_true", help="include wall_time (breaks byte-identity)")

    sp = sub.add_parser("homology", help="H_*(C, E) of a finite category")
    sp.add_argument("category")
    sp.add_argument("--coeff", help="covariant coefficient functor (JSON)")
    sp.add_argument("--ring", default="Z")
    sp.add_argument("--method", choices=("bar", "resolution"), default="bar")
    sp.add_argument("--max-bar-rank", type=int, default=2_000_000)
    common(sp, 3)

    sp = sub.add_parser("nerve", help="homology of the nerve, truncated")
    sp.add_argument("category")
    sp.add_argument("--ring", default="Z")
    sp.add_argument("--max-simplices", type=int, default=2_000_000)
    common(sp, 3)

    sp = sub.add_parser("tor", help="Tor over a finite category")
    sp.add_argument("covariant")
    sp.add_argument("contravariant")
    sp.add_argument("--ring", default="Z")
    sp.add_argument("--method", choices=("bar", "resolution"), default="bar")
    sp.add_argument("--max-bar-rank", type=int, default=2_000_000)
    common(sp, 2)

    sp = sub.add_parser("hgamma", help="H^Γ towers over truncations of Γ₊")
    sp.add_argument("module")
    sp.add_argument("--m", type=int, nargs="+", default=[2, 3, 4])
    sp.add_argument("--max-morphisms", type=int, default=200_000)
    common(sp, 0)

    sp = sub.add_parser("kzero", help="K_0 read off the first homology of the S-construction nerve")
    sp.add_argument("--zero", action="store_true", help="use the category with only a zero object")
    sp.add_argument("--q", type=int, default=2, choices=(2, 3, 4))
    sp.add_argument("--dim-bound", type=int, nargs="+", default=[1])
    sp.add_argument("--nerve-deg", type=int, nargs="+", default=[2])
    sp.add_argument("--ring", default="Z")
    common(sp, 1)

    sp = sub.add_parser("kr", help="localized K-theory model over the truncated total category")
    sp.add_argument("--q", type=int, default=2, choices=(2, 3, 4))
    sp.add_argument("--p", type=int, default=2)
    sp.add_argument("--dim-bound", type=int, nargs="+", default=[1])
    sp.add_argument("--nerve-deg", type=int, nargs="+", default=[2])
    sp.add_argument("--set-size", type=int, default=1)
    sp.add_argument("--rank-bound", type=int, default=1)
    sp.add_argument("--route", choices=("auto", "full", "presentation"), default="auto")
    sp.add_argument("--max-objects", type=int, default=20_000)
    sp.add_argument("--max-morphisms", type=int, default=400_000)
    common(sp, 1)

    sp = sub.add_parser("selftest", help="fixtures, golden reports and the acceptance battery")
    sp.add_argument("--fixtures", default=str(FIXTURES), help="fixtures directory")
    sp.add_argument("--only", type=int, nargs="*", help="acceptance criteria to run (default all)")
    sp.add_argument("--no-acceptance", action="store_true")
    sp.add_argument("--invariants", action="store_true", help="also run the property-test suite via pytest")
    return ap


def config_from_args(ns) -> RunConfig:
    cmd = ns.command
    skip = {"command", "max_deg", "out", "timing", "ring", "category", "coeff", "covariant", "contravariant",
            "module"}
    params = {k: v for k, v in vars(ns).items() if k not in skip}
    if cmd in ("homology", "nerve"):
        inputs = [ns.category] + ([ns.coeff] if getattr(ns, "coeff", None) else [])
    elif cmd == "tor":
        inputs = [ns.covariant, ns.contravariant]
    elif cmd == "hgamma":
        inputs = [ns.module]
    else:
        inputs = []
    ring = f"Z_({ns.p})" if cmd == "kr" else getattr(ns, "ring", "Z")
    return RunConfig(cmd, inputs, params, ring, ns.max_deg, ns.out, _threads(), ns.timing)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    if ns.command == "selftest":
        from .selftest import selftest

        return selftest(Path(ns.fixtures), only=ns.only, acceptance=not ns.no_acceptance,
                        invariants=ns.invariants)
    cfg = config_from_args(ns)
    try:
        text = run(cfg)
    except (BudgetRefused, BudgetExceeded) as e:
        print(f"kdesk {cfg.command}: refused: {e}", file=sys.stderr)
        return 2
    except (SchemaError, CategoryError, FunctorError, ValueError, OSError) as e:
        print(f"kdesk {cfg.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
