"""``kdesk selftest``: fixtures, golden reports, report invariants and the acceptance battery."""

from __future__ import annotations

import json
import os
import subprocess
import sys
from pathlib import Path

from .fincat import CategoryError

NESTED_ENV = "KDESK_SELFTEST_NESTED"


def load_manifest(fixtures: Path) -> dict:
    path = fixtures / "manifest.json"
    if not path.exists():
        return {"categories": sorted(str(p.relative_to(fixtures)) for p in fixtures.glob("categories/*.json")),
                "negative": [], "golden": []}
    return json.loads(path.read_text())


def golden_argv(entry: dict, fixtures: Path) -> list[str]:
    """Fixture-relative input paths are resolved against the fixtures directory."""
    out = []
    for a in entry["argv"]:
        out.append(str(fixtures / a) if a.endswith(".json") else a)
    return out


def render_golden(entry: dict, fixtures: Path) -> str:
    from .cli import build_parser, config_from_args, run

    ns = build_parser().parse_args(golden_argv(entry, fixtures))
    return run(config_from_args(ns))


def lookup(report: dict, dotted: str):
    cur = report
    for part in _split(dotted):
        cur = cur[int(part)] if isinstance(cur, list) else cur[part]
    return cur


def _split(dotted: str) -> list[str]:
    # keys such as "zero,d=2" or "D=1,d=2" never contain dots
    return dotted.split(".")


def valid_through_ok(report: dict) -> bool:
    vt = report.get("valid_through")
    max_deg = report.get("config", {}).get("max_deg", 0)
    if isinstance(vt, dict):
        degs = report["config"]["params"].get("nerve_deg", [])
        return all(v <= min(max_deg, max(_row_deg(k, degs) - 1, 0)) for k, v in vt.items())
    return vt is None or vt <= max_deg


def _row_deg(key: str, degs) -> int:
    for part in key.split(","):
        if part.startswith("d="):
            return int(part[2:])
    return max(degs)


def check_fixtures(fixtures: Path, echo=print) -> bool:
    from .cli import SchemaError, load_category

    if not fixtures.is_dir():
        echo(f"[FAIL] fixtures directory {fixtures} does not exist")
        return False
    ok = True
    man = load_manifest(fixtures)
    listed = set(man.get("categories", []))
    for path in sorted(fixtures.glob("categories/*.json")):
        rel = str(path.relative_to(fixtures))
        try:
            c = load_category(path)
            echo(f"[PASS] fixture {rel}: {c.n_obj} objects, {c.n_mor} morphisms")
        except (CategoryError, SchemaError) as e:
            echo(f"[FAIL] fixture {rel}: {e}")
            ok = False
        listed.discard(rel)
    for rel in sorted(listed):
        echo(f"[FAIL] fixture {rel}: listed in the manifest but missing")
        ok = False
    for neg in man.get("negative", []):
        try:
            load_category(fixtures / neg["file"])
        except (CategoryError, SchemaError) as e:
            good = neg["diagnostic"] in str(e)
            echo(f"[{'PASS' if good else 'FAIL'}] negative fixture {neg['file']} rejected: {e}")
            ok = ok and good
        else:
            echo(f"[FAIL] negative fixture {neg['file']} was accepted")
            ok = False
    return ok


def check_golden(fixtures: Path, echo=print) -> bool:
    ok = True
    for entry in load_manifest(fixtures).get("golden", []):
        name = entry["name"]
        try:
            first = render_golden(entry, fixtures)
            second = render_golden(entry, fixtures)
        except Exception as e:  # report and keep going; failures are the output
            echo(f"[FAIL] golden {name}: {type(e).__name__}: {e}")
            ok = False
            continue
        problems = []
        if first != second:
            problems.append("two runs differ")
        gpath = fixtures / "golden" / f"{name}.json"
        if not gpath.exists():
            problems.append("golden file missing")
        elif gpath.read_text() != first:
            problems.append("differs from the golden report")
        report = json.loads(first)
        if not valid_through_ok(report):
            problems.append("valid_through exceeds the truncation bound")
        for key, want in entry.get("expect", {}).items():
            got = lookup(report, key)
            if got != want:
                problems.append(f"{key} = {got!r}, expected {want!r}")
        echo(f"[{'FAIL' if problems else 'PASS'}] golden {name}" + (": " + "; ".join(problems) if problems else ""))
        ok = ok and not problems
    return ok


def run_invariants(echo=print) -> bool:
    tests = Path(__file__).resolve().parents[2] / "tests"
    if not tests.is_dir():
        echo("[SKIP] invariant suite: tests directory not found next to the package")
        return True
    env = dict(os.environ, **{NESTED_ENV: "1"})
    cmd = [sys.executable, "-m", "pytest", "-q", str(tests), "--ignore", str(tests / "test_acceptance.py")]
    res = subprocess.run(cmd, env=env, capture_output=True, text=True)
    tail = (res.stdout.strip().splitlines() or ["no output"])[-1]
    echo(f"[{'PASS' if res.returncode == 0 else 'FAIL'}] invariant suite: {tail}")
    return res.returncode == 0


def selftest(fixtures: Path, only=None, acceptance: bool = True, invariants: bool = False, echo=print) -> int:
    ok = check_fixtures(fixtures, echo)
    ok = check_golden(fixtures, echo) and ok
    if invariants:
        ok = run_invariants(echo) and ok
    if acceptance:
        from .acceptance import run_all

        verdicts = run_all(only=only, echo=echo)
        ok = ok and all(v.ok for v in verdicts)
    echo(f"selftest: {'OK' if ok else 'FAILED'}")
    return 0 if ok else 1
