"""Rewrite the golden reports from the current code (review the diff before committing)."""

import sys
from pathlib import Path

from kdesk.cli import FIXTURES
from kdesk.selftest import load_manifest, render_golden


def main(fixtures=FIXTURES):
    fixtures = Path(fixtures)
    for entry in load_manifest(fixtures)["golden"]:
        out = fixtures / "golden" / f"{entry['name']}.json"
        out.write_text(render_golden(entry, fixtures))
        print("wrote", out)


if __name__ == "__main__":
    main(*sys.argv[1:])
