#!/usr/bin/env python3
"""Regenerate the figure-recipe CSVs consumed by the frontend renderer.

Equivalent to the four CLI invocations kept in recipes/; run this after
changing the engine to refresh the checked-in data.
"""

import pathlib
import sys

from qillum.cli import main

RECIPES = pathlib.Path(__file__).resolve().parent.parent / "recipes"

PANELS = [
    ("fig1a.csv", ["sweep"]),
    ("fig1b.csv", ["ratio"]),
    ("fig2a.csv", ["sweep", "--detector", "pnr"]),
    ("fig2b.csv", ["ratio", "--detector", "pnr"]),
]

for name, argv in PANELS:
    out = RECIPES / name
    code = main(argv + ["--out", str(out)])
    if code != 0:
        sys.exit(code)
    print("wrote", out)

print("render with: cd frontend && npm run render")
