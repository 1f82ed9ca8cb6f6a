#!/usr/bin/env python3
"""Fleiss' kappa reference values for the agreement tests.

Computed straight from the textbook formula with fractions, independent of
the C++ code. Writes fixtures/agreement/kappa_oracle.json.

Usage: python3 scripts/kappa_oracle.py [repo_root]
"""

import json
import random
import sys
from fractions import Fraction
from pathlib import Path

ROOT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent
CATS = (1, 2, 3)


def fleiss(matrix):
    """matrix: list of items, each a list of ratings (same length)."""
    n = len(matrix[0])
    N = len(matrix)
    counts = [[row.count(c) for c in CATS] for row in matrix]
    p_j = [Fraction(sum(r[j] for r in counts), N * n) for j in range(len(CATS))]
    P_i = [Fraction(sum(x * x for x in r) - n, n * (n - 1)) for r in counts]
    P_bar = sum(P_i) / N
    P_e = sum(p * p for p in p_j)
    if P_e == 1:
        return 1.0
    return float((P_bar - P_e) / (1 - P_e))


def main():
    cases = [
        {"name": "fixed-3x4", "matrix": [[1, 1, 2], [2, 2, 2], [3, 3, 1], [1, 2, 3]]},
        {"name": "unanimous", "matrix": [[1, 1, 1], [3, 3, 3], [2, 2, 2], [3, 3, 3]]},
        {"name": "disjoint", "matrix": [[1, 2, 3], [1, 2, 3], [3, 2, 1]]},
        {"name": "two-raters", "matrix": [[1, 1], [2, 3], [3, 3], [2, 2], [1, 3]]},
        {"name": "five-raters", "matrix": [[1, 1, 1, 2, 2], [3, 3, 3, 3, 1], [2, 2, 1, 2, 2]]},
    ]
    rng = random.Random(615)
    for k in range(20):
        items = rng.randint(3, 30)
        skew = rng.random()
        matrix = []
        for _ in range(items):
            base = rng.choice(CATS)
            matrix.append([base if rng.random() < skew else rng.choice(CATS) for _ in range(3)])
        cases.append({"name": f"random-{k:02d}", "matrix": matrix})
    for c in cases:
        c["kappa"] = fleiss(c["matrix"])
    out = ROOT / "fixtures" / "agreement" / "kappa_oracle.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(cases, indent=1) + "\n")
    print(f"wrote {len(cases)} cases to {out}")


if __name__ == "__main__":
    main()
