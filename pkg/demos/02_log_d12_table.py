"""
Vanishing table for the complement of a degree 12 curve
=======================================================

Runs the first pairs of the degree 12 logarithmic table through the full
pipeline and prints one line per pair.  Pass a larger ``--m-max`` for more
of the table (the later pairs reach a few hundred thousand unknowns).
"""
from __future__ import annotations

import argparse

from jetvanish.runner import presets, run_batch

parser = argparse.ArgumentParser()
parser.add_argument("--m-max", type=int, default=6)
args = parser.parse_args()

cases = [c for c in presets()["log-d12"] if c.m <= args.m_max]
print(f"{'m':>3} {'t':>3} {'unknowns':>9}  nullities  verdict")
for row in run_batch(cases):
    print(f"{row['m']:>3} {row['t']:>3} {row['unknowns']:>9}  {str(row['nullities']):<9}  {row['verdict']}")
