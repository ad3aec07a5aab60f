"""
A verified nonzero section on a pure Fermat surface
===================================================

Without the extra monomial the Fermat surface does carry twisted jet
differentials.  Here the certifier finds them exactly over Q, writes a
witness file, and an independent check re-verifies every divisibility
condition in integer arithmetic.  Breaking one coefficient breaks it.
"""
from __future__ import annotations

import tempfile
from pathlib import Path

from jetvanish.runner import CaseConfig, Witness, run_case, verify_witness

cfg = CaseConfig("compact", 11, 3, 1, deformation=[], mode="witness")
out = Path(tempfile.mkdtemp()) / "fermat.witness.json"
report = run_case(cfg, witness_path=out)
print("verdict:", report.verdict, "exit code", report.exit_code)
print("nullity per prime:", [r["nullity"] for r in report.data["per_prime"]])

witness = Witness.load(out)
first = witness.rendered[0]
for name, poly in sorted(first.items()):
    shown = poly if len(poly) < 120 else poly[:117] + "..."
    print(f"  {name} = {shown}")

check = verify_witness(witness, cfg)
print("\nindependent check:", check.status)
print("\n".join(check.transcript[:4]))

# perturb one coefficient of the first vector
vec = dict(witness.vectors[0])
u = min(vec)
vec[u] += 1
broken = Witness(witness.config_hash, witness.num_unknowns, [vec])
print("\nafter changing unknown", u, "->", verify_witness(broken, cfg).status)
