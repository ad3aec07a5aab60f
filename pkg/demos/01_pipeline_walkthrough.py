"""
Pipeline walkthrough on a small surface
=======================================

Every stage of the engine, by hand, on the degree 5 Fermat-type surface
with the default lower-order monomial.  Runs in about a second.
"""
from __future__ import annotations

from jetvanish.ansatz import build_ansatz
from jetvanish.constraints import assemble
from jetvanish.jettrans import debug_dump, standard_rules, transition
from jetvanish.linsolve import nullity
from jetvanish.scenario import build_scenario

# the surface and the partial derivatives the chart change needs
spec, pack = build_scenario("compact", 5)
print("R =", spec.R.to_text())
print("reduction tail (y^d is replaced by this):", spec.reduction_tail.to_text())

# an invariant 2-jet differential of weight 4, twisted by -1, written in the
# source chart with unknown polynomial coefficients
ansatz = build_ansatz(spec, m=4, t=1)
print("\nunknowns per family:", ansatz.family_sizes(), "total", ansatz.num_unknowns)

# the substitution rules for first jets and for the Wronskian
rules = standard_rules(spec)
print("\n" + rules.first_jet.to_text())
print(rules.wronskian.to_text())

# carry the ansatz to the target chart; each target jet monomial gets a
# numerator and a power of the denominator it has to absorb
tr = transition(ansatz, spec)
print("\n" + "\n".join(debug_dump(tr, spec).splitlines()[:12]))

# holomorphy in the target chart = divisibility = linear rows in the unknowns
system = assemble(tr, spec)
for block in system.blocks:
    print(f"block {block.power}: {len(block.rows)} rows ({block.raw_count} before deduplication)")

res = nullity(system, 1000003)
print("\nrank", res.rank, "nullity", res.nullity, "block ranks", res.block_ranks)
print("no nonzero section" if res.nullity == 0 else "kernel is nontrivial mod p")
