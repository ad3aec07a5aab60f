from __future__ import annotations

import random
from dataclasses import replace

import pytest
import sympy
from sympy import symbols

from jetvanish.ansatz import build_ansatz
from jetvanish.jettrans import (RuleSet, TrackedExpr, debug_dump, numeric_consistency, standard_rules,
                                substitute_first_jet, substitute_wronskian, transition)
from jetvanish.polycore import SparsePoly
from jetvanish.scenario import build_scenario
from oracles import to_sympy
from properties import check_numeric_consistency

Rx, Ry, Rz, Rxx, Rxy, Rxz, Ryy, Ryz, Rzz, R = symbols("Rx Ry Rz Rxx Rxy Rxz Ryy Ryz Rzz R")

# closed forms of the Wronskian tails in terms of the partials of R
COMPACT_TAILS = {
    (0, 0, 1): (-Rz, 1),
    (1, 2, 0): (Rzz * Ry**2 - 2 * Rz * Ryz * Ry + Rz**2 * Ryy, 3),
    (2, 1, 0): (2 * (Rxz * Ry**2 - Rx * Ryz * Ry - Rz * Rxy * Ry + Rx * Rz * Ryy), 3),
    (3, 0, 0): (Rxx * Ry**2 - 2 * Rx * Rxy * Ry + Rx**2 * Ryy, 3),
}
LOG_TAILS = {
    (0, 0, 1): (Ry, 1),
    (0, 3, 0): (R**2 * Rxx - R * Rx**2, 3),
    (1, 2, 0): (2 * R * Rxy * Rx - 2 * R * Ry * Rxx, 3),
    (2, 1, 0): (Ry**2 * Rxx - 2 * Ry * Rxy * Rx + Ryy * Rx**2, 3),
}


def test_compact_wronskian_identity_symbolically():
    x1, z1, x2, z2 = symbols("x1 z1 x2 z2")
    y1 = -(Rx * x1 + Rz * z1) / Ry
    Q = (Rxx * x1**2 + Ryy * y1**2 + Rzz * z1**2
         + 2 * (Rxy * x1 * y1 + Rxz * x1 * z1 + Ryz * y1 * z1))
    y2 = -(Rx * x2 + Rz * z2 + Q) / Ry
    W_yx = y1 * x2 - y2 * x1
    W_zx = z1 * x2 - z2 * x1
    jets = {(0, 0, 1): W_zx, (1, 2, 0): x1 * z1**2, (2, 1, 0): x1**2 * z1, (3, 0, 0): x1**3}
    claim = sum(num / Ry**e * jets[j] for j, (num, e) in COMPACT_TAILS.items())
    assert sympy.simplify(W_yx - claim) == 0


def test_log_wronskian_identity_symbolically():
    L, l2, y1, y2 = symbols("L l2 y1 y2")
    x1 = (R * L - Ry * y1) / Rx
    Q = Rxx * x1**2 + 2 * Rxy * x1 * y1 + Ryy * y1**2
    x2 = (R * (l2 + L**2) - Ry * y2 - Q) / Rx
    D_xR = x1 * l2 - x2 * L
    D_Ry = L * y2 - l2 * y1
    jets = {(0, 0, 1): D_Ry, (0, 3, 0): L**3, (1, 2, 0): y1 * L**2, (2, 1, 0): y1**2 * L}
    claim = sum(num / Rx**e * jets[j] for j, (num, e) in LOG_TAILS.items())
    assert sympy.simplify(D_xR - claim) == 0


def _concrete(spec, expr):
    pack = spec.derivatives
    names = {"Rx": "x", "Ry": "y", "Rz": "z", "Rxx": "xx", "Rxy": "xy", "Rxz": "xz", "Ryy": "yy",
             "Ryz": "yz", "Rzz": "zz"}
    subs = {s: to_sympy(pack[names[s.name]]) for s in expr.free_symbols if s.name in names}
    if R in expr.free_symbols:
        subs[R] = to_sympy(pack.R)
    return sympy.expand(expr.subs(subs))


@pytest.mark.parametrize("case,tails", [("compact", COMPACT_TAILS), ("logarithmic", LOG_TAILS)])
def test_wronskian_rule_matches_closed_form(case, tails):
    spec = build_scenario(case, 7)[0]
    nums, top = substitute_wronskian(spec).as_fractions(spec)
    assert top == (0, 3)
    other = to_sympy(spec.derivatives["y" if spec.is_compact else "x"])
    for jet, (num, e) in tails.items():
        want = _concrete(spec, num * sympy.Symbol("Q") ** (3 - e)).subs(sympy.Symbol("Q"), other)
        assert sympy.expand(to_sympy(nums[jet]) - want) == 0, jet


def test_first_jet_rules():
    spec = build_scenario("compact", 17)[0]
    pack = spec.derivatives
    nums, top = substitute_first_jet(spec).as_fractions(spec)
    assert top == (0, 1)
    assert nums[(1, 0, 0)] == -pack["x"] and nums[(0, 1, 0)] == -pack["z"]
    lspec = build_scenario("logarithmic", 12)[0]
    nums, top = substitute_first_jet(lspec).as_fractions(lspec)
    assert nums[(1, 0, 0)] == -lspec.derivatives["y"] and nums[(0, 1, 0)] == lspec.R


def test_wronskian_coefficient_is_partial_ratio():
    spec = build_scenario("compact", 17)[0]
    w = substitute_wronskian(spec).expansion[(0, 0, 1)]
    assert w.exps == (-1, 1) and w.num == SparsePoly.constant(3, -1)


def test_transition_pole_orders_log_d12():
    spec = build_scenario("logarithmic", 12)[0]
    tr = transition(build_ansatz(spec, 3, 2), spec)
    # required power equals the exponent of L when the families are present
    assert {jet: e.required_power for jet, e in tr.items()} == {
        (0, 3, 0): 3, (1, 2, 0): 2, (2, 1, 0): 1, (3, 0, 0): 0, (0, 0, 1): 0}


def test_transition_pole_orders_compact_d17():
    spec = build_scenario("compact", 17)[0]
    tr = transition(build_ansatz(spec, 3, 3), spec)
    for jet, entry in tr.items():
        assert entry.required_power <= jet[0]
        assert jet[0] + jet[1] + 3 * jet[2] == 3
    assert tr[(3, 0, 0)].required_power == 3
    assert "required_power=3" in debug_dump(tr, spec)


@pytest.mark.parametrize("case", ["compact", "logarithmic"])
@pytest.mark.parametrize("m", [3, 4])
def test_numeric_consistency_d5(case, m):
    good, total = check_numeric_consistency(case, 5, m, 20, seed=m)
    assert good == total


def test_numeric_consistency_zero_assignment():
    spec = build_scenario("compact", 5)[0]
    ans = build_ansatz(spec, 3, 1)
    assert numeric_consistency(spec, ans, {}, trials=3)


@pytest.mark.parametrize("case", ["compact", "logarithmic"])
@pytest.mark.parametrize("jet", [(0, 0, 1), (2, 1, 0)])
def test_sign_flip_in_wronskian_rule_is_caught(case, jet):
    spec = build_scenario(case, 5)[0]
    rules = standard_rules(spec)
    exp = dict(rules.wronskian.expansion)
    exp[jet] = TrackedExpr(-exp[jet].num, exp[jet].exps)
    bad = RuleSet(rules.first_jet, replace(rules.wronskian, expansion=exp))
    ans = build_ansatz(spec, 4, 1)
    rng = random.Random(3)
    assignment = {u: rng.randint(-9, 9) for u in range(ans.num_unknowns)}
    assert numeric_consistency(spec, ans, assignment, trials=3)
    assert not numeric_consistency(spec, ans, assignment, trials=3, tr=transition(ans, spec, bad))


def test_dump_lists_every_target_monomial():
    spec = build_scenario("logarithmic", 5)[0]
    tr = transition(build_ansatz(spec, 3, 1), spec)
    assert debug_dump(tr, spec).count("required_power") == len(tr)
