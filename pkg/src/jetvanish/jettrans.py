"""Change of affine chart for jet differentials.

The generic section is written where the constrained partial ``P`` is invertible.
Re-expressing it in the jet coordinates of the neighbouring chart (where ``Q``
is invertible) produces, for every target jet monomial ``T``, a coefficient

    N_T / (P^e * Q^f)

and the section extends holomorphically across ``{P = 0}`` exactly when ``P^e``
divides ``N_T`` (in the quotient ring for surfaces).

Denominators are tracked as exponent vectors over the divisors ``(P, Q)``,
with negative entries standing for factors sitting in the numerator.  The
numerator of each target coefficient is kept as a sum of per-family
multipliers, so the unknown coefficients are only touched when rows are
extracted.

Compact surfaces: source symbols ``(x', y', W_yx)``, target ``(x', z', W_zx)``
with ``W_ab = a' b'' - a'' b'``.  Plane-curve complements: source symbols
``(x', L, D_xR)``, target ``(y', L, D_Ry)`` where ``L = R'/R`` and ``D`` is the
logarithmic Wronskian ``D_xR = x' (R'/R)' - x'' R'/R`` (``D_Ry`` likewise).
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from sympy.ntheory.residue_ntheory import nthroot_mod

from .ansatz import Ansatz, JetTermKey, source_denominator_exponent
from .errors import InvariantViolation, SamplingError, UsageError
from .polycore import ParamPoly, SparsePoly
from .scenario import SurfaceSpec, normal_form

JetMonomial = Tuple[int, int, int]

SOURCE_SYMBOLS = {"compact": ("x'", "y'", "W_yx"), "logarithmic": ("x'", "L", "D_xR")}
TARGET_SYMBOLS = {"compact": ("x'", "z'", "W_zx"), "logarithmic": ("y'", "L", "D_Ry")}
DIVISORS = {"compact": ("R_z", "R_y"), "logarithmic": ("R_y", "R_x")}


def divisor_polys(spec: SurfaceSpec) -> Tuple[SparsePoly, ...]:
    pack = spec.derivatives
    if spec.is_compact:
        return pack["z"], pack["y"]
    return pack["y"], pack["x"]


@dataclass(frozen=True)
class TrackedExpr:
    """``num / prod(divisor_i ^ exps_i)``; a negative exponent is a numerator factor."""

    num: SparsePoly
    exps: Tuple[int, ...]


class _DivisorAlgebra:
    """Arithmetic on tracked expressions and jet expansions for one equation."""

    def __init__(self, spec: SurfaceSpec):
        self.spec = spec
        self.divisors = divisor_polys(spec)
        self.nvars = spec.ambient_vars
        self._pow: Dict[Tuple[int, int], SparsePoly] = {}

    def divisor_power(self, index: int, e: int) -> SparsePoly:
        key = (index, e)
        if key not in self._pow:
            if e == 0:
                self._pow[key] = SparsePoly.constant(self.nvars, 1)
            else:
                self._pow[key] = self.divisor_power(index, e - 1) * self.divisors[index]
        return self._pow[key]

    def lift(self, num: SparsePoly, shift: Sequence[int]) -> SparsePoly:
        """``num`` times the product of divisor powers ``shift`` (all nonnegative)."""
        for i, e in enumerate(shift):
            if e:
                num = num * self.divisor_power(i, e)
        return num

    def combine(self, parts: Iterable[TrackedExpr]) -> Optional[TrackedExpr]:
        parts = list(parts)
        if not parts:
            return None
        top = tuple(max(col) for col in zip(*(p.exps for p in parts)))
        total = SparsePoly.zero(self.nvars)
        for p in parts:
            total = total + self.lift(p.num, [a - b for a, b in zip(top, p.exps)])
        if not total:
            return None
        return TrackedExpr(total, top)

    def mul(self, a: TrackedExpr, b: TrackedExpr) -> TrackedExpr:
        return TrackedExpr(a.num * b.num, tuple(x + y for x, y in zip(a.exps, b.exps)))

    def jet_mul(self, A: Mapping[JetMonomial, TrackedExpr],
                B: Mapping[JetMonomial, TrackedExpr]) -> Dict[JetMonomial, TrackedExpr]:
        buckets: Dict[JetMonomial, List[TrackedExpr]] = {}
        for ja, ta in A.items():
            for jb, tb in B.items():
                jet = (ja[0] + jb[0], ja[1] + jb[1], ja[2] + jb[2])
                buckets.setdefault(jet, []).append(self.mul(ta, tb))
        out = {}
        for jet, parts in buckets.items():
            c = self.combine(parts)
            if c is not None:
                out[jet] = c
        return out

    def unit(self) -> Dict[JetMonomial, TrackedExpr]:
        return {(0, 0, 0): TrackedExpr(SparsePoly.constant(self.nvars, 1), (0,) * len(self.divisors))}


@dataclass(frozen=True)
class SubstitutionRule:
    """Expansion of one source jet symbol in target jet monomials."""

    source: str
    expansion: Dict[JetMonomial, TrackedExpr]
    case_kind: str

    def as_fractions(self, spec: SurfaceSpec) -> Tuple[Dict[JetMonomial, SparsePoly], Tuple[int, ...]]:
        """Numerators over one common denominator, with numerator divisor factors multiplied in."""
        alg = _DivisorAlgebra(spec)
        top = tuple(max(0, max(col)) for col in zip(*(t.exps for t in self.expansion.values())))
        nums = {jet: alg.lift(t.num, [a - b for a, b in zip(top, t.exps)])
                for jet, t in self.expansion.items()}
        return nums, top

    def to_text(self) -> str:
        names = TARGET_SYMBOLS[self.case_kind]
        divs = DIVISORS[self.case_kind]
        lines = [f"{self.source} ->"]
        for jet in sorted(self.expansion):
            t = self.expansion[jet]
            jm = " ".join(f"{n}^{e}" for n, e in zip(names, jet) if e)
            den = " ".join(f"{n}^{e}" for n, e in zip(divs, t.exps) if e)
            lines.append(f"  [{jm}] ({t.num.to_text()}) / ({den or '1'})")
        return "\n".join(lines)


def substitute_first_jet(spec: SurfaceSpec) -> SubstitutionRule:
    """Eliminated first-order jet in target coordinates.

    Surfaces: ``y' = (-R_x x' - R_z z') / R_y``.
    Curves: ``x' = (-R_y y' + R L) / R_x``.
    """
    pack = spec.derivatives
    n = spec.ambient_vars
    one = SparsePoly.constant(n, 1)
    if spec.is_compact:
        expansion = {(1, 0, 0): TrackedExpr(-pack["x"], (0, 1)),
                     (0, 1, 0): TrackedExpr(-one, (-1, 1))}
        return SubstitutionRule("y'", expansion, spec.case_kind)
    expansion = {(1, 0, 0): TrackedExpr(-one, (-1, 1)),
                 (0, 1, 0): TrackedExpr(pack.R, (0, 1))}
    return SubstitutionRule("x'", expansion, spec.case_kind)


def substitute_wronskian(spec: SurfaceSpec) -> SubstitutionRule:
    """Source Wronskian in target coordinates: a multiple of the target one plus cubic tails."""
    p = spec.derivatives
    n = spec.ambient_vars
    one = SparsePoly.constant(n, 1)
    if spec.is_compact:
        Rx, Ry, Rz = p["x"], p["y"], p["z"]
        Rxx, Rxy, Rxz, Ryy, Ryz, Rzz = p["xx"], p["xy"], p["xz"], p["yy"], p["yz"], p["zz"]
        zzx = Rzz * Ry * Ry - Rz * Ryz * Ry * 2 + Rz * Rz * Ryy
        zxx = (Rxz * Ry * Ry - Rx * Ryz * Ry - Rz * Rxy * Ry + Rx * Rz * Ryy) * 2
        xxx = Rxx * Ry * Ry - Rx * Rxy * Ry * 2 + Rx * Rx * Ryy
        expansion = {(0, 0, 1): TrackedExpr(-one, (-1, 1)),
                     (1, 2, 0): TrackedExpr(zzx, (0, 3)),
                     (2, 1, 0): TrackedExpr(zxx, (0, 3)),
                     (3, 0, 0): TrackedExpr(xxx, (0, 3))}
        expansion = {j: t for j, t in expansion.items() if t.num}
        return SubstitutionRule("W_yx", expansion, spec.case_kind)
    R, Rx, Ry = p.R, p["x"], p["y"]
    Rxx, Rxy, Ryy = p["xx"], p["xy"], p["yy"]
    lll = R * R * Rxx - R * Rx * Rx
    yll = (R * Rxy * Rx - R * Ry * Rxx) * 2
    yyl = Ry * Ry * Rxx - Ry * Rxy * Rx * 2 + Ryy * Rx * Rx
    expansion = {(0, 0, 1): TrackedExpr(one, (-1, 1)),
                 (0, 3, 0): TrackedExpr(lll, (0, 3)),
                 (1, 2, 0): TrackedExpr(yll, (0, 3)),
                 (2, 1, 0): TrackedExpr(yyl, (0, 3))}
    expansion = {j: t for j, t in expansion.items() if t.num}
    return SubstitutionRule("D_xR", expansion, spec.case_kind)


@dataclass(frozen=True)
class RuleSet:
    first_jet: SubstitutionRule
    wronskian: SubstitutionRule


def standard_rules(spec: SurfaceSpec) -> RuleSet:
    return RuleSet(substitute_first_jet(spec), substitute_wronskian(spec))


@dataclass
class TransitionEntry:
    """Target coefficient ``N / (P^required_power * Q^other)`` with ``N = sum F_key * multiplier``."""

    jet: JetMonomial
    exps: Tuple[int, ...]
    parts: List[Tuple[JetTermKey, SparsePoly]]
    ansatz: Ansatz = field(repr=False)

    @property
    def required_power(self) -> int:
        return self.exps[0]

    @property
    def denominators(self) -> Tuple[int, ...]:
        return self.exps

    @cached_property
    def numerator(self) -> ParamPoly:
        spec = self.ansatz.spec
        total = ParamPoly(spec.ambient_vars)
        for key, mult in self.parts:
            total = total + self.ansatz.terms[key].mul_poly(mult)
        return normal_form(total, spec)

    def specialize(self, coeffs: Mapping[JetTermKey, SparsePoly]) -> SparsePoly:
        """Concrete numerator (normal form) for given family polynomials."""
        spec = self.ansatz.spec
        total = SparsePoly.zero(spec.ambient_vars)
        for key, mult in self.parts:
            F = coeffs.get(key)
            if F:
                total = total + F * mult
        return normal_form(total, spec)


Transition = Dict[JetMonomial, TransitionEntry]


def key_multipliers(ansatz: Ansatz, rules: Optional[RuleSet] = None
                    ) -> Dict[JetTermKey, Dict[JetMonomial, TrackedExpr]]:
    """Target expansion of ``u^a v^b W^k / P^(m-2k)`` for every family member."""
    spec = ansatz.spec
    rules = rules or standard_rules(spec)
    alg = _DivisorAlgebra(spec)
    n = spec.ambient_vars
    one = SparsePoly.constant(n, 1)
    ndiv = len(alg.divisors)
    # kept first-order symbol: x' (compact, target slot 0) or L (curves, slot 1)
    kept_slot = 0 if spec.is_compact else 1

    def power_table(base: Mapping[JetMonomial, TrackedExpr], top: int) -> List[Dict]:
        table = [alg.unit()]
        for _ in range(top):
            table.append(alg.jet_mul(table[-1], base))
        return table

    m = ansatz.m
    elim = power_table(rules.first_jet.expansion, m)
    wron = power_table(rules.wronskian.expansion, m // 3)
    out = {}
    for key in ansatz.keys():
        a, b = key.first_jet_split
        kept_exp, elim_exp = (a, b) if spec.is_compact else (b, a)
        jet0 = [0, 0, 0]
        jet0[kept_slot] = kept_exp
        seed = {tuple(jet0): TrackedExpr(one, (source_denominator_exponent(key, m),) + (0,) * (ndiv - 1))}
        expr = alg.jet_mul(alg.jet_mul(seed, elim[elim_exp]), wron[key.k])
        out[key] = expr
    return out


def transition(ansatz: Ansatz, spec: Optional[SurfaceSpec] = None,
               rules: Optional[RuleSet] = None) -> Transition:
    """Target jet monomial -> entry with lazily built numerator and required power."""
    spec = spec or ansatz.spec
    if spec != ansatz.spec:
        raise UsageError("ansatz was built for a different equation")
    alg = _DivisorAlgebra(spec)
    per_key = key_multipliers(ansatz, rules)
    buckets: Dict[JetMonomial, List[Tuple[JetTermKey, TrackedExpr]]] = {}
    for key, expr in per_key.items():
        for jet, te in expr.items():
            buckets.setdefault(jet, []).append((key, te))
    out: Transition = {}
    for jet in sorted(buckets, key=lambda j: (j[2], j[0], j[1])):
        items = buckets[jet]
        weight = jet[0] + jet[1] + 3 * jet[2]
        if weight != ansatz.m:
            raise InvariantViolation(f"target monomial {jet} has weight {weight}, expected {ansatz.m}")
        top = tuple(max(col) for col in zip(*(te.exps for _, te in items)))
        # pole order along {P = 0} never exceeds the exponent of the kept coordinate
        bound = jet[0] if spec.is_compact else jet[1]
        if rules is None and top[0] > bound:
            raise InvariantViolation(f"pole order {top[0]} exceeds {bound} at {jet}")
        parts = [(key, alg.lift(te.num, [a - b for a, b in zip(top, te.exps)])) for key, te in items]
        out[jet] = TransitionEntry(jet, top, parts, ansatz)
    return out


def debug_dump(tr: Transition, spec: SurfaceSpec) -> str:
    """Human-readable chart transition: per target monomial, pole orders and multipliers."""
    names = TARGET_SYMBOLS[spec.case_kind]
    divs = DIVISORS[spec.case_kind]
    lines = []
    for jet, entry in tr.items():
        jm = " ".join(f"{n}^{e}" for n, e in zip(names, jet) if e) or "1"
        den = ", ".join(f"{n}^{e}" for n, e in zip(divs, entry.exps))
        lines.append(f"[{jm}] required_power={entry.required_power} denominators=({den})")
        for key, mult in entry.parts:
            lines.append(f"    {key.name}: {mult.to_text()}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# numeric consistency over a prime field

def _to_mod(v, p: int) -> int:
    if isinstance(v, Fraction):
        return v.numerator * pow(v.denominator, -1, p) % p
    return int(v) % p


def _sample_compact(spec: SurfaceSpec, p: int, rng: random.Random):
    pack = spec.derivatives
    tail = spec.reduction_tail  # y^d - R; on the surface y^d = tail
    for _ in range(200):
        x, z = rng.randrange(1, p), rng.randrange(1, p)
        c = tail.evaluate((x, 0, z), p)
        if c == 0:
            continue
        y = nthroot_mod(c, spec.d, p)
        if y is None:
            continue
        pt = (x, int(y), z)
        if spec.R.evaluate(pt, p) != 0:
            raise InvariantViolation("sampled point is off the surface")
        vals = {name: pack[name].evaluate(pt, p) for name in ("x", "y", "z", "xx", "xy", "xz", "yy", "yz", "zz")}
        if vals["x"] and vals["y"] and vals["z"]:
            return pt, vals
    raise SamplingError("could not find a smooth point with all partials nonzero")


def _sample_curve_complement(spec: SurfaceSpec, p: int, rng: random.Random):
    pack = spec.derivatives
    for _ in range(200):
        pt = (rng.randrange(1, p), rng.randrange(1, p))
        vals = {name: pack[name].evaluate(pt, p) for name in ("R", "x", "y", "xx", "xy", "yy")}
        if vals["R"] and vals["x"] and vals["y"]:
            return pt, vals
    raise SamplingError("could not find a point off the curve with nonzero partials")


def _inv(a: int, p: int) -> int:
    if a % p == 0:
        raise SamplingError("division by zero at sampled point")
    return pow(a, -1, p)


def numeric_consistency(spec: SurfaceSpec, ansatz: Ansatz, assignment: Mapping[int, object],
                        trials: int = 5, p: int = 1000003, seed: int = 0,
                        tr: Optional[Transition] = None) -> bool:
    """Evaluate the section in both charts at random jets over GF(p) and compare.

    Jets of random holomorphic germs are sampled: a point of the surface (or off
    the curve), random first and second derivatives of the free coordinates, and
    the dependent ones solved from the differentiated equation.
    """
    if tr is None:
        tr = transition(ansatz, spec)
    split = ansatz.split_assignment(assignment)
    coeffs = {key: SparsePoly(spec.ambient_vars, {mo: _to_mod(v, p) for mo, v in mp.items()})
              for key, mp in split.items() if mp}
    if not coeffs:
        return True
    numerators = {jet: entry.specialize(coeffs) for jet, entry in tr.items()}
    rng = random.Random(seed)
    m = ansatz.m
    for _ in range(trials):
        if spec.is_compact:
            pt, v = _sample_compact(spec, p, rng)
            xp, zp, xpp, zpp = (rng.randrange(p) for _ in range(4))
            iy = _inv(v["y"], p)
            yp = -(v["x"] * xp + v["z"] * zp) * iy % p
            quad = (v["xx"] * xp * xp + v["yy"] * yp * yp + v["zz"] * zp * zp
                    + 2 * (v["xy"] * xp * yp + v["xz"] * xp * zp + v["yz"] * yp * zp))
            ypp = -(v["x"] * xpp + v["z"] * zpp + quad) * iy % p
            if (v["x"] * xp + v["y"] * yp + v["z"] * zp) % p:
                raise InvariantViolation("first jet relation fails")
            W_src = (yp * xpp - ypp * xp) % p
            W_tgt = (zp * xpp - zpp * xp) % p
            P, Q = v["z"], v["y"]
            src_syms = {"u": xp, "v": yp, "W": W_src}
            tgt = (xp, zp, W_tgt)
        else:
            pt, v = _sample_curve_complement(spec, p, rng)
            xp, yp, xpp, ypp = (rng.randrange(p) for _ in range(4))
            iR = _inv(v["R"], p)
            L = (v["x"] * xp + v["y"] * yp) * iR % p
            R2 = (v["x"] * xpp + v["y"] * ypp + v["xx"] * xp * xp + 2 * v["xy"] * xp * yp
                  + v["yy"] * yp * yp)
            l2 = (R2 * iR - L * L) % p
            D_src = (xp * l2 - xpp * L) % p
            D_tgt = (L * ypp - l2 * yp) % p
            P, Q = v["y"], v["x"]
            src_syms = {"u": xp, "v": L, "W": D_src}
            tgt = (yp, L, D_tgt)
        iP, iQ = _inv(P, p), _inv(Q, p)
        src = 0
        for key, F in coeffs.items():
            a, b = key.first_jet_split
            val = F.evaluate(pt, p) * pow(iP, source_denominator_exponent(key, m), p)
            val = val * pow(src_syms["u"], a, p) * pow(src_syms["v"], b, p) * pow(src_syms["W"], key.k, p)
            src += val
        target = 0
        for jet, num in numerators.items():
            if not num:
                continue
            e0, e1 = tr[jet].exps
            val = num.evaluate(pt, p)
            val = val * (pow(iP, e0, p) if e0 >= 0 else pow(P, -e0, p))
            val = val * (pow(iQ, e1, p) if e1 >= 0 else pow(Q, -e1, p))
            val = val * pow(tgt[0], jet[0], p) * pow(tgt[1], jet[1], p) * pow(tgt[2], jet[2], p)
            target += val
        if (src - target) % p:
            return False
    return True

