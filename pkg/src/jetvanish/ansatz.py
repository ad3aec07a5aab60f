"""Unknown polynomial families of the most general invariant jet differential.

A section of weighted order ``m`` is written on the chart where the constrained
partial ``P`` (``R_z`` or ``R_y``) is invertible as

    sum_k sum_j  F_{k,j} / P^(m-2k) * u^(m-3k-j) * v^j * W^k

with families ``F = A, B, C, D, E`` for Wronskian powers ``k = 0..4``.  Here
``u = x'`` and ``v`` is ``y'`` (compact) or ``R'/R`` (logarithmic); ``W`` is the
(logarithmic) Wronskian.  The degree bounds come from the vanishing order at
infinity required by the twist.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from .errors import UnsupportedCaseError, UsageError
from .polycore import ZZ, Monomial, ParamPoly, monomial_basis
from .scenario import SurfaceSpec

FAMILIES = "ABCDE"
MAX_ORDER = {"compact": 11, "logarithmic": 14}
MAX_WRONSKIAN_POWER = {"compact": 3, "logarithmic": 4}


@dataclass(frozen=True, order=True)
class JetTermKey:
    """One member ``F_j`` of a family; ``first_jet_split = (exponent of x', exponent of v)``."""

    k: int
    j: int
    first_jet_split: Tuple[int, int]

    @property
    def family(self) -> str:
        return FAMILIES[self.k]

    @property
    def name(self) -> str:
        return f"{self.family}{self.j}"

    def weight(self) -> int:
        return sum(self.first_jet_split) + 3 * self.k

    def __str__(self) -> str:
        return self.name


def make_key(family: str, j: int, m: int) -> JetTermKey:
    if family not in FAMILIES:
        raise UsageError(f"unknown family {family!r}")
    k = FAMILIES.index(family)
    if not 0 <= j <= m - 3 * k:
        raise UsageError(f"{family}{j} does not exist for m={m}")
    return JetTermKey(k, j, (m - 3 * k - j, j))


def degree_bound(spec: SurfaceSpec, family: str, j: int, m: int, t: int) -> int:
    """Maximal total degree of ``family_j`` for vanishing order ``t`` at infinity (twist ``-t``).

    A negative value means the member is absent.
    """
    if family not in FAMILIES:
        raise UsageError(f"unknown family {family!r}")
    k = FAMILIES.index(family)
    if k > MAX_WRONSKIAN_POWER[spec.case_kind]:
        raise UsageError(f"family {family} does not occur in the {spec.case_kind} case")
    if not 0 <= j <= m - 3 * k:
        raise UsageError(f"{family}{j} does not exist for m={m}")
    d = spec.d
    if spec.is_compact:
        # x' and y' both have pole order 2 at infinity, the Wronskian 3
        return (m - 2 * k) * (d - 1) - (m - 3 * k) * 2 - 3 * k - t
    # x' has pole order 2, R'/R order 1, the log Wronskian 4
    return (m - 2 * k) * (d - 1) - (m - 3 * k - j) * 2 - j - 4 * k - t


def source_denominator_exponent(key: JetTermKey, m: int) -> int:
    """Power of the constrained partial under ``F_{k,j}``."""
    return m - 2 * key.k


@dataclass(frozen=True)
class UnknownInfo:
    uid: int
    key: JetTermKey
    mono: Monomial


@dataclass
class Ansatz:
    spec: SurfaceSpec
    m: int
    t: int
    jet_order: int
    terms: Dict[JetTermKey, ParamPoly]
    bases: Dict[JetTermKey, List[Monomial]]
    offsets: Dict[JetTermKey, int]
    registry: List[UnknownInfo] = field(repr=False)

    @property
    def num_unknowns(self) -> int:
        return len(self.registry)

    def keys(self) -> List[JetTermKey]:
        return list(self.terms)

    def uids(self, key: JetTermKey) -> range:
        start = self.offsets[key]
        return range(start, start + len(self.bases[key]))

    def family_sizes(self) -> Dict[str, int]:
        return {key.name: len(self.bases[key]) for key in self.terms}

    def registry_csv(self) -> str:
        """Ordered dump ``id,family,j,exponents`` (exponents space separated)."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["id", "family", "j", "exponents"])
        for info in self.registry:
            writer.writerow([info.uid, info.key.family, info.key.j, " ".join(map(str, info.mono))])
        return buf.getvalue()

    def split_assignment(self, assignment) -> Dict[JetTermKey, Dict[Monomial, object]]:
        """Group a ``{uid: value}`` assignment into concrete coefficient maps per family member."""
        out: Dict[JetTermKey, Dict[Monomial, object]] = {key: {} for key in self.terms}
        for key in self.terms:
            for uid, mono in zip(self.uids(key), self.bases[key]):
                v = assignment.get(uid, 0)
                if v:
                    out[key][mono] = v
        return out


def check_range(case_kind: str, m: int, t: int, jet_order: int) -> None:
    if jet_order not in (1, 2):
        raise UnsupportedCaseError("only jet orders 1 and 2 are supported")
    if m < 1:
        raise UnsupportedCaseError("weighted order m must be positive")
    if m > MAX_ORDER[case_kind]:
        raise UnsupportedCaseError(
            f"weighted order m={m} exceeds the proven structure range m <= {MAX_ORDER[case_kind]} "
            f"for the {case_kind} case")
    if jet_order == 2 and t < 1:
        raise UnsupportedCaseError("2-jet differentials need a negative twist (t >= 1)")
    if t < 0:
        raise UnsupportedCaseError("t must be nonnegative")


def build_ansatz(spec: SurfaceSpec, m: int, t: int, jet_order: int = 2) -> Ansatz:
    """Generic section with one unknown per admissible coefficient, ids assigned family by family."""
    check_range(spec.case_kind, m, t, jet_order)
    nvars = spec.ambient_vars
    caps = [None, spec.d - 1, None] if spec.is_compact else None
    kmax = 0 if jet_order == 1 else MAX_WRONSKIAN_POWER[spec.case_kind]
    terms: Dict[JetTermKey, ParamPoly] = {}
    bases: Dict[JetTermKey, List[Monomial]] = {}
    offsets: Dict[JetTermKey, int] = {}
    registry: List[UnknownInfo] = []
    for k in range(kmax + 1):
        if 3 * k > m:
            break
        family = FAMILIES[k]
        for j in range(m - 3 * k + 1):
            bound = degree_bound(spec, family, j, m, t)
            if bound < 0:
                continue
            key = make_key(family, j, m)
            basis = monomial_basis(nvars, bound, caps)
            start = len(registry)
            uids = list(range(start, start + len(basis)))
            registry.extend(UnknownInfo(u, key, mono) for u, mono in zip(uids, basis))
            terms[key] = ParamPoly.from_unknowns(basis, uids, nvars, ZZ)
            bases[key] = basis
            offsets[key] = start
    return Ansatz(spec, m, t, jet_order, terms, bases, offsets, registry)
