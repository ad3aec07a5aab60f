"""Fermat-type defining equations, their derivatives, and the quotient-ring normal form.

Compact case: ``R = 1 + x^d + y^d + z^d + S(x)`` in ``C[x, y, z]``; the
constrained partial is ``R_z = d z^(d-1)`` and elements of ``C[x,y,z]/(R)`` are
represented by their unique normal form of y-degree below ``d``.

Logarithmic case: ``R = 1 + x^d + y^d + S(x)`` in ``C[x, y]``; the constrained
partial is ``R_y = d y^(d-1)`` and no quotient is taken.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Optional, Sequence, Tuple, Union

from .errors import UsageError
from .polycore import Monomial, ParamPoly, SparsePoly

COMPACT = "compact"
LOGARITHMIC = "logarithmic"

Deformation = Tuple[Tuple[Monomial, int], ...]


def default_deformation(case_kind: str, d: int) -> Deformation:
    """``x^floor(d/2)`` for surfaces, ``x^6`` for curves (``x^floor(d/2)`` when ``d <= 6``)."""
    if case_kind == COMPACT:
        return (((d // 2, 0, 0), 1),)
    a = 6 if d > 6 else d // 2
    return (((a, 0), 1),)


@dataclass(frozen=True)
class DerivativePack:
    """``R`` with all first and second partials, keyed by variable names (``"x"``, ``"xz"``, ...)."""

    R: SparsePoly
    first: Dict[str, SparsePoly]
    second: Dict[str, SparsePoly]

    def __getitem__(self, key: str) -> SparsePoly:
        if key == "R":
            return self.R
        if len(key) == 1:
            return self.first[key]
        return self.second["".join(sorted(key))]


@dataclass(frozen=True)
class SurfaceSpec:
    case_kind: str
    d: int
    deformation: Deformation = field(default=())

    def __post_init__(self) -> None:
        if self.case_kind not in (COMPACT, LOGARITHMIC):
            raise UsageError(f"unknown case kind {self.case_kind!r}")
        if self.d < 2:
            raise UsageError("degree d must be at least 2")
        n = self.ambient_vars
        for mono, coeff in self.deformation:
            if len(mono) != n:
                raise UsageError(f"deformation monomial {mono} needs {n} exponents")
            if mono[1]:
                raise UsageError("deformation must not involve y (breaks the reduction relation)")
            if self.case_kind == COMPACT and mono[2]:
                raise UsageError("deformation must not involve z (R_z must stay a pure power)")
            deg = sum(mono)
            if self.case_kind == LOGARITHMIC and deg >= self.d:
                raise UsageError("logarithmic deformation must have degree at most d-1")
            if self.case_kind == COMPACT and deg > self.d:
                raise UsageError("compact deformation must have degree at most d")
            if not isinstance(coeff, int) or coeff == 0:
                raise UsageError("deformation coefficients must be nonzero integers")

    @property
    def ambient_vars(self) -> int:
        return 3 if self.case_kind == COMPACT else 2

    @property
    def is_compact(self) -> bool:
        return self.case_kind == COMPACT

    @property
    def constrained_var(self) -> int:
        """Index of the variable whose power is the constrained partial (z or y)."""
        return 2 if self.is_compact else 1

    @property
    def constrained_name(self) -> str:
        return "z" if self.is_compact else "y"

    @cached_property
    def R(self) -> SparsePoly:
        n = self.ambient_vars
        terms: Dict[Monomial, int] = {(0,) * n: 1}
        for i in range(n):
            e = [0] * n
            e[i] = self.d
            terms[tuple(e)] = 1
        poly = SparsePoly(n, terms)
        for mono, coeff in self.deformation:
            poly = poly + SparsePoly.monomial(mono, coeff)
        return poly

    @cached_property
    def derivatives(self) -> DerivativePack:
        names = "xyz"[: self.ambient_vars]
        R = self.R
        first = {v: R.partial(i) for i, v in enumerate(names)}
        second = {}
        for i, a in enumerate(names):
            for j in range(i, len(names)):
                second[a + names[j]] = first[a].partial(j)
        return DerivativePack(R, first, second)

    @cached_property
    def reduction_tail(self) -> SparsePoly:
        """``y^d - R``: the value substituted for ``y^d`` in the compact quotient ring."""
        n = self.ambient_vars
        e = [0] * n
        e[1] = self.d
        return SparsePoly.monomial(e, 1) - self.R

    def relation_power(self, q: int) -> SparsePoly:
        cache = self.__dict__.setdefault("_rel_cache", {0: SparsePoly.constant(self.ambient_vars, 1)})
        if q not in cache:
            cache[q] = self.relation_power(q - 1) * self.reduction_tail
        return cache[q]

    def describe(self) -> str:
        return f"{self.case_kind} d={self.d} R = {self.R.to_text()}"


def build_scenario(case_kind: str, d: int,
                   deformation: Optional[Sequence[Tuple[Sequence[int], int]]] = None
                   ) -> Tuple[SurfaceSpec, DerivativePack]:
    """Concrete equation and derivative pack; ``deformation=None`` selects the default."""
    if deformation is None:
        deformation = default_deformation(case_kind, d)
    deformation = tuple((tuple(int(e) for e in mono), int(c)) for mono, c in deformation)
    spec = SurfaceSpec(case_kind, int(d), deformation)
    pack = spec.derivatives
    constrained = pack.first[spec.constrained_name]
    expected = [0] * spec.ambient_vars
    expected[spec.constrained_var] = spec.d - 1
    if constrained != SparsePoly.monomial(expected, spec.d):
        raise UsageError("constrained partial is not a pure power; deformation touches it")
    return spec, pack


def normal_form(F: Union[SparsePoly, ParamPoly], spec: SurfaceSpec) -> Union[SparsePoly, ParamPoly]:
    """Unique representative modulo ``R`` with y-degree below ``d`` (identity in the log case)."""
    if not spec.is_compact:
        return F
    d = spec.d
    if F.nvars != 3:
        raise UsageError("compact normal form needs 3 variables")
    if isinstance(F, SparsePoly):
        if F.degree_in(1) < d:
            return F
        conv = F.field.convert
        out: Dict[Monomial, object] = {}
        for mono, c in F.terms.items():
            q, r = divmod(mono[1], d)
            if not q:
                out[mono] = out.get(mono, 0) + c
                continue
            base = (mono[0], r, mono[2])
            for m2, c2 in spec.relation_power(q).terms.items():
                m = (base[0] + m2[0], r, base[2] + m2[2])
                out[m] = out.get(m, 0) + c * c2
        clean = {}
        for m, c in out.items():
            c = conv(c)
            if c:
                clean[m] = c
        return SparsePoly._raw(3, F.field, clean)
    if isinstance(F, ParamPoly):
        conv = F.field.convert
        pout: Dict[Monomial, Dict[int, object]] = {}
        for mono, row in F.terms.items():
            q, r = divmod(mono[1], d)
            if not q:
                tgt = pout.setdefault(mono, {})
                for u, c in row.items():
                    tgt[u] = tgt.get(u, 0) + c
                continue
            for m2, c2 in spec.relation_power(q).terms.items():
                m = (mono[0] + m2[0], r, mono[2] + m2[2])
                tgt = pout.setdefault(m, {})
                for u, c in row.items():
                    tgt[u] = tgt.get(u, 0) + c * c2
        clean_p = {}
        for m, row in pout.items():
            r2 = {u: conv(c) for u, c in row.items() if conv(c)}
            if r2:
                clean_p[m] = r2
        return ParamPoly._raw(3, F.field, clean_p)
    raise UsageError(f"cannot reduce {type(F).__name__}")


def divisibility_threshold(i: int, spec: SurfaceSpec) -> int:
    if i <= 0:
        raise UsageError("divisibility power must be positive")
    return (spec.d - 1) * i


def divides_power(F: SparsePoly, i: int, spec: SurfaceSpec) -> bool:
    """Whether the constrained partial to the power ``i`` divides ``F``.

    ``F`` must already be in normal form (compact case).  The constant factor
    ``d`` of the partial is a unit and plays no role.
    """
    threshold = divisibility_threshold(i, spec)
    v = spec.constrained_var
    return all(mono[v] >= threshold for mono in F.terms)
