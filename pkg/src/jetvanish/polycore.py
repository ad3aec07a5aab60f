"""Exact coefficient fields, sparse polynomials and polynomials with unknown coefficients.

Everything here is exact: coefficients are Python ints, ``Fraction`` or residues
modulo a prime.  Monomials are plain tuples of exponents, one per ambient
variable, and the canonical term order is graded lexicographic with variable
order ``(x, y, z)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from sympy import isprime

from .errors import InvariantViolation, UsageError

Monomial = Tuple[int, ...]

VAR_NAMES = ("x", "y", "z")


@dataclass(frozen=True)
class CoeffField:
    """Coefficient domain: ``"ZZ"``, ``"QQ"`` or ``"GF"`` (with prime modulus ``p``)."""

    kind: str
    p: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("ZZ", "QQ", "GF"):
            raise UsageError(f"unknown coefficient field {self.kind!r}")
        if self.kind == "GF":
            if not isprime(self.p):
                raise UsageError(f"modulus {self.p} is not prime")
        elif self.p:
            raise UsageError("only prime fields carry a modulus")

    def __call__(self, c):
        return self.convert(c)

    def convert(self, c):
        if self.kind == "GF":
            if isinstance(c, Fraction):
                return c.numerator * pow(c.denominator, -1, self.p) % self.p
            return int(c) % self.p
        if self.kind == "QQ":
            return Fraction(c)
        if isinstance(c, Fraction):
            if c.denominator != 1:
                raise UsageError(f"{c} is not an integer")
            return c.numerator
        return int(c)

    def inverse(self, c):
        if self.kind == "GF":
            return pow(c, -1, self.p)
        if self.kind == "QQ":
            return 1 / Fraction(c)
        if c in (1, -1):
            return c
        raise UsageError(f"{c} is not a unit in ZZ")

    def __str__(self) -> str:
        return f"GF({self.p})" if self.kind == "GF" else self.kind


ZZ = CoeffField("ZZ")
QQ = CoeffField("QQ")


def GF(p: int) -> CoeffField:
    return CoeffField("GF", p)


def mono_key(mono: Monomial) -> tuple:
    """Sort key for the canonical graded lex order (ascending)."""
    return (sum(mono), tuple(-e for e in mono))


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


def mono_text(mono: Monomial, names: Sequence[str] = VAR_NAMES) -> str:
    parts = []
    for name, e in zip(names, mono):
        if e == 1:
            parts.append(name)
        elif e:
            parts.append(f"{name}^{e}")
    return " ".join(parts)


def _check_compatible(a, b) -> None:
    if a.nvars != b.nvars:
        raise UsageError(f"variable arity mismatch: {a.nvars} vs {b.nvars}")
    if a.field != b.field:
        raise UsageError(f"coefficient field mismatch: {a.field} vs {b.field}")


class SparsePoly:
    """Immutable sparse multivariate polynomial ``{monomial: nonzero coefficient}``."""

    __slots__ = ("nvars", "field", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Optional[Mapping[Monomial, object]] = None,
                 field: CoeffField = ZZ):
        clean: Dict[Monomial, object] = {}
        for mono, c in (terms or {}).items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != nvars or min(mono, default=0) < 0:
                raise UsageError(f"bad monomial {mono} for {nvars} variables")
            c = field.convert(c)
            if c:
                clean[mono] = field.convert(clean.get(mono, 0) + c)
                if not clean[mono]:
                    del clean[mono]
        self.nvars = nvars
        self.field = field
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, nvars: int, field: CoeffField, terms: Dict[Monomial, object]) -> "SparsePoly":
        # caller guarantees: normalized coefficients, no zeros
        obj = cls.__new__(cls)
        obj.nvars = nvars
        obj.field = field
        obj._terms = terms
        obj._hash = None
        return obj

    # construction helpers
    @classmethod
    def zero(cls, nvars: int, field: CoeffField = ZZ) -> "SparsePoly":
        return cls._raw(nvars, field, {})

    @classmethod
    def constant(cls, nvars: int, c, field: CoeffField = ZZ) -> "SparsePoly":
        return cls(nvars, {(0,) * nvars: c}, field)

    @classmethod
    def monomial(cls, exps: Sequence[int], c=1, field: CoeffField = ZZ) -> "SparsePoly":
        return cls(len(exps), {tuple(exps): c}, field)

    @classmethod
    def variable(cls, nvars: int, index: int, field: CoeffField = ZZ) -> "SparsePoly":
        exps = [0] * nvars
        exps[index] = 1
        return cls(nvars, {tuple(exps): 1}, field)

    @property
    def terms(self) -> Mapping[Monomial, object]:
        """Read-only view; do not mutate."""
        return self._terms

    def items(self) -> List[Tuple[Monomial, object]]:
        """Terms in canonical order."""
        return sorted(self._terms.items(), key=lambda kv: mono_key(kv[0]))

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[Monomial]:
        return iter(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def coeff(self, mono: Monomial):
        return self._terms.get(tuple(mono), 0)

    def degree(self) -> int:
        return max((sum(m) for m in self._terms), default=-1)

    def degree_in(self, index: int) -> int:
        return max((m[index] for m in self._terms), default=-1)

    def min_degree_in(self, index: int) -> int:
        return min((m[index] for m in self._terms), default=-1)

    def change_field(self, field: CoeffField) -> "SparsePoly":
        return SparsePoly(self.nvars, self._terms, field)

    # arithmetic
    def _coerce(self, other) -> "SparsePoly":
        if isinstance(other, SparsePoly):
            _check_compatible(self, other)
            return other
        return SparsePoly.constant(self.nvars, other, self.field)

    def __add__(self, other) -> "SparsePoly":
        other = self._coerce(other)
        out = dict(self._terms)
        conv = self.field.convert
        for mono, c in other._terms.items():
            v = conv(out.get(mono, 0) + c)
            if v:
                out[mono] = v
            else:
                out.pop(mono, None)
        return SparsePoly._raw(self.nvars, self.field, out)

    __radd__ = __add__

    def __neg__(self) -> "SparsePoly":
        conv = self.field.convert
        return SparsePoly._raw(self.nvars, self.field, {m: conv(-c) for m, c in self._terms.items()})

    def __sub__(self, other) -> "SparsePoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "SparsePoly":
        return self._coerce(other) - self

    def scale(self, c) -> "SparsePoly":
        conv = self.field.convert
        c = conv(c)
        if not c:
            return SparsePoly.zero(self.nvars, self.field)
        return SparsePoly._raw(self.nvars, self.field,
                               {m: conv(v * c) for m, v in self._terms.items()})

    def __mul__(self, other) -> "SparsePoly":
        if not isinstance(other, SparsePoly):
            return self.scale(other)
        return poly_mul(self, other)

    def __rmul__(self, other) -> "SparsePoly":
        return self.scale(other)

    def __pow__(self, n: int) -> "SparsePoly":
        if n < 0:
            raise UsageError("negative power")
        result = SparsePoly.constant(self.nvars, 1, self.field)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def shift(self, mono: Monomial) -> "SparsePoly":
        """Multiply by a monomial."""
        return SparsePoly._raw(self.nvars, self.field,
                               {mono_mul(m, mono): c for m, c in self._terms.items()})

    def __eq__(self, other) -> bool:
        if isinstance(other, SparsePoly):
            return (self.nvars, self.field, self._terms) == (other.nvars, other.field, other._terms)
        if isinstance(other, (int, Fraction)):
            return self == SparsePoly.constant(self.nvars, other, self.field)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, self.field, frozenset(self._terms.items())))
        return self._hash

    def partial(self, index: int) -> "SparsePoly":
        return poly_partial(self, index)

    def evaluate(self, point: Sequence, modulus: Optional[int] = None):
        """Value at ``point``; reduced modulo ``modulus`` when given."""
        if len(point) != self.nvars:
            raise UsageError("point has wrong arity")
        total = 0
        for mono, c in self._terms.items():
            v = c
            for base, e in zip(point, mono):
                if e:
                    v = v * (pow(base, e, modulus) if modulus else base ** e)
            total += v
        return total % modulus if modulus else total

    def to_text(self, names: Sequence[str] = VAR_NAMES) -> str:
        """Canonical serialization ``"c * x^a y^b z^c + ..."`` in graded lex order."""
        if not self._terms:
            return "0"
        out = []
        for mono, c in self.items():
            mt = mono_text(mono, names)
            out.append(f"{c} * {mt}" if mt else f"{c}")
        return " + ".join(out)

    def __repr__(self) -> str:
        return f"SparsePoly({self.to_text()})"


def poly_mul(p: SparsePoly, q: SparsePoly) -> SparsePoly:
    """Exact product of two sparse polynomials over the same field and arity."""
    _check_compatible(p, q)
    conv = p.field.convert
    out: Dict[Monomial, object] = {}
    for m1, c1 in p._terms.items():
        for m2, c2 in q._terms.items():
            m = tuple(a + b for a, b in zip(m1, m2))
            out[m] = out.get(m, 0) + c1 * c2
    clean = {}
    for m, c in out.items():
        c = conv(c)
        if c:
            clean[m] = c
    return SparsePoly._raw(p.nvars, p.field, clean)


def poly_partial(p: SparsePoly, var_index: int) -> SparsePoly:
    """Formal partial derivative with respect to variable ``var_index``."""
    if not 0 <= var_index < p.nvars:
        raise UsageError(f"variable index {var_index} out of range for {p.nvars} variables")
    conv = p.field.convert
    out = {}
    for mono, c in p._terms.items():
        e = mono[var_index]
        if e:
            v = conv(c * e)
            if v:
                m = list(mono)
                m[var_index] = e - 1
                out[tuple(m)] = v
    return SparsePoly._raw(p.nvars, p.field, out)


def count_monomials(num_vars: int, max_total_degree: int) -> int:
    """Stars and bars: monomials of total degree at most ``max_total_degree``."""
    if max_total_degree < 0:
        return 0
    from math import comb
    return comb(max_total_degree + num_vars, num_vars)


def monomial_basis(num_vars: int, max_total_degree: int,
                   per_var_caps: Optional[Sequence[Optional[int]]] = None) -> List[Monomial]:
    """All monomials of total degree <= ``max_total_degree`` in canonical order.

    ``per_var_caps[i]``, when not None, bounds the exponent of variable ``i``
    (inclusive).  A negative degree bound yields the empty basis.
    """
    if max_total_degree < 0:
        return []
    caps = list(per_var_caps) if per_var_caps is not None else [None] * num_vars
    if len(caps) != num_vars:
        raise UsageError("per_var_caps has wrong length")
    out: List[Monomial] = []

    def rec(prefix: List[int], remaining: int, index: int) -> None:
        if index == num_vars - 1:
            top = remaining if caps[index] is None else min(remaining, caps[index])
            for e in range(top + 1):
                out.append(tuple(prefix + [e]))
            return
        top = remaining if caps[index] is None else min(remaining, caps[index])
        for e in range(top + 1):
            rec(prefix + [e], remaining - e, index + 1)

    if num_vars == 0:
        return [()]
    rec([], max_total_degree, 0)
    out.sort(key=mono_key)
    return out


class LinForm:
    """Sparse linear form ``sum coeffs[u] * u + constant`` in the registered unknowns."""

    __slots__ = ("coeffs", "constant")

    def __init__(self, coeffs: Optional[Mapping[int, object]] = None, constant=0,
                 homogeneous: bool = True):
        if homogeneous and constant:
            raise InvariantViolation("homogeneous linear form with nonzero constant term")
        self.coeffs = {u: c for u, c in (coeffs or {}).items() if c}
        self.constant = constant

    def __eq__(self, other) -> bool:
        return isinstance(other, LinForm) and (self.coeffs, self.constant) == (other.coeffs, other.constant)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __bool__(self) -> bool:
        return bool(self.coeffs) or bool(self.constant)

    def evaluate(self, assignment: Mapping[int, object]):
        total = self.constant
        for u, c in self.coeffs.items():
            if u not in assignment:
                raise UsageError(f"assignment is missing unknown {u}")
            total += c * assignment[u]
        return total

    def to_text(self) -> str:
        body = " + ".join(f"{c}*u{u}" for u, c in sorted(self.coeffs.items()))
        return body or "0"

    def __repr__(self) -> str:
        return f"LinForm({self.to_text()})"


class ParamPoly:
    """Polynomial whose coefficients are linear forms in unknowns: ``{monomial: {uid: coeff}}``."""

    __slots__ = ("nvars", "field", "_terms")

    def __init__(self, nvars: int, terms: Optional[Mapping[Monomial, Mapping[int, object]]] = None,
                 field: CoeffField = ZZ):
        conv = field.convert
        clean: Dict[Monomial, Dict[int, object]] = {}
        for mono, lf in (terms or {}).items():
            if isinstance(lf, LinForm):
                lf = lf.coeffs
            row = {}
            for u, c in lf.items():
                c = conv(c)
                if c:
                    row[u] = c
            if row:
                mono = tuple(mono)
                if len(mono) != nvars:
                    raise UsageError(f"bad monomial {mono} for {nvars} variables")
                clean[mono] = row
        self.nvars = nvars
        self.field = field
        self._terms = clean

    @classmethod
    def _raw(cls, nvars: int, field: CoeffField, terms: Dict[Monomial, Dict[int, object]]) -> "ParamPoly":
        obj = cls.__new__(cls)
        obj.nvars = nvars
        obj.field = field
        obj._terms = terms
        return obj

    @classmethod
    def from_unknowns(cls, basis: Sequence[Monomial], uids: Sequence[int], nvars: int,
                      field: CoeffField = ZZ) -> "ParamPoly":
        """``sum_i u_{uids[i]} * basis[i]``: the generic polynomial on a monomial support."""
        if len(basis) != len(uids):
            raise UsageError("basis and unknown ids differ in length")
        return cls._raw(nvars, field, {tuple(m): {u: 1} for m, u in zip(basis, uids)})

    @property
    def terms(self) -> Mapping[Monomial, Mapping[int, object]]:
        return self._terms

    def linform(self, mono: Monomial) -> LinForm:
        return LinForm(self._terms.get(tuple(mono), {}))

    def items(self) -> List[Tuple[Monomial, Dict[int, object]]]:
        return sorted(self._terms.items(), key=lambda kv: mono_key(kv[0]))

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def unknowns(self) -> set:
        out = set()
        for row in self._terms.values():
            out.update(row)
        return out

    def __eq__(self, other) -> bool:
        return (isinstance(other, ParamPoly) and self.nvars == other.nvars
                and self.field == other.field and self._terms == other._terms)

    def _accumulate(self, out: Dict[Monomial, Dict[int, object]], mono: Monomial,
                    row: Mapping[int, object], factor=1) -> None:
        target = out.setdefault(mono, {})
        for u, c in row.items():
            target[u] = target.get(u, 0) + c * factor

    def _finish(self, out: Dict[Monomial, Dict[int, object]]) -> "ParamPoly":
        conv = self.field.convert
        clean = {}
        for mono, row in out.items():
            r = {}
            for u, c in row.items():
                c = conv(c)
                if c:
                    r[u] = c
            if r:
                clean[mono] = r
        return ParamPoly._raw(self.nvars, self.field, clean)

    def __add__(self, other: "ParamPoly") -> "ParamPoly":
        _check_compatible(self, other)
        out: Dict[Monomial, Dict[int, object]] = {m: dict(r) for m, r in self._terms.items()}
        for mono, row in other._terms.items():
            self._accumulate(out, mono, row)
        return self._finish(out)

    def __neg__(self) -> "ParamPoly":
        return self.scale(-1)

    def __sub__(self, other: "ParamPoly") -> "ParamPoly":
        return self + (-other)

    def scale(self, c) -> "ParamPoly":
        return self._finish({m: {u: v * c for u, v in r.items()} for m, r in self._terms.items()})

    def mul_poly(self, q: SparsePoly) -> "ParamPoly":
        """Product with a concrete polynomial."""
        _check_compatible(self, q)
        out: Dict[Monomial, Dict[int, object]] = {}
        for m1, row in self._terms.items():
            for m2, c in q.terms.items():
                self._accumulate(out, mono_mul(m1, m2), row, c)
        return self._finish(out)

    def __mul__(self, other) -> "ParamPoly":
        if isinstance(other, SparsePoly):
            return self.mul_poly(other)
        return self.scale(other)

    __rmul__ = __mul__

    def specialize(self, assignment: Mapping[int, object], field: Optional[CoeffField] = None) -> SparsePoly:
        return param_specialize(self, assignment, field)

    def to_text(self, names: Sequence[str] = VAR_NAMES) -> str:
        if not self._terms:
            return "0"
        out = []
        for mono, row in self.items():
            lf = " + ".join(f"{c}*u{u}" for u, c in sorted(row.items()))
            mt = mono_text(mono, names)
            out.append(f"({lf}) * {mt}" if mt else f"({lf})")
        return " + ".join(out)

    def __repr__(self) -> str:
        return f"ParamPoly({self.to_text()})"


def param_specialize(pp: ParamPoly, assignment: Mapping[int, object],
                     field: Optional[CoeffField] = None) -> SparsePoly:
    """Substitute values for every unknown of ``pp``; exact and linear in ``assignment``."""
    field = field or pp.field
    conv = field.convert
    out = {}
    for mono, row in pp.terms.items():
        total = 0
        for u, c in row.items():
            try:
                v = assignment[u]
            except KeyError:
                raise UsageError(f"assignment is missing unknown {u}") from None
            if v:
                total += c * v
        total = conv(total)
        if total:
            out[mono] = total
    return SparsePoly._raw(pp.nvars, field, out)


def iter_exponents(bounds: Iterable[int]) -> Iterator[Monomial]:
    """Every exponent tuple with ``0 <= e_i <= bounds[i]`` (small brute-force helper)."""
    return product(*(range(b + 1) for b in bounds))
