"""Linear conditions on the unknowns from divisibility of the transition numerators.

For a target coefficient ``N / P^i`` with ``P = d * v^(d-1)`` (``v`` the constrained
variable), holomorphy is the vanishing of every coefficient of ``N`` (in normal
form) whose ``v``-exponent is below ``(d-1) i``.  Each such coefficient is one
homogeneous linear row.  Rows are grouped in blocks by the power ``i``.

Rows are extracted directly from the per-family multipliers, without building
the full numerator: only multiplier terms that can land below the threshold are
used, and since the quotient-ring reduction never lowers the ``z``-exponent,
discarding high terms before reducing is exact.
"""
from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass, field
from math import gcd
from typing import Dict, Iterable, Iterator, List, Optional, TextIO, Tuple, Union

from .errors import ConfigError, InvariantViolation, UsageError
from .polycore import Monomial, ParamPoly, SparsePoly, mono_key
from .scenario import SurfaceSpec, build_scenario, divisibility_threshold

Row = Dict[int, int]

_SHIFT = 16
_MASK = (1 << _SHIFT) - 1
FORMAT_TAG = "jetvanish-system 1"


def _pack(mono: Monomial) -> int:
    out = 0
    for i, e in enumerate(mono):
        out |= e << (_SHIFT * i)
    return out


def _unpack(code: int, nvars: int) -> Monomial:
    return tuple((code >> (_SHIFT * i)) & _MASK for i in range(nvars))


def truncate(numerator: Union[SparsePoly, ParamPoly], i: int, spec: SurfaceSpec):
    """Split ``numerator`` into (terms below the threshold, exact quotient of the rest by ``v^((d-1)i)``)."""
    thr = divisibility_threshold(i, spec)
    v = spec.constrained_var
    low, high = {}, {}
    for mono, c in numerator.terms.items():
        if mono[v] < thr:
            low[mono] = c
        else:
            shifted = list(mono)
            shifted[v] -= thr
            high[tuple(shifted)] = c
    cls = type(numerator)
    return cls._raw(numerator.nvars, numerator.field, low), cls._raw(numerator.nvars, numerator.field, high)


def primitive_row(row: Row) -> Row:
    """Divide by the content and make the entry with the smallest column positive."""
    g = 0
    for c in row.values():
        g = gcd(g, c)
    if g == 0:
        return {}
    first = row[min(row)]
    if first < 0:
        g = -g
    return {u: c // g for u, c in sorted(row.items())}


@dataclass
class ConstraintBlock:
    power: int
    rows: List[Row]
    provenance: List[Tuple[tuple, Monomial]]
    raw_count: int = 0

    def __len__(self) -> int:
        return len(self.rows)


@dataclass
class ConstraintSystem:
    case_kind: str
    d: int
    m: int
    t: int
    jet_order: int
    deformation: tuple
    num_unknowns: int
    blocks: List[ConstraintBlock]
    meta: Dict[str, object] = field(default_factory=dict)

    @classmethod
    def from_rows(cls, rows: Iterable[Row], num_unknowns: int,
                  block_sizes: Optional[List[int]] = None) -> "ConstraintSystem":
        """Bare matrix wrapped as a system (no equation attached; ``d = 0``)."""
        rows = [{u: int(c) for u, c in r.items() if c} for r in rows]
        for r in rows:
            if any(not 0 <= u < num_unknowns for u in r):
                raise UsageError("row references a column outside the unknowns")
        sizes = block_sizes or [len(rows)]
        if sum(sizes) != len(rows):
            raise UsageError("block sizes do not add up to the row count")
        blocks, start = [], 0
        for i, n in enumerate(sizes, 1):
            chunk = rows[start:start + n]
            blocks.append(ConstraintBlock(i, chunk, [((), ())] * n, n))
            start += n
        return cls("matrix", 0, 0, 0, 0, (), num_unknowns, blocks)

    @property
    def total_rows(self) -> int:
        return sum(len(b) for b in self.blocks)

    def rows(self) -> Iterator[Row]:
        for b in self.blocks:
            yield from b.rows

    def block(self, power: int) -> ConstraintBlock:
        for b in self.blocks:
            if b.power == power:
                return b
        return ConstraintBlock(power, [], [], 0)

    def spec(self) -> SurfaceSpec:
        return build_scenario(self.case_kind, self.d, self.deformation)[0]

    def export(self, out: Optional[TextIO] = None, prime: Optional[int] = None) -> str:
        """Sparse text format; returns the text when ``out`` is None."""
        buf = out if out is not None else io.StringIO()
        write_system(self, buf, prime)
        return buf.getvalue() if out is None else ""

    def system_hash(self) -> str:
        h = hashlib.sha256()
        h.update(self.export().encode())
        return h.hexdigest()

    def residual(self, assignment, prime: Optional[int] = None) -> List[int]:
        """Indices of rows not annihilated by ``assignment`` (exact, or modulo ``prime``)."""
        bad = []
        for idx, row in enumerate(self.rows()):
            s = sum(c * assignment.get(u, 0) for u, c in row.items())
            if (s % prime if prime else s) != 0:
                bad.append(idx)
        return bad


def _relation_table(spec: SurfaceSpec, q: int, thr: int) -> List[Tuple[int, int, int]]:
    """Packed ``(monomial, z-exponent, coeff)`` of ``(y^d - R)^q`` restricted to ``z < thr``."""
    return [(_pack(mo), mo[2], c) for mo, c in spec.relation_power(q).terms.items() if mo[2] < thr]


def extract_rows(entry, spec: SurfaceSpec) -> Dict[int, Row]:
    """Packed monomial -> linear row, for every numerator coefficient below the threshold."""
    i = entry.required_power
    if i <= 0:
        return {}
    thr = divisibility_threshold(i, spec)
    ansatz = entry.ansatz
    v = spec.constrained_var
    d = spec.d
    yshift = _SHIFT
    rows: Dict[int, Row] = {}
    rel_cache: Dict[int, list] = {}
    for key, mult in entry.parts:
        mterms = [(_pack(mo), mo[v], c) for mo, c in mult.terms.items() if mo[v] < thr]
        if not mterms:
            continue
        basis = ansatz.bases[key]
        start = ansatz.offsets[key]
        for offset, mu in enumerate(basis):
            mv = mu[v]
            if mv >= thr:
                continue
            uid = start + offset
            pm = _pack(mu)
            for pn, nv, c in mterms:
                if mv + nv >= thr:
                    continue
                code = pm + pn
                if spec.is_compact:
                    y = (code >> yshift) & _MASK
                    if y >= d:
                        q, r = divmod(y, d)
                        base = code - ((q * d) << yshift)
                        bz = mv + nv
                        if q not in rel_cache:
                            rel_cache[q] = _relation_table(spec, q, thr)
                        for pr, rz, c2 in rel_cache[q]:
                            if bz + rz >= thr:
                                continue
                            tgt = rows.get(base + pr)
                            if tgt is None:
                                tgt = rows[base + pr] = {}
                            tgt[uid] = tgt.get(uid, 0) + c * c2
                        continue
                tgt = rows.get(code)
                if tgt is None:
                    tgt = rows[code] = {}
                tgt[uid] = tgt.get(uid, 0) + c
    clean = {}
    for code, row in rows.items():
        r = {u: c for u, c in row.items() if c}
        if r:
            clean[code] = r
    return clean


def assemble(tr, spec: Optional[SurfaceSpec] = None, dedupe: bool = True) -> ConstraintSystem:
    """Blocks of rows ordered by divisibility power; rows are primitive and deduplicated."""
    # lowest power first, so a row shared between blocks is kept where it first binds
    entries = sorted(tr.values(), key=lambda e: e.required_power)
    if not entries:
        raise UsageError("empty transition")
    ansatz = entries[0].ansatz
    spec = spec or ansatz.spec
    nvars = spec.ambient_vars
    by_power: Dict[int, ConstraintBlock] = {}
    seen = set()
    for entry in entries:
        i = entry.required_power
        if i <= 0:
            continue
        block = by_power.setdefault(i, ConstraintBlock(i, [], [], 0))
        rows = extract_rows(entry, spec)
        block.raw_count += len(rows)
        for code in sorted(rows, key=lambda c: mono_key(_unpack(c, nvars))):
            row = primitive_row(rows[code])
            if dedupe:
                sig = tuple(row.items())
                if sig in seen:
                    continue
                seen.add(sig)
            block.rows.append(row)
            block.provenance.append((entry.jet, _unpack(code, nvars)))
    blocks = [by_power[i] for i in sorted(by_power)]
    return ConstraintSystem(spec.case_kind, spec.d, ansatz.m, ansatz.t, ansatz.jet_order,
                            spec.deformation, ansatz.num_unknowns, blocks)


def rows_from_numerator(numerator: ParamPoly, i: int, spec: SurfaceSpec) -> Dict[Monomial, Row]:
    """Reference extraction from a fully built numerator (slow path used for cross-checks)."""
    low, _ = truncate(numerator, i, spec)
    return {mono: dict(r) for mono, r in low.terms.items()}


# ---------------------------------------------------------------------------
# text format

def _deformation_text(deformation) -> str:
    if not deformation:
        return "none"
    return ";".join(",".join(map(str, mo)) + ":" + str(c) for mo, c in deformation)


def _parse_deformation(text: str):
    if text == "none":
        return ()
    out = []
    for item in text.split(";"):
        mo, c = item.split(":")
        out.append((tuple(int(e) for e in mo.split(",")), int(c)))
    return tuple(out)


def write_system(system: ConstraintSystem, out: TextIO, prime: Optional[int] = None) -> None:
    """Header lines, then ``block <power> <nrows>`` followed by ``row col value`` triples."""
    out.write(FORMAT_TAG + "\n")
    out.write(f"case {system.case_kind}\n")
    out.write(f"d {system.d}\nm {system.m}\nt {system.t}\njet_order {system.jet_order}\n")
    out.write(f"deformation {_deformation_text(system.deformation)}\n")
    out.write(f"prime {prime or 0}\n")
    out.write(f"unknowns {system.num_unknowns}\n")
    out.write(f"rows {system.total_rows}\n")
    out.write(f"blocks {len(system.blocks)}\n")
    r = 0
    for block in system.blocks:
        out.write(f"block {block.power} {len(block.rows)}\n")
        for row in block.rows:
            for u, c in row.items():
                if prime:
                    c %= prime
                    if not c:
                        continue
                out.write(f"{r} {u} {c}\n")
            r += 1


def read_system(src: Union[str, TextIO]) -> ConstraintSystem:
    """Inverse of :func:`write_system` (accepts a path or an open stream)."""
    if isinstance(src, str):
        with open(src) as fh:
            return read_system(fh)
    first = src.readline().strip()
    if first != FORMAT_TAG:
        raise ConfigError(f"not a constraint system file (header {first!r})")
    head = {}
    for _ in range(10):
        k, v = src.readline().split(None, 1)
        head[k] = v.strip()
    blocks: List[ConstraintBlock] = []
    sizes = []
    current: Optional[ConstraintBlock] = None
    rows: Dict[int, Row] = {}
    for line in src:
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "block":
            current = ConstraintBlock(int(parts[1]), [], [], 0)
            blocks.append(current)
            sizes.append(int(parts[2]))
            continue
        r, u, c = int(parts[0]), int(parts[1]), int(parts[2])
        rows.setdefault(r, {})[u] = c
    r = 0
    for block, n in zip(blocks, sizes):
        block.rows = [rows.get(r + k, {}) for k in range(n)]
        block.provenance = [((), ())] * n
        block.raw_count = n
        r += n
    if r != int(head["rows"]):
        raise InvariantViolation("row count in header disagrees with blocks")
    return ConstraintSystem(head["case"], int(head["d"]), int(head["m"]), int(head["t"]),
                            int(head["jet_order"]), _parse_deformation(head["deformation"]),
                            int(head["unknowns"]), blocks, {"prime": int(head["prime"])})
