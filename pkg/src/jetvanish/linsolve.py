"""Rank, nullity and kernel vectors of the constraint system over prime fields.

Rows are reduced modulo ``p`` and split into connected components of the
row/column incidence graph (the systems carry a hidden grading, so the
components are small).  Each component is eliminated block by block in the
divisibility order; inside a block the next pivot row is the shortest pending
row (Markowitz-style) and its lowest column becomes the pivot.  Components
above a size threshold go through a dense ``numpy`` reduction instead, which
needs ``p < 2**31`` so that products fit in int64.

``certify_rational`` turns modular answers into statements over Q: a prime
with nullity zero proves vanishing; otherwise kernel vectors are lifted by CRT
and rational reconstruction and checked exactly against the integer rows.
"""
from __future__ import annotations

import heapq
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sympy import isprime, prevprime
from sympy.ntheory.modular import crt

from .constraints import ConstraintSystem
from .errors import InvariantViolation, UsageError

DEFAULT_PRIME = 2147483647  # 2**31 - 1, largest prime usable by the dense path
DENSE_LIMIT = 2 ** 31
DEFAULT_DENSE_THRESHOLD = 1500

VANISHES_OVER_Q = "VANISHES_OVER_Q"
NONVANISHING_OVER_Q = "NONVANISHING_OVER_Q"
NONTRIVIAL_MOD_ALL = "NONTRIVIAL_MOD_ALL"


def _check_prime(p: int) -> None:
    if not isprime(p):
        raise UsageError(f"{p} is not prime")


class EliminationState:
    """Sparse echelon form mod ``p``; pivot rows are monic on their pivot column."""

    def __init__(self, p: int):
        _check_prime(p)
        self.p = p
        self.pivots: Dict[int, Dict[int, int]] = {}
        self.created: Dict[int, int] = {}
        self.block_ranks: List[int] = []
        self.zero_rows = 0

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def fill(self) -> int:
        return sum(len(r) for r in self.pivots.values())

    def solved_zero(self) -> List[int]:
        """Unknowns forced to vanish outright (pivot rows with a single entry)."""
        return sorted(c for c, r in self.pivots.items() if len(r) == 1)

    def reduce(self, row: Dict[int, int]) -> Dict[int, int]:
        """Remove every pivot column from ``row`` (a fresh dict is returned)."""
        p = self.p
        row = dict(row)
        heap = [(self.created[c], c) for c in row if c in self.pivots]
        heapq.heapify(heap)
        while heap:
            _, c = heapq.heappop(heap)
            f = row.get(c)
            if not f:
                continue
            for col, v in self.pivots[c].items():
                nv = (row.get(col, 0) - f * v) % p
                if nv:
                    if col not in row and col in self.pivots:
                        heapq.heappush(heap, (self.created[col], col))
                    row[col] = nv
                else:
                    row.pop(col, None)
        return row

    def _add_pivot(self, row: Dict[int, int], col: int) -> None:
        inv = pow(row[col], -1, self.p)
        p = self.p
        self.pivots[col] = {c: v * inv % p for c, v in row.items()}
        self.created[col] = len(self.created)

    def back_substitute(self) -> Dict[int, Dict[int, int]]:
        """Fully reduced pivot rows (each pivot column appears in exactly one row)."""
        p = self.p
        done: Dict[int, Dict[int, int]] = {}
        for c in sorted(self.pivots, key=lambda c: -self.created[c]):
            row = dict(self.pivots[c])
            for col in [k for k in row if k != c and k in done]:
                f = row.pop(col)
                for k, v in done[col].items():
                    if k == col:
                        continue
                    nv = (row.get(k, 0) - f * v) % p
                    if nv:
                        row[k] = nv
                    else:
                        row.pop(k, None)
            done[c] = row
        return done


def eliminate_block(state: EliminationState, rows: Iterable[Dict[int, int]]) -> EliminationState:
    """Absorb one block of rows: reduce against old pivots, then Markowitz-select new ones."""
    p = state.p
    pending: Dict[int, Dict[int, int]] = {}
    col_index: Dict[int, set] = {}
    for idx, row in enumerate(rows):
        r = state.reduce({c: v % p for c, v in row.items() if v % p})
        if not r:
            state.zero_rows += 1
            continue
        pending[idx] = r
        for c in r:
            col_index.setdefault(c, set()).add(idx)
    heap = [(len(r), idx) for idx, r in pending.items()]
    heapq.heapify(heap)
    added = 0
    while heap:
        ln, idx = heapq.heappop(heap)
        r = pending.get(idx)
        if r is None or len(r) != ln:
            continue
        del pending[idx]
        col = min(r)
        for c in r:
            col_index[c].discard(idx)
        state._add_pivot(r, col)
        added += 1
        piv = state.pivots[col]
        for other in sorted(col_index.get(col, ())):
            o = pending[other]
            f = o[col]
            for c, v in piv.items():
                nv = (o.get(c, 0) - f * v) % p
                if nv:
                    if c not in o:
                        col_index.setdefault(c, set()).add(other)
                    o[c] = nv
                else:
                    if c in o:
                        del o[c]
                        col_index[c].discard(other)
            if o:
                heapq.heappush(heap, (len(o), other))
            else:
                del pending[other]
                state.zero_rows += 1
    state.block_ranks.append(added)
    return state


# ---------------------------------------------------------------------------
# dense path

def rref_mod(A: np.ndarray, p: int) -> Tuple[np.ndarray, List[int]]:
    """Reduced row echelon form of an int64 matrix mod ``p`` (leftmost pivots)."""
    if p >= DENSE_LIMIT:
        raise UsageError("dense reduction needs p < 2**31")
    A = np.array(A, dtype=np.int64) % p
    nrows, ncols = A.shape
    r = 0
    pivcols: List[int] = []
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            A[[r, k]] = A[[k, r]]
        inv = pow(int(A[r, c]), -1, p)
        A[r] = A[r] * inv % p
        colv = A[:, c].copy()
        colv[r] = 0
        idx = np.flatnonzero(colv)
        if idx.size:
            A[idx] = (A[idx] - colv[idx, None] * A[r]) % p
        pivcols.append(c)
        r += 1
    return A[:r], pivcols


def _null_from_rref(E: np.ndarray, pivcols: List[int], ncols: int, p: int) -> List[Dict[int, int]]:
    piv = set(pivcols)
    out = []
    for f in range(ncols):
        if f in piv:
            continue
        vec = {f: 1}
        if E.shape[0]:
            colv = E[:, f]
            for i in np.flatnonzero(colv):
                vec[pivcols[i]] = int(-colv[i] % p)
        out.append(vec)
    return out


# ---------------------------------------------------------------------------
# components

@dataclass
class Component:
    cols: List[int]
    blocks: List[List[Dict[int, int]]]

    @property
    def nrows(self) -> int:
        return sum(len(b) for b in self.blocks)


def reduce_system(system: ConstraintSystem, p: int) -> List[List[Dict[int, int]]]:
    out = []
    for block in system.blocks:
        rows = []
        for row in block.rows:
            r = {u: c % p for u, c in row.items() if c % p}
            if r:
                rows.append(r)
        out.append(rows)
    return out


def split_components(blocks: List[List[Dict[int, int]]], ncols: int) -> Tuple[List[Component], List[int]]:
    """Connected components (ordered by smallest column) and the columns touched by no row."""
    parent = list(range(ncols))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    used = bytearray(ncols)
    for rows in blocks:
        for r in rows:
            it = iter(r)
            a = find(next(it))
            used[a] = 1
            for u in it:
                used[u] = 1
                b = find(u)
                if a != b:
                    parent[b] = a
    groups: Dict[int, List[int]] = {}
    free = []
    for u in range(ncols):
        if used[u]:
            groups.setdefault(find(u), []).append(u)
        else:
            free.append(u)
    comps = {root: Component(cols, [[] for _ in blocks]) for root, cols in groups.items()}
    for bi, rows in enumerate(blocks):
        for r in rows:
            comps[find(next(iter(r)))].blocks[bi].append(r)
    ordered = sorted(comps.values(), key=lambda c: c.cols[0])
    return ordered, free


@dataclass
class ComponentResult:
    rank: int
    nullity: int
    block_ranks: List[int]
    fill: int
    dense: bool
    basis: Optional[List[Dict[int, int]]] = None


def _solve_component(comp: Component, p: int, want_basis: bool, dense_threshold: int,
                     canonical: bool) -> ComponentResult:
    n = len(comp.cols)
    use_dense = (n >= dense_threshold or canonical) and p < DENSE_LIMIT
    if use_dense:
        local = {c: i for i, c in enumerate(comp.cols)}
        E = np.zeros((0, n), dtype=np.int64)
        pivcols: List[int] = []
        block_ranks = []
        for rows in comp.blocks:
            if not rows:
                block_ranks.append(0)
                continue
            B = np.zeros((len(rows), n), dtype=np.int64)
            for i, r in enumerate(rows):
                for c, v in r.items():
                    B[i, local[c]] = v
            before = len(pivcols)
            E, pivcols = rref_mod(np.vstack([E, B]), p)
            block_ranks.append(len(pivcols) - before)
        basis = None
        if want_basis:
            basis = [{comp.cols[k]: v for k, v in vec.items()} for vec in _null_from_rref(E, pivcols, n, p)]
            if canonical:
                basis = canonical_basis(basis, p)
        return ComponentResult(len(pivcols), n - len(pivcols), block_ranks, int(np.count_nonzero(E)), True, basis)
    state = EliminationState(p)
    for rows in comp.blocks:
        eliminate_block(state, rows)
    basis = None
    if want_basis:
        rref = state.back_substitute()
        basis = []
        for f in comp.cols:
            if f in rref:
                continue
            vec = {f: 1}
            for c, row in rref.items():
                v = row.get(f)
                if v:
                    vec[c] = -v % p
            basis.append(vec)
        if canonical:
            basis = canonical_basis(basis, p)
    return ComponentResult(state.rank, n - state.rank, state.block_ranks, state.fill, False, basis)


def _solve_many(args):
    comps, p, want_basis, dense_threshold, canonical = args
    return [_solve_component(c, p, want_basis, dense_threshold, canonical) for c in comps]


@dataclass
class NullspaceResult:
    prime: int
    num_unknowns: int
    rank: int
    nullity: int
    elapsed: float
    block_ranks: List[int]
    stats: Dict[str, object] = field(default_factory=dict)
    basis: Optional[List[Dict[int, int]]] = None

    def summary(self) -> Dict[str, object]:
        return {"prime": self.prime, "unknowns": self.num_unknowns, "rank": self.rank,
                "nullity": self.nullity, "block_ranks": self.block_ranks,
                "elapsed_s": round(self.elapsed, 3), **self.stats}


def check_admissible(system: ConstraintSystem, p: int) -> None:
    """``p`` must be prime and divide neither ``d`` nor a deformation coefficient."""
    _check_prime(p)
    if system.d and system.d % p == 0:
        raise UsageError(f"prime {p} divides the degree {system.d}")
    for _, c in system.deformation:
        if c % p == 0:
            raise UsageError(f"prime {p} divides a deformation coefficient")


def _run(system: ConstraintSystem, p: int, want_basis: bool, threads: int,
         dense_threshold: int, canonical: bool) -> NullspaceResult:
    check_admissible(system, p)
    t0 = time.perf_counter()
    blocks = reduce_system(system, p)
    comps, free = split_components(blocks, system.num_unknowns)
    if threads > 1 and len(comps) > 1:
        chunks = [comps[i::threads] for i in range(threads)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_solve_many, [(c, p, want_basis, dense_threshold, canonical) for c in chunks]))
        results: List[Optional[ComponentResult]] = [None] * len(comps)
        for i, part in enumerate(parts):
            for j, res in enumerate(part):
                results[i + j * threads] = res
    else:
        results = _solve_many((comps, p, want_basis, dense_threshold, canonical))
    rank = sum(r.rank for r in results)
    nb = len(system.blocks)
    block_ranks = [sum(r.block_ranks[i] for r in results) for i in range(nb)]
    basis = None
    if want_basis:
        basis = []
        for r in results:
            basis.extend(r.basis)
        basis.extend({u: 1} for u in free)
        basis.sort(key=lambda v: min(v))
    stats = {"components": len(comps), "untouched_columns": len(free),
             "largest_component": max((len(c.cols) for c in comps), default=0),
             "dense_components": sum(r.dense for r in results),
             "fill": sum(r.fill for r in results)}
    res = NullspaceResult(p, system.num_unknowns, rank, system.num_unknowns - rank,
                          time.perf_counter() - t0, block_ranks, stats, basis)
    if basis is not None:
        if len(basis) != res.nullity:
            raise InvariantViolation("kernel basis size differs from nullity")
        if failing_vectors(system, basis, p):
            raise InvariantViolation("kernel vector fails a row")
    return res


def nullity(system: ConstraintSystem, p: int = DEFAULT_PRIME, threads: int = 1,
            dense_threshold: int = DEFAULT_DENSE_THRESHOLD) -> NullspaceResult:
    """Rank and nullity modulo ``p``."""
    return _run(system, p, False, threads, dense_threshold, False)


def nullspace_basis(system: ConstraintSystem, p: int = DEFAULT_PRIME, threads: int = 1,
                    dense_threshold: int = DEFAULT_DENSE_THRESHOLD,
                    canonical: bool = False) -> NullspaceResult:
    """Kernel basis mod ``p``, every vector checked against all rows.

    With ``canonical=True`` the basis is the reduced echelon form of the kernel,
    which is the same object for every prime of good reduction.
    """
    return _run(system, p, True, threads, dense_threshold, canonical)


def canonical_basis(vectors: Sequence[Dict[int, int]], p: int) -> List[Dict[int, int]]:
    """Reduced echelon basis of the span of ``vectors`` (leftmost pivots, monic)."""
    state = EliminationState(p)
    # deterministic: pivot on the lowest column of each row in turn
    for vec in vectors:
        r = state.reduce({c: v % p for c, v in vec.items() if v % p})
        if r:
            state._add_pivot(r, min(r))
    rref = state.back_substitute()
    return [rref[c] for c in sorted(rref)]


# ---------------------------------------------------------------------------
# rational certification

def rational_reconstruct(a: int, M: int) -> Optional[Fraction]:
    """``n/d`` with ``n = a d mod M``, ``|n|, d <= sqrt(M/2)``; None when none exists."""
    a %= M
    bound = isqrt(M // 2)
    r0, r1 = M, a
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound or gcd(r1, abs(s1)) != 1:
        return None
    return Fraction(r1, s1)


def _integer_vector(vec: Dict[int, Fraction]) -> Dict[int, int]:
    den = 1
    for v in vec.values():
        den = den * v.denominator // gcd(den, v.denominator)
    ints = {u: int(v * den) for u, v in vec.items() if v}
    g = 0
    for v in ints.values():
        g = gcd(g, v)
    return {u: v // g for u, v in sorted(ints.items())} if g else {}


@dataclass
class Certificate:
    verdict: str
    nullities: Dict[int, int]
    primes_used: List[int]
    witness: List[Dict[int, int]] = field(default_factory=list)
    detail: str = ""

    def summary(self) -> Dict[str, object]:
        return {"verdict": self.verdict, "nullities": {str(k): v for k, v in self.nullities.items()},
                "primes_used": self.primes_used, "witness_vectors": len(self.witness),
                "detail": self.detail}


def default_primes(count: int, start: int = DEFAULT_PRIME) -> List[int]:
    out = [start if isprime(start) else prevprime(start)]
    while len(out) < count:
        out.append(prevprime(out[-1]))
    return out


def certify_rational(system: ConstraintSystem, primes: Optional[Sequence[int]] = None,
                     threads: int = 1, max_extra_primes: int = 6,
                     dense_threshold: int = DEFAULT_DENSE_THRESHOLD) -> Certificate:
    """Sound verdict over Q from modular computations.

    Nullity over Q never exceeds nullity mod p, so one prime with nullity zero
    proves vanishing.  Nonvanishing is only claimed for a kernel vector with
    rational entries that annihilates every integer row exactly.
    """
    primes = list(primes) if primes else default_primes(2)
    nullities: Dict[int, int] = {}
    for p in primes:
        res = nullity(system, p, threads, dense_threshold)
        nullities[p] = res.nullity
        if res.nullity == 0:
            return Certificate(VANISHES_OVER_Q, nullities, [p], [], f"full column rank mod {p}")
    # lift the canonical kernel basis
    pool = list(primes)
    extra = prevprime(min(pool))
    bases: Dict[int, List[Dict[int, int]]] = {}
    attempts = 0
    while True:
        for p in pool:
            if p not in bases:
                res = nullspace_basis(system, p, threads, dense_threshold, canonical=True)
                nullities[p] = res.nullity
                bases[p] = res.basis
        good_null = min(nullities[p] for p in bases)
        good = [p for p in bases if nullities[p] == good_null]
        shapes = {}
        for p in good:
            shape = tuple(tuple(sorted(v)) for v in bases[p])
            shapes.setdefault(shape, []).append(p)
        use = max(shapes.values(), key=len)
        witness = _lift(system, [bases[p] for p in use], use)
        if witness:
            return Certificate(NONVANISHING_OVER_Q, nullities, use, witness,
                               f"{len(witness)} exact kernel vectors from {len(use)} primes")
        if attempts >= max_extra_primes:
            return Certificate(NONTRIVIAL_MOD_ALL, nullities, use, [],
                               "rational reconstruction did not verify")
        pool.append(extra)
        extra = prevprime(extra)
        attempts += 1


def _lift(system: ConstraintSystem, bases: List[List[Dict[int, int]]], primes: List[int]) -> List[Dict[int, int]]:
    M = 1
    for p in primes:
        M *= p
    out = []
    for idx in range(len(bases[0])):
        support = sorted(bases[0][idx])
        vec: Dict[int, Fraction] = {}
        ok = True
        for u in support:
            residues = [b[idx].get(u, 0) for b in bases]
            a = int(crt(primes, residues)[0]) if len(primes) > 1 else residues[0]
            q = rational_reconstruct(a, M)
            if q is None:
                ok = False
                break
            vec[u] = q
        if not ok:
            continue
        ints = _integer_vector(vec)
        if ints:
            out.append(ints)
    bad = set(failing_vectors(system, out, None))
    return [v for i, v in enumerate(out) if i not in bad]


def failing_vectors(system: ConstraintSystem, vectors: Sequence[Dict[int, int]],
                    p: Optional[int]) -> List[int]:
    """Indices of vectors violating some row (exactly, or mod ``p``); only rows meeting the support are read."""
    rows = list(system.rows())
    by_col: Dict[int, List[int]] = {}
    for i, r in enumerate(rows):
        for u in r:
            by_col.setdefault(u, []).append(i)
    bad = []
    for k, vec in enumerate(vectors):
        touched = set()
        for u in vec:
            touched.update(by_col.get(u, ()))
        for i in touched:
            s = sum(c * vec.get(u, 0) for u, c in rows[i].items())
            if (s % p if p else s) != 0:
                bad.append(k)
                break
    return bad
