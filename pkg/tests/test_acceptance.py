"""Acceptance suite: one PASS/FAIL line per criterion, printed to the terminal.

Run with ``pytest tests/test_acceptance.py -v``.  Set ``JETVANISH_FULL_SWEEP=1``
to extend the pure Fermat control to every pair of its table (hundreds of
thousands of unknowns; hours, not minutes).
"""
from __future__ import annotations

import os
import time

import pytest

from jetvanish.linsolve import NONVANISHING_OVER_Q, VANISHES_OVER_Q, default_primes, nullity
from jetvanish.runner import CaseConfig, build_pipeline, presets, run_case
from properties import (check_divides, check_normal_form, check_numeric_consistency, check_plant_recover,
                        check_rank_oracle)

# limits pinned from the acceptance criteria
LOG_LIMIT_S = 600.0
COMPACT_GATE_LIMIT_S = 24 * 3600.0
ONE_JET_LIMIT_S = 60.0
THREADS_N = 2
FULL_SWEEP = bool(os.environ.get("JETVANISH_FULL_SWEEP"))

LOG_D12 = [(3, 2), (4, 2), (5, 3), (6, 3)]
LOG_D13 = [(3, 3), (4, 4)]
COMPACT_D17 = [(3, 3), (4, 4)]
ONE_JET = [1, 2]

_runs = {}


def _run(cfg: CaseConfig, threads: int = 1):
    key = (cfg.config_hash(), threads)
    if key not in _runs:
        t0 = time.perf_counter()
        report = run_case(cfg, threads)
        _runs[key] = (report, time.perf_counter() - t0)
    return _runs[key]


def _line(capsys, ok: bool, tag: str, text: str) -> None:
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] {tag}: {text}", end="")


def _nullities(report):
    return "/".join(str(r["nullity"]) for r in report.data["per_prime"])


def _gate(capsys, tag, cfg, limit):
    report, secs = _run(cfg)
    ok = report.verdict == VANISHES_OVER_Q and secs <= limit
    ok = ok and len(report.data["per_prime"]) == 2 and all(r["nullity"] == 0 for r in report.data["per_prime"])
    _line(capsys, ok, tag, f"{cfg.case_kind} d={cfg.d} (m,t)=({cfg.m},{cfg.t}) -> {report.verdict}, "
                           f"unknowns {report.data['unknowns']}, nullity {_nullities(report)} mod two primes, "
                           f"{secs:.1f}s (limit {limit:.0f}s)")
    return ok


@pytest.mark.parametrize("m,t", LOG_D12)
def test_c1_log_d12(capsys, m, t):
    assert _gate(capsys, "C1", CaseConfig("logarithmic", 12, m, t), LOG_LIMIT_S)


@pytest.mark.parametrize("m,t", LOG_D13)
def test_c2_log_d13(capsys, m, t):
    assert _gate(capsys, "C2", CaseConfig("logarithmic", 13, m, t), LOG_LIMIT_S)


@pytest.mark.parametrize("m,t", COMPACT_D17)
def test_c3_compact_d17(capsys, m, t):
    cfg = CaseConfig("compact", 17, m, t)
    ok = _gate(capsys, "C3", cfg, COMPACT_GATE_LIMIT_S)
    report, _ = _run(cfg)
    stats = report.data["per_prime"][0]
    with capsys.disabled():
        print(f"\n       rows/block {report.data['rows_per_block']} raw {report.data['raw_rows_per_block']}"
              f" rank {stats['rank']} block ranks {stats['block_ranks']} components {stats['components']}"
              f" largest {stats['largest_component']} dense {stats['dense_components']} fill {stats['fill']}"
              f" phases {report.data['runtime']['seconds']}", end="")
    assert ok


@pytest.mark.parametrize("m", ONE_JET)
def test_c4_one_jet_compact_d17(capsys, m):
    cfg = CaseConfig("compact", 17, m, 0, jet_order=1)
    report, secs = _run(cfg)
    ok = report.verdict == VANISHES_OVER_Q and secs <= ONE_JET_LIMIT_S
    ok = ok and all(r["nullity"] == 0 for r in report.data["per_prime"])
    _line(capsys, ok, "C4", f"1-jets compact d=17 m={m} t=0 -> nullity {_nullities(report)}, "
                            f"unknowns {report.data['unknowns']}, {secs:.1f}s (limit {ONE_JET_LIMIT_S:.0f}s)")
    assert ok


PROPERTIES = [
    ("normal_form round trip and idempotence", lambda: check_normal_form(500, seed=2024)),
    ("divides_power vs ideal membership, d in {5,7}", lambda: check_divides(200, seed=2024)),
    ("numeric consistency compact d=5 m=3", lambda: _consistency("compact", 3)),
    ("numeric consistency compact d=5 m=4", lambda: _consistency("compact", 4)),
    ("numeric consistency logarithmic d=5 m=3", lambda: _consistency("logarithmic", 3)),
    ("numeric consistency logarithmic d=5 m=4", lambda: _consistency("logarithmic", 4)),
    ("rank vs rational oracle, <= 60x100", lambda: check_rank_oracle(100, seed=2024)),
    ("plant and recover", lambda: check_plant_recover(50, seed=2024)),
]


def _consistency(case, m):
    """100 on-surface jets: one random section per jet so both sides vary."""
    good = 0
    for seed in range(100):
        g, _ = check_numeric_consistency(case, 5, m, 1, seed=seed)
        good += g
    return good, 100


@pytest.mark.parametrize("name,check", PROPERTIES, ids=[p[0] for p in PROPERTIES])
def test_c5_property_suite(capsys, name, check):
    t0 = time.perf_counter()
    good, total = check()
    ok = good == total
    _line(capsys, ok, "C5", f"{name}: {good}/{total} agree ({time.perf_counter() - t0:.1f}s)")
    assert ok


DETERMINISM_CASES = ([CaseConfig("logarithmic", 12, m, t) for m, t in LOG_D12]
                     + [CaseConfig("logarithmic", 13, m, t) for m, t in LOG_D13]
                     + [CaseConfig("compact", 17, m, t) for m, t in COMPACT_D17]
                     + [CaseConfig("compact", 17, m, 0, jet_order=1) for m in ONE_JET])


@pytest.mark.parametrize("cfg", DETERMINISM_CASES, ids=[c.label for c in DETERMINISM_CASES])
def test_c6_thread_determinism(capsys, cfg):
    one, _ = _run(cfg, 1)
    many, _ = _run(cfg, THREADS_N)
    ok = one.to_json(strip_timing=True) == many.to_json(strip_timing=True)
    _line(capsys, ok, "C6", f"{cfg.label}: report with 1 and {THREADS_N} threads "
                            f"{'byte-identical' if ok else 'DIFFERS'} (timing stripped)")
    assert ok


FERMAT = presets()["fermat-control-d17"]


@pytest.mark.parametrize("cfg", FERMAT, ids=[c.label for c in FERMAT])
def test_c7_fermat_control(capsys, cfg):
    if (cfg.m, cfg.t) not in COMPACT_D17 and not FULL_SWEEP:
        n = build_pipeline(cfg).ansatz.num_unknowns
        with capsys.disabled():
            print(f"\n[SKIP] C7: {cfg.label} ({n} unknowns) needs JETVANISH_FULL_SWEEP=1", end="")
        pytest.skip("full Fermat sweep not requested")
    report, secs = _run(cfg)
    info = report.data["witness"] or {}
    if report.verdict == VANISHES_OVER_Q:
        ok = True
        what = "nullity 0, nothing to verify"
    else:
        ok = report.verdict == NONVANISHING_OVER_Q and info.get("verified") is True
        what = f"nullity {_nullities(report)}, {info.get('vectors', 0)} exact witness vectors verified={info.get('verified')}"
    _line(capsys, ok, "C7", f"pure Fermat d=17 (m,t)=({cfg.m},{cfg.t}): {report.verdict}, {what}, {secs:.1f}s")
    assert ok


def test_default_primes_are_independent():
    """Sanity on the two moduli used by every gate above."""
    p1, p2 = default_primes(2)
    assert p1 != p2 and p1 == 2 ** 31 - 1
    cfg = CaseConfig("logarithmic", 12, 3, 2)
    assert nullity(build_pipeline(cfg).system, p2).nullity == 0
