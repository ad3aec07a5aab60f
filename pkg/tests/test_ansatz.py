from __future__ import annotations

import csv
import io
from math import comb

import pytest

from jetvanish.ansatz import build_ansatz, degree_bound, make_key, source_denominator_exponent
from jetvanish.errors import UnsupportedCaseError, UsageError
from jetvanish.polycore import iter_exponents
from jetvanish.scenario import build_scenario


@pytest.fixture(scope="module")
def log12():
    return build_scenario("logarithmic", 12)[0]


@pytest.fixture(scope="module")
def cpt17():
    return build_scenario("compact", 17)[0]


def test_log_bounds_d12(log12):
    # hand count: (m-2k)(d-1) - 2(m-3k-j) - j - 4k - t with d=12, m=3, t=2
    assert [degree_bound(log12, "A", j, 3, 2) for j in range(4)] == [25, 26, 27, 28]
    assert degree_bound(log12, "B", 0, 3, 2) == 5


def test_compact_bounds_d17(cpt17):
    # (m-2k)(d-1) - 2(m-3k) - 3k - t with d=17, m=3, t=3
    assert {degree_bound(cpt17, "A", j, 3, 3) for j in range(4)} == {39}
    assert degree_bound(cpt17, "B", 0, 3, 3) == 10


def test_bound_errors(cpt17, log12):
    with pytest.raises(UsageError):
        degree_bound(cpt17, "E", 0, 12, 3)
    with pytest.raises(UsageError):
        degree_bound(log12, "B", 1, 3, 2)
    with pytest.raises(UsageError):
        degree_bound(log12, "Q", 0, 3, 2)


@pytest.mark.parametrize("m", range(3, 12))
def test_hierarchy_is_triangular(cpt17, m):
    for k in range(1, min(3, m // 3) + 1):
        fam, prev = "ABCD"[k], "ABCD"[k - 1]
        assert degree_bound(cpt17, fam, 0, m, 3) < degree_bound(cpt17, prev, 0, m, 3) + 2 * 16


def test_log_family_sizes_are_stars_and_bars(log12):
    ans = build_ansatz(log12, 3, 2)
    assert ans.family_sizes() == {"A0": comb(27, 2), "A1": comb(28, 2), "A2": comb(29, 2),
                                  "A3": comb(30, 2), "B0": comb(7, 2)}
    assert ans.num_unknowns == 1591


def test_compact_sizes_respect_y_cap():
    spec = build_scenario("compact", 5)[0]
    ans = build_ansatz(spec, 3, 1)
    bound = degree_bound(spec, "A", 0, 3, 1)
    brute = sum(1 for e in iter_exponents((bound, 4, bound)) if sum(e) <= bound)
    assert len(ans.bases[make_key("A", 0, 3)]) == brute
    assert all(mono[1] < 5 for info in ans.registry for mono in [info.mono])


def test_registry_ids_are_contiguous(log12):
    ans = build_ansatz(log12, 4, 2)
    ids = [info.uid for info in ans.registry]
    assert ids == list(range(ans.num_unknowns))
    for key in ans.keys():
        assert [ans.registry[u].key for u in ans.uids(key)] == [key] * len(ans.bases[key])


def test_registry_csv(log12):
    ans = build_ansatz(log12, 3, 2)
    rows = list(csv.DictReader(io.StringIO(ans.registry_csv())))
    assert len(rows) == ans.num_unknowns
    assert rows[0] == {"id": "0", "family": "A", "j": "0", "exponents": "0 0"}


def test_absent_families_are_omitted():
    spec = build_scenario("logarithmic", 5)[0]
    ans = build_ansatz(spec, 3, 1)
    assert all(k.family == "A" for k in ans.keys())


def test_denominator_exponent():
    assert source_denominator_exponent(make_key("A", 0, 7), 7) == 7
    assert source_denominator_exponent(make_key("C", 1, 7), 7) == 3


@pytest.mark.parametrize("case,m,t,jet", [("compact", 12, 3, 2), ("logarithmic", 15, 3, 2),
                                          ("compact", 3, 0, 2), ("compact", 0, 1, 2), ("compact", 3, 1, 3)])
def test_unsupported_ranges(case, m, t, jet):
    spec = build_scenario(case, 17)[0]
    with pytest.raises(UnsupportedCaseError):
        build_ansatz(spec, m, t, jet)


def test_one_jet_mode_has_only_family_a(cpt17):
    ans = build_ansatz(cpt17, 2, 0, jet_order=1)
    assert {k.family for k in ans.keys()} == {"A"}
    assert len(ans.keys()) == 3
