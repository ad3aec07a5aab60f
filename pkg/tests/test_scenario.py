from __future__ import annotations

import pytest

from jetvanish.errors import UsageError
from jetvanish.polycore import SparsePoly
from jetvanish.scenario import (build_scenario, default_deformation, divides_power, divisibility_threshold,
                                normal_form)
from properties import check_divides, check_normal_form


def test_compact_equation_and_partials():
    spec, pack = build_scenario("compact", 17)
    assert spec.R.to_text() == "1 + 1 * x^8 + 1 * x^17 + 1 * y^17 + 1 * z^17"
    assert pack["z"] == SparsePoly(3, {(0, 0, 16): 17})
    assert pack["x"] == SparsePoly(3, {(16, 0, 0): 17, (7, 0, 0): 8})
    assert pack["zx"] == pack["xz"] and pack["xz"].is_zero()


def test_log_default_deformation():
    spec, pack = build_scenario("logarithmic", 12)
    assert spec.R.to_text() == "1 + 1 * x^6 + 1 * x^12 + 1 * y^12"
    assert pack["y"] == SparsePoly(2, {(0, 11): 12})
    assert default_deformation("logarithmic", 5) == (((2, 0), 1),)


def test_pure_fermat_is_allowed():
    spec, _ = build_scenario("compact", 17, [])
    assert spec.R.to_text() == "1 + 1 * x^17 + 1 * y^17 + 1 * z^17"


@pytest.mark.parametrize("deformation", [
    [((0, 1, 0), 1)],          # touches y
    [((1, 0, 3), 1)],          # touches z
    [((18, 0, 0), 1)],         # degree too high
    [((2, 0, 0), 0)],          # zero coefficient
])
def test_bad_compact_deformations(deformation):
    with pytest.raises(UsageError):
        build_scenario("compact", 17, deformation)


def test_bad_case_kind():
    with pytest.raises(UsageError):
        build_scenario("projective", 5)


def test_reduction_of_pure_power():
    spec, _ = build_scenario("compact", 5)
    nf = normal_form(SparsePoly(3, {(0, 5, 0): 1}), spec)
    assert nf == SparsePoly(3, {(0, 0, 0): -1, (5, 0, 0): -1, (0, 0, 5): -1, (2, 0, 0): -1})


def test_log_normal_form_is_identity():
    spec, _ = build_scenario("logarithmic", 5)
    F = SparsePoly(2, {(0, 9): 4})
    assert normal_form(F, spec) is F


def test_divides_power_examples():
    spec, _ = build_scenario("compact", 5)
    assert divides_power(SparsePoly(3, {(1, 2, 8): 3}), 2, spec)
    assert not divides_power(SparsePoly(3, {(1, 2, 7): 3, (0, 0, 9): 1}), 2, spec)
    assert divides_power(SparsePoly.zero(3), 3, spec)
    with pytest.raises(UsageError):
        divisibility_threshold(0, spec)


def test_normal_form_against_groebner_remainder():
    good, total = check_normal_form(60, seed=11)
    assert good == total


def test_divides_power_against_ideal_membership():
    good, total = check_divides(60, seed=12)
    assert good == total
