"""Exact linear-algebra engine for vanishing of negatively twisted invariant jet differentials.

Pipeline: :mod:`scenario` (equation and quotient ring) -> :mod:`ansatz`
(unknown coefficients) -> :mod:`jettrans` (chart change) -> :mod:`constraints`
(divisibility rows) -> :mod:`linsolve` (modular rank and certification) ->
:mod:`runner` (configs, reports, batches).
"""
from __future__ import annotations

__version__ = "0.1.0"

from .ansatz import JetTermKey, build_ansatz, degree_bound  # noqa: E402
from .constraints import ConstraintSystem, assemble, truncate  # noqa: E402
from .errors import (ConfigError, InvariantViolation, JetVanishError, SamplingError,  # noqa: E402
                     UnsupportedCaseError, UsageError)
from .jettrans import numeric_consistency, substitute_first_jet, substitute_wronskian, transition  # noqa: E402
from .linsolve import (NONTRIVIAL_MOD_ALL, NONVANISHING_OVER_Q, VANISHES_OVER_Q,  # noqa: E402
                       certify_rational, eliminate_block, nullity, nullspace_basis)
from .polycore import GF, QQ, ZZ, ParamPoly, SparsePoly  # noqa: E402
from .scenario import build_scenario, divides_power, normal_form  # noqa: E402

__all__ = [
    "__version__", "JetTermKey", "build_ansatz", "degree_bound", "ConstraintSystem", "assemble",
    "truncate", "ConfigError", "InvariantViolation", "JetVanishError", "SamplingError",
    "UnsupportedCaseError", "UsageError", "numeric_consistency", "substitute_first_jet",
    "substitute_wronskian", "transition", "NONTRIVIAL_MOD_ALL", "NONVANISHING_OVER_Q",
    "VANISHES_OVER_Q", "certify_rational", "eliminate_block", "nullity", "nullspace_basis",
    "GF", "QQ", "ZZ", "ParamPoly", "SparsePoly", "build_scenario", "divides_power", "normal_form",
]
