"""Totally positive integers of fixed trace in totally real cubic fields."""

from .asymptotics import (
    MainCoefficient,
    compare_report,
    fit_coefficients,
    log_grid,
    main_coefficient,
    weighted_sum,
    weighted_sum_table,
)
from .counting import CountSeries, count_exact, count_many, count_naive, error_series, geometric_estimate, triangle
from .field import Field, FieldElement, FieldError, TraceBasis, build_field, load_field, parse_field_spec
from .lseries import LValue, PrincipalIdealStream, enumerate_principal, l_value, smoothed_sum
from .units import (
    SignCharacter,
    UnitSearchError,
    UnitSystem,
    find_units,
    good_characters,
    regulator,
    totally_positive_gens,
)

__version__ = "0.1.0"

__all__ = [
    "CountSeries",
    "Field",
    "FieldElement",
    "FieldError",
    "LValue",
    "MainCoefficient",
    "PrincipalIdealStream",
    "SignCharacter",
    "TraceBasis",
    "UnitSearchError",
    "UnitSystem",
    "build_field",
    "compare_report",
    "count_exact",
    "count_many",
    "count_naive",
    "enumerate_principal",
    "error_series",
    "find_units",
    "fit_coefficients",
    "geometric_estimate",
    "good_characters",
    "l_value",
    "load_field",
    "log_grid",
    "main_coefficient",
    "parse_field_spec",
    "regulator",
    "smoothed_sum",
    "totally_positive_gens",
    "triangle",
    "weighted_sum",
    "weighted_sum_table",
]
