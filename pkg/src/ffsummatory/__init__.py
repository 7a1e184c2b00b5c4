"""Zeta functions of hyperelliptic function fields, k-free and totient
summatory functions, their explicit formulas, limiting distributions and
USp(2g) statistics."""

from .curve import (
    HyperellipticCurve,
    InverseZeroSet,
    LPolynomial,
    class_number,
    count_points,
    curve_l_polynomial,
    inverse_zeros,
    l_polynomial,
    parse_curve,
    zeta_derivative_at,
    zeta_eval,
)
from .errors import FFSummatoryError, InputError, VerificationError
from .explicit import ErrorTermModel, MainTermConstants, build_model, main_term
from .field import FieldElement, FieldSpec, construct_field, field_arith, quadratic_character
from .series import IntegerSeries, SummatoryTable, summatory_kfree, summatory_totient

__version__ = "0.1.0"
