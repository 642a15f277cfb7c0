"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
failures onto its documented codes without inspecting messages.
"""


class MFXWTError(Exception):
    exit_code = 3
    code = "error"


class DataError(MFXWTError):
    exit_code = 3
    code = "data_error"


class NumericalError(MFXWTError):
    exit_code = 4
    code = "numerical_failure"


class SeriesTooShort(DataError):
    code = "series_too_short"


class NonFiniteInput(DataError):
    code = "non_finite_input"


class InvalidGrid(DataError):
    code = "invalid_grid"


class ShapeMismatch(DataError):
    code = "shape_mismatch"


class DegenerateField(NumericalError):
    code = "degenerate_field"


class RangeTooNarrow(DataError):
    code = "range_too_narrow"


class ZeroCoefficient(NumericalError):
    code = "zero_coefficient"


class NegativeMeasure(DataError):
    code = "negative_measure"


class IndivisibleLength(DataError):
    code = "indivisible_length"


class NoCommonScales(DataError):
    code = "no_common_scales"


class ZeroOrder(NumericalError):
    code = "zero_order"


class KTooLarge(DataError):
    code = "k_too_large"


class InfeasibleCorrelation(NumericalError):
    code = "infeasible_correlation"


class ConstantInput(DataError):
    code = "constant_input"


class ShiftOutOfRange(DataError):
    code = "shift_out_of_range"


class ParseError(DataError):
    code = "parse_error"

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DuplicateDate(DataError):
    code = "duplicate_date"


class NonPositivePrice(DataError):
    code = "non_positive_price"


class EmptyIntersection(DataError):
    code = "empty_intersection"
