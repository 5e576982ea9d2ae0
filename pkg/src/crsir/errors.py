"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line can map failures
to the documented process status without inspecting messages.
"""


class CrsirError(Exception):
    exit_code = 3


class DataError(CrsirError):
    exit_code = 2


class NumericalError(CrsirError):
    exit_code = 3


class DomainError(CrsirError, ValueError):
    exit_code = 1


class ConstantColumn(DataError):
    def __init__(self, index, name=None):
        self.index = index
        label = f"{index}" if name is None else f"{index} ({name})"
        super().__init__(f"column {label} has zero standard deviation")


class DimensionMismatch(DataError, ValueError):
    pass


class LengthMismatch(DataError, ValueError):
    pass


class TooFewObservations(DataError):
    pass


class TooShort(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} at {', '.join(where)}"
        super().__init__(message)


class UnknownTransformCode(DataError):
    pass


class RankZero(NumericalError):
    pass


class RankDeficient(NumericalError):
    pass


class SingularHead(NumericalError):
    pass


class NotPositiveDefinite(NumericalError):
    pass


class ConvergenceFailure(NumericalError):
    pass
