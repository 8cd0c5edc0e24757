"""Exception hierarchy.

Every error carries the CLI exit code it maps to: 2 for bad input data,
3 for numerical/model failures, 4 for usage and guard violations.
"""


class CurveconfError(Exception):
    exit_code = 1


class DataError(CurveconfError):
    exit_code = 2


class ModelError(CurveconfError):
    exit_code = 3


class UsageError(CurveconfError):
    exit_code = 4


class MissingColumn(DataError, KeyError):
    def __init__(self, column, where="dataset"):
        self.column = column
        super().__init__(f"column {column!r} not found in {where}")

    def __str__(self):
        return self.args[0]


class BadValue(DataError, ValueError):
    def __init__(self, row, column, value, reason):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"row {row}, column {column!r}: {reason} (got {value!r})")


class EmptyData(DataError, ValueError):
    pass


class MissingCovariate(DataError, KeyError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"no value supplied for covariate {name!r}")

    def __str__(self):
        return self.args[0]


class SingularDesign(ModelError):
    def __init__(self, column, index=None):
        self.column = column
        self.index = index
        super().__init__(f"design is rank deficient: column {column!r} is collinear with earlier columns")


class Underdetermined(ModelError):
    pass


class NoTurningPoint(ModelError):
    pass


class ZeroVariance(ModelError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column!r} has zero variance")


class TooManySingular(ModelError):
    pass


class NotQuadratic(ModelError):
    pass


class DomainError(UsageError, ValueError):
    pass


class TooLarge(DomainError):
    pass


class ExtrapolationError(UsageError):
    pass
