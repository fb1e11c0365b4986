"""Exception hierarchy.

Every error carries a ``kind`` (its class name, used in the CLI's JSON error
document) and an ``exit_code``: 2 for configuration errors, 3 for data errors,
4 for numerical failures.
"""


class SurvWaveError(Exception):
    exit_code = 1

    @property
    def kind(self):
        return type(self).__name__


class ConfigError(SurvWaveError):
    exit_code = 2


class DataError(SurvWaveError):
    exit_code = 3


class NumericalError(SurvWaveError):
    exit_code = 4


class UnknownFilter(ConfigError):
    def __init__(self, name, supported):
        self.name = name
        self.supported = tuple(supported)
        super().__init__(
            f"unknown filter {name!r}; supported: {', '.join(self.supported)}"
        )


class UnknownBaseline(ConfigError):
    pass


class KindMismatch(ConfigError):
    pass


class InvalidSampleSize(DataError):
    pass


class AllZeroSample(DataError):
    pass


class IoError(DataError):
    pass


class _RowError(DataError):
    def __init__(self, row, message):
        self.row = row
        super().__init__(f"row {row}: {message}")


class ParseError(_RowError):
    pass


class NegativeTime(_RowError):
    pass


class BadStatus(_RowError):
    pass


class DegenerateWeight(NumericalError):
    pass


class ZeroMass(NumericalError):
    pass


class NonConvergent(NumericalError):
    pass
