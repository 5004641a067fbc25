"""Exception hierarchy shared by the solver, autotuner and file formats."""


class TripartError(Exception):
    """Base class for all package errors."""


class ZeroPivot(TripartError):
    def __init__(self, row, pivot=0.0):
        super().__init__(f"zero pivot {pivot!r} at row {row}")
        self.row = row
        self.pivot = pivot


class InvalidSize(TripartError, ValueError):
    pass


class EmptyTrainingSet(TripartError, ValueError):
    pass


class KTooLarge(TripartError, ValueError):
    pass


class TooFewRows(TripartError, ValueError):
    pass


class LabelTooRare(TripartError, ValueError):
    pass


class MissingTimes(TripartError, ValueError):
    pass


class DepthOutOfRange(TripartError, ValueError):
    pass


class SolveFailed(TripartError):
    pass


class MalformedHeader(TripartError, ValueError):
    pass


class BadNumber(TripartError, ValueError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SchemaError(TripartError, ValueError):
    pass


class VersionMismatch(SchemaError):
    pass


class EmptyTestSet(TripartError, ValueError):
    pass
