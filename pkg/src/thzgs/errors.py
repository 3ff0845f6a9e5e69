"""Exception hierarchy. Every error carries enough context to be reported by the CLI."""


class ThzgsError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ParseError(ThzgsError):
    exit_code = 3


class WrongLength(ParseError):
    pass


class FieldSyntax(ParseError):
    def __init__(self, field, columns, text):
        self.field = field
        self.columns = columns
        self.text = text
        super().__init__(f"field {field!r} (cols {columns[0]}-{columns[1]}) is not numeric: {text!r}")


class RangeViolation(ParseError):
    pass


class FieldOverflow(ThzgsError):
    exit_code = 3


class EmptyCatalog(ParseError):
    def __init__(self, message="no valid records", errors=()):
        self.errors = list(errors)
        super().__init__(message)


class FetchError(ThzgsError):
    exit_code = 2


class NetworkError(FetchError):
    pass


class HttpStatus(FetchError):
    def __init__(self, code, url=""):
        self.code = code
        super().__init__(f"HTTP {code} from {url}")


class CacheCorrupt(FetchError):
    pass


class MissingCatalog(ThzgsError):
    exit_code = 3


class GridOutsideCoverage(ThzgsError):
    exit_code = 3


class InvalidMixture(ThzgsError):
    pass


class DegenerateGeometry(ThzgsError):
    pass


class UndersampledPulse(ThzgsError):
    pass


class GridMismatch(ThzgsError):
    pass


class EmptyInput(ThzgsError):
    pass


class InfeasibleConstraints(ThzgsError):
    exit_code = 4


class RankDeficient(ThzgsError):
    exit_code = 4


class MaxIterations(ThzgsError):
    exit_code = 4


class HarnessUnstable(ThzgsError):
    exit_code = 4
