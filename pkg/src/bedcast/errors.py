"""Exception hierarchy shared across the package.

Every data or contract violation raises a subclass of :class:`BedcastError`,
so callers (CLI, API) can distinguish bad input from genuine bugs.
"""


class BedcastError(Exception):
    """Base class for all package errors."""


# --- ingest ---------------------------------------------------------------

class MissingColumn(BedcastError):
    def __init__(self, column: str):
        self.column = column
        super().__init__(f"required column missing from header: {column!r}")


class BadDate(BedcastError):
    def __init__(self, row: int, value: str):
        self.row = row
        self.value = value
        super().__init__(f"row {row}: unparseable date {value!r}")


class NegativeLos(BedcastError):
    def __init__(self, row: int, value=None):
        self.row = row
        self.value = value
        super().__init__(f"row {row}: length of stay must be >= 0 (got {value!r})")


class EmptyWindow(BedcastError):
    pass


class AllGaps(BedcastError):
    pass


# --- decomp ---------------------------------------------------------------

class WindowTooLarge(BedcastError):
    pass


class SeriesTooShort(BedcastError):
    pass


# --- losfit ---------------------------------------------------------------

class EmptySample(BedcastError):
    pass


class TooFewSamples(BedcastError):
    pass


class NonConvergence(BedcastError):
    def __init__(self, family: str, grad_norm: float, iterations: int):
        self.family = family
        self.grad_norm = grad_norm
        self.iterations = iterations
        super().__init__(
            f"{family} fit did not converge after {iterations} iterations "
            f"(gradient norm {grad_norm:.3e})"
        )


class DomainError(BedcastError):
    pass


# --- occupancy ------------------------------------------------------------

class CoverageError(BedcastError):
    pass


class OutOfRange(BedcastError):
    pass


# --- planning -------------------------------------------------------------

class EmptySeries(BedcastError):
    pass


class SearchExhausted(BedcastError):
    pass


class EmptyInput(BedcastError):
    pass


# --- scenario -------------------------------------------------------------

class FamilyMismatch(BedcastError):
    pass


# --- projection -----------------------------------------------------------

class MissingBirths(BedcastError):
    pass


class MissingHistory(BedcastError):
    pass


class ZeroYearTotal(BedcastError):
    pass


class EmptyRuns(BedcastError):
    pass


# --- simulate / diagnostics -----------------------------------------------

class TooFewReplications(BedcastError):
    pass


class ZeroMean(BedcastError):
    pass


class TooFewBins(BedcastError):
    pass


# --- cli / config ----------------------------------------------------------

class SchemaError(BedcastError):
    def __init__(self, pointer: str, message: str):
        self.pointer = pointer
        super().__init__(f"config error at {pointer}: {message}")
