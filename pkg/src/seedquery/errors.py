"""Exception types raised across the package."""


class SeedQueryError(Exception):
    pass


class ParseError(SeedQueryError, ValueError):
    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class RangeError(SeedQueryError, ValueError):
    pass


class ParameterError(SeedQueryError, ValueError):
    pass


class CapacityError(SeedQueryError, ValueError):
    pass


class ModelError(SeedQueryError, ValueError):
    pass


class SessionError(SeedQueryError, RuntimeError):
    pass


class BudgetExhausted(SeedQueryError, RuntimeError):
    """The oracle refused a query because its edge budget is spent."""


class ExhaustionError(SeedQueryError, RuntimeError):
    pass
