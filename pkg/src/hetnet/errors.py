"""Exception and warning types shared across the package."""


class ConfigError(ValueError):
    """Invalid network parameterization or malformed configuration text."""

    def __init__(self, message, *, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class NumericsError(ArithmeticError):
    """A numerical kernel failed to converge or produced an out-of-range value."""


class PreconditionError(ValueError):
    """An asymptotic regime was requested outside its validity conditions."""


class PrecisionWarning(RuntimeWarning):
    """Cancellation in an alternating sum ate most of the available digits."""
