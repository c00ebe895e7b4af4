"""Exception hierarchy shared by all modules."""


class SchwarzError(Exception):
    """Base class for every error raised by this package."""


class JetError(SchwarzError, ValueError):
    pass


class IndeterminateError(JetError):
    """Division by a jet that vanishes to full order."""


class DomainError(SchwarzError, ValueError):
    pass


class BranchCutError(DomainError):
    pass


class CriticalPointError(SchwarzError, ValueError):
    pass


class NormError(SchwarzError, RuntimeError):
    pass


class ParseError(SchwarzError, ValueError):
    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = f"{message} at offset {offset}"
        if self.expected:
            detail += ", expected one of: " + ", ".join(sorted(self.expected))
        super().__init__(detail)
