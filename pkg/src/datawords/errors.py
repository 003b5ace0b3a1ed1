"""Exception types shared by every module."""


class DatawordsError(Exception):
    """Base class for model errors (bad input, ill-formed machines, ...)."""


class ParseError(DatawordsError):
    pass


class SortMismatch(DatawordsError):
    pass


class NotEquivariant(DatawordsError):
    pass


class KindMismatch(DatawordsError):
    pass


class NotAccepting(DatawordsError):
    pass


class InvalidMachine(DatawordsError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class MachineMismatch(DatawordsError):
    pass


class UnsupportedPrime(DatawordsError):
    pass


class NotLengthPreserving(DatawordsError):
    pass


class LengthMismatch(DatawordsError):
    pass


class RlfTypeError(DatawordsError):
    def __init__(self, path, message):
        self.path = tuple(path)
        where = "/".join(self.path) or "<root>"
        super().__init__(f"{where}: {message}")


class MissingAtom(DatawordsError):
    pass
