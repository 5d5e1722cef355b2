"""Exception types shared across the toolkit."""


class EquilefError(Exception):
    """Base class for all toolkit errors."""


class GeneratorMismatch(EquilefError):
    """Two symbolic vectors were combined but declare different generator sets."""


class NotTransversal(EquilefError):
    """A subgroup meets the isotropy preimage in positive dimension."""


class OffManifold(EquilefError):
    """A point does not lie on the model manifold."""


class NotEquivariant(EquilefError):
    """A candidate map does not commute with the flow."""


class DegreeOverflow(EquilefError):
    """A form operation would exceed the top degree of the complex."""


class NotBasic(EquilefError):
    """An operation requires a form annihilated by the flow derivative."""


class NonTransverse(EquilefError):
    """A fixed orbit fails the determinant transversality criterion."""

    def __init__(self, message, orbit=None, component=None):
        super().__init__(message)
        self.orbit = orbit
        self.component = component


class InfiniteFixedSet(EquilefError):
    """The fixed-orbit set is not finite; no trace formula applies."""


class GridTooCoarse(EquilefError):
    """The mollifier bump is not resolved by the sample grid."""


class ParseError(EquilefError):
    """A scenario file is not syntactically valid."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaError(EquilefError):
    """A scenario file parses but violates the schema."""

    def __init__(self, message, path=""):
        super().__init__(message)
        self.path = path
