"""Exception hierarchy shared across the engine."""


class FactweaverError(Exception):
    """Base class for all domain errors raised by this package."""


class CsvStructureError(FactweaverError):
    """The CSV body is malformed (ragged row, undecodable bytes, ...)."""

    def __init__(self, message, row_index=None):
        super().__init__(message)
        self.row_index = row_index


class EmptyTable(FactweaverError):
    """The CSV contains a header but no data rows."""


class SchemaError(FactweaverError):
    """A schema-level problem: duplicate header, all-empty column, missing field class."""


class FilterError(FactweaverError):
    """A filter references an unknown field or a field of the wrong kind."""


class ParseError(FactweaverError):
    """A serialized record cannot be decoded into a domain object."""


class DomainError(FactweaverError):
    """A numeric routine received parameters outside its domain."""


class InsufficientData(FactweaverError):
    """Too few data points for the requested statistic."""


class DegenerateInput(FactweaverError):
    """Input with no variance or no mass where some is required."""


class EmptyScope(FactweaverError):
    """A fact's subspace selects no rows but a value is required."""


class GenerationError(FactweaverError):
    """No valid fact (or story) could be constructed from the data."""


class NarrationError(FactweaverError):
    """A caption cannot be instantiated (missing derived value)."""


class SpecError(FactweaverError):
    """A chart specification cannot be built for the given fact/chart pair."""


class RenderError(FactweaverError):
    """Invalid rendering parameters (non-positive size)."""


class LayoutError(FactweaverError):
    """An invalid factsheet partition was supplied or requested."""
