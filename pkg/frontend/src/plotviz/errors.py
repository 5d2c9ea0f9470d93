"""Errors raised while validating result files against the CSV schema."""


class PlotvizError(Exception):
    """Base class for all plotviz failures."""


class SchemaMismatch(PlotvizError):
    """The input file does not match the documented results schema."""


class MissingColumn(SchemaMismatch):
    """A column referenced by the plot spec is absent from the header."""
