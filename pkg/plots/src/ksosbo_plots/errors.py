"""Error types for the figure generator."""


class PlotError(Exception):
    """Any failure turning experiment outputs into a figure."""


class SchemaError(PlotError):
    """Input file does not match the documented CSV schema.

    Raised with column-level details: missing and unexpected header columns,
    or the column name and row number of an unparsable cell.
    """
