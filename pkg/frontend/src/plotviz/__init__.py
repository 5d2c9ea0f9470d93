"""Batch chart renderer for synchronization-market sweep result files."""

from plotviz.errors import MissingColumn, PlotvizError, SchemaMismatch
from plotviz.render import render
from plotviz.spec import PlotSpec, load_results, spec_from_file

__all__ = [
    "MissingColumn",
    "PlotSpec",
    "PlotvizError",
    "SchemaMismatch",
    "load_results",
    "render",
    "spec_from_file",
]
