"""Figure rendering for the virtdyn experiment CSV artifacts."""

__version__ = "0.1.0"

from .render import (
    EXPECTED_COLUMNS,
    FIGURE_KINDS,
    PlotJob,
    SchemaError,
    build_figure,
    jobs_for_directory,
    render,
)

__all__ = [
    "__version__",
    "EXPECTED_COLUMNS",
    "FIGURE_KINDS",
    "PlotJob",
    "SchemaError",
    "build_figure",
    "jobs_for_directory",
    "render",
]
