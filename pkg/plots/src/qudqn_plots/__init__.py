"""Figure rendering for qudqn benchmark CSVs."""

from .render import KINDS, EmptyInputError, FigureSpec, SchemaError, render

__version__ = "0.1.0"
