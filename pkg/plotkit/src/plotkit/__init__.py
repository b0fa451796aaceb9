from .render import FigureSpec, SchemaError, ValidationError, load_rows, render

__all__ = ["FigureSpec", "SchemaError", "ValidationError", "load_rows",
           "render"]
__version__ = "0.1.0"
