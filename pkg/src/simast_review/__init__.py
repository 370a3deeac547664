"""simast-review - automatic code review with simplified-AST graph networks."""

__version__ = "0.1.0"

__all__ = [
    "__version__",
]
