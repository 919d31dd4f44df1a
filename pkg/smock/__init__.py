"""smock - computable smocked metric spaces."""

__version__ = "1.0.0"
