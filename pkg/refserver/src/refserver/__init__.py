"""Reference inference service for the russ wire protocol."""

__version__ = "0.1.0"
