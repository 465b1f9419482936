"""Conversational construction, validation, and scoring of AI function pipelines."""

__version__ = "0.1.0"
