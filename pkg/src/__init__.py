"""Discrete choice estimation toolkit: utility and regret models."""

__version__ = "0.1.0"
