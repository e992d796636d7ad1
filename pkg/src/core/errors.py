#!/usr/bin/env python3
"""
Exception types shared by the choice estimation toolkit.

Library code raises these; the command-line layer in ``src.app`` maps them
to exit codes.
"""

from typing import Optional, Tuple


class ChoiceKitError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(ChoiceKitError, ValueError):
    """Invalid run configuration (unknown attribute, missing seed, ...)."""


class SchemaError(ChoiceKitError, ValueError):
    """Input does not match the declared attribute schema."""

    def __init__(self, message: str, column: Optional[str] = None):
        super().__init__(message)
        self.column = column


class DataParseError(ChoiceKitError, ValueError):
    """A cell could not be parsed; ``row`` is the 1-based file line."""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        super().__init__(message)
        self.row = row
        self.column = column


class IntegrityError(ChoiceKitError, ValueError):
    """A choice situation violates the single-chosen-row contract."""

    def __init__(self, message: str, situation_id: Optional[str] = None):
        super().__init__(message)
        self.situation_id = situation_id


class NumericError(ChoiceKitError, ArithmeticError):
    """Non-finite utilities or regrets."""


class UnsupportedModelError(ChoiceKitError, ValueError):
    """Requested model/operation combination is not supported."""


class EstimationError(ChoiceKitError, RuntimeError):
    """The likelihood could not be maximized at all."""


class SingularHessianError(EstimationError):
    """The numerical Hessian cannot be inverted."""

    def __init__(self, message: str, pair: Optional[Tuple[str, str]] = None):
        super().__init__(message)
        self.pair = pair


class MapeUndefinedError(ChoiceKitError, ValueError):
    """An actual value of zero makes the percentage error undefined."""

    def __init__(self, message: str, fold_index: Optional[int] = None):
        super().__init__(message)
        self.fold_index = fold_index
