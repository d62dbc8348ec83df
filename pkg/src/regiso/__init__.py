"""Isomorphism tests for regular trees, regular words and lexicographic orders."""

from .errors import EmptyLanguage, InvalidInput, OutOfRange, RegisoError, ResourceLimit

__all__ = ["EmptyLanguage", "InvalidInput", "OutOfRange", "RegisoError", "ResourceLimit"]
