"""Predicting credit-rating downgrades from company news."""

__version__ = "0.1.0"
