"""Hypoellipticity analysis toolkit for linear differential operators."""

__version__ = "0.1.0"
