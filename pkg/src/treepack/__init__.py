"""Constructive tree packing into complete graphs."""

__version__ = "0.1.0"
