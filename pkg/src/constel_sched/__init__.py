"""Constellation task scheduling: collect search, conflict graphs and independent-set solvers."""

__version__ = "0.1.0"
