"""Baseline package. Reference solvers: full-CI oracle and independent TDHF."""
