"""Execution boundary lab test suite."""
