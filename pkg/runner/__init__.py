"""Command-line runner: scenario commands and acceptance suites."""
