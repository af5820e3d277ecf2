"""Simulation engine: configurations, grid, densities, ansatz, mean field, propagation, ground levels."""
