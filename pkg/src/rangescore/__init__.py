"""Severity-weighted detection scoring and IDS benchmarking for cyber-range competitions."""

__version__ = "0.1.0"
