"""Packaged reference data: technique table, detection matrix, FPR reference."""
