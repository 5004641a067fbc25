"""Tridiagonal partition solver with a learned sub-system size heuristic."""
