"""Polytope engine and the builders for every convex body of the construction."""
