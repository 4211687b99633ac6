"""Exact arithmetic, sequence-space models, errors and the JSON codec."""
