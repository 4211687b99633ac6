"""Proof-following verification procedures, one per result, each producing a certificate."""
