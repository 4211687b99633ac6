"""Command-line driver: specs in, certificates and reports out."""
