"""Acceptance-scale runs."""
