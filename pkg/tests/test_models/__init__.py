"""Function representation tests."""
