"""bathtub test suite."""
