"""
bathtub

Shape-respecting estimation of U-shaped and unimodal densities, regression
functions, hazard rates and failure rates, with a Monte Carlo harness for
their risk bounds.
"""

__version__ = "0.1.0"
