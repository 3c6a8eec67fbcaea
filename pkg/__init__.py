"""
Carnot Hardy Verifier - numerical checks of Hardy inequalities on Carnot groups.

This package evaluates both sides of half-space and convex-domain Hardy
inequalities for explicit test functions and reports whether each holds
within its quadrature error.
"""

__version__ = "0.1.0"
__author__ = "lumensparkxy"
__email__ = "neophilex@gmail.com"
__description__ = "Numerical verification of Hardy inequalities on Carnot groups"

# Make version available at package level
VERSION = __version__
