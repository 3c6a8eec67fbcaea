"""
Tests package for Carnot Hardy Verifier
"""
