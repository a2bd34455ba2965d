"""
Test package for the heat transfer solvers.
"""
