"""
Many-body heat transfer solver package.

Computes the effective temperature field of a medium with many small embedded
particles, both as a discrete many-body linear system and as its homogenized
integral-equation limit, and checks the asymptotic claims numerically.
"""

__version__ = "1.0.0"
