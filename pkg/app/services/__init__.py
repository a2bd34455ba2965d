"""
Solvers and studies for the many-particle heat transfer medium.
"""

from .runner import RunOutcome, execute

__all__ = [
    "RunOutcome",
    "execute",
]
