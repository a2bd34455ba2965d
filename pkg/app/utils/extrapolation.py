"""
Limit estimation from sequences of approximations.
"""

from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P


def richardson_extrapolate(base_values: Sequence[np.ndarray | float], p: float, r: float = 2.0):
    """
    Richardson extrapolation of approximations whose step shrinks by `r`
    between entries and whose leading error term is O(step^p).

    Raises:
        ValueError: If fewer than two values are given
    """
    n = len(base_values)
    if n < 2:
        raise ValueError("richardson_extrapolate requires at least two base values.")
    vals = [np.asarray(v, dtype=float) for v in base_values]
    for j in range(1, n):
        factor = r ** (p * j)
        for k in range(n - 1, j - 1, -1):
            vals[k] = (factor * vals[k] - vals[k - 1]) / (factor - 1.0)
    result = vals[-1]
    return float(result) if result.ndim == 0 else result


def polynomial_limit(steps: Sequence[float], values, degree: int) -> tuple[np.ndarray, float]:
    """
    Least-squares fit values(s) = c0 + c1 s + ... + c_degree s^degree and
    return (c0, fit residual). Values may be vectors (one fit per column).
    """
    s = np.asarray(steps, dtype=float)
    y = np.asarray(values, dtype=float)
    if degree >= s.size:
        raise ValueError(f"degree {degree} needs more than {s.size} samples")
    coefs = P.polyfit(s, y, degree)
    fitted = P.polyval(s, coefs)
    fitted = fitted.T if y.ndim > 1 else fitted
    residual = float(np.linalg.norm(fitted - y))
    return coefs[0], residual


def observed_order(errors: Sequence[float], r: float = 2.0) -> float:
    """Convergence order log_r(e_k / e_{k+1}) of the last two error levels."""
    e = np.abs(np.asarray(errors, dtype=float))
    if e.size < 2 or e[-1] == 0.0:
        return float("nan")
    return float(np.log(e[-2] / e[-1]) / np.log(r))
