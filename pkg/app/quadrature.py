"""
Fixed-node Gauss rules shared by the closed-form gamma integral and the oracles.
"""

from functools import lru_cache
from typing import Tuple

import numpy as np


@lru_cache(maxsize=32)
def _legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


@lru_cache(maxsize=32)
def _hermite(n: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.polynomial.hermite.hermgauss(n)


def gauss_legendre(a: float, b: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Compute the Gauss-Legendre quadrature points and weights on the interval [a, b].

    :param a: lower bound of the integration interval
    :param b: upper bound of the integration interval
    :param n: number of quadrature points
    :return: (points, weights) on [a, b]
    """
    knots, weights = _legendre(n)
    return 0.5 * (b - a) * knots + 0.5 * (b + a), 0.5 * (b - a) * weights


def composite_gauss_legendre(a: float, b: float, n: int, panels: int):
    """Points and weights of n-node Gauss-Legendre on `panels` equal sub-intervals."""
    edges = np.linspace(a, b, panels + 1)
    points, weights = zip(*(gauss_legendre(lo, hi, n) for lo, hi in zip(edges[:-1], edges[1:])))
    return np.concatenate(points), np.concatenate(weights)


def gauss_hermite(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Physicists' Gauss-Hermite rule: sum w_i f(x_i) ~ int e^{-x^2} f(x) dx."""
    knots, weights = _hermite(n)
    return knots.copy(), weights.copy()
