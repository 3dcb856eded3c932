import numpy as np

from app.errors import ConsistencyError


def solve_tridiagonal(
    lower: np.ndarray, diag: np.ndarray, upper: np.ndarray, rhs: np.ndarray
) -> np.ndarray:
    """
    Thomas algorithm for a_i x_{i-1} + b_i x_i + c_i x_{i+1} = r_i.

    lower[0] and upper[-1] are ignored. The matrix must be diagonally dominant.
    """
    n = diag.size
    if not (lower.size == upper.size == rhs.size == n):
        raise ConsistencyError("tridiagonal bands and right-hand side differ in length")
    c_prime = np.empty(n)
    r_prime = np.empty(n)
    c_prime[0] = upper[0] / diag[0]
    r_prime[0] = rhs[0] / diag[0]
    for i in range(1, n):
        pivot = diag[i] - lower[i] * c_prime[i - 1]
        c_prime[i] = upper[i] / pivot
        r_prime[i] = (rhs[i] - lower[i] * r_prime[i - 1]) / pivot

    out = np.empty(n)
    out[-1] = r_prime[-1]
    for i in range(n - 2, -1, -1):
        out[i] = r_prime[i] - c_prime[i] * out[i + 1]
    return out
