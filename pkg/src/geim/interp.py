"""Interpolation from measurements: triangular solve, evaluation, errors.

The selection loop guarantees a unit lower-triangular collocation matrix, so
coefficient recovery is a plain forward substitution and the interpolant with
an empty basis is the zero function (which makes the step-zero error equal to
the field norm).
"""

import numpy as np

from .core import DiscreteFunction, apply_functional, norm_values


def solve_coeffs(B, m):
    """Forward-substitute the unit lower-triangular system B a = m.

    ``m`` may be a vector or a matrix of stacked right-hand-side columns.
    """
    B = np.asarray(B, dtype=float)
    m = np.asarray(m, dtype=float)
    n = B.shape[0]
    if B.shape != (n, n) or m.shape[0] != n:
        raise ValueError(f"size mismatch: B is {B.shape}, rhs has leading size {m.shape[0]}")
    alpha = np.zeros_like(m)
    for i in range(n):
        alpha[i] = m[i] - B[i, :i] @ alpha[:i]
    return alpha


def measure(f, result, n=None):
    """Measurement vector (sigma_i(f)) for the first n selected functionals."""
    n = result.n if n is None else n
    return np.array([apply_functional(s, f) for s in result.selected_sigma[:n]])


def _combine(result, alpha):
    vals = np.zeros(result.grid.size)
    for a, q in zip(alpha, result.basis_q):
        vals += a * q.values
    return DiscreteFunction(result.grid, vals)


def interpolate(f, result, n=None):
    """Interpolant of f in the span of the first n basis functions.

    Matches all n measurements of f; with n = 0 returns the zero function.
    """
    n = result.n if n is None else n
    if n > result.n:
        raise ValueError(f"requested n={n} exceeds basis size {result.n}")
    if n == 0:
        return DiscreteFunction(result.grid, np.zeros(result.grid.size))
    alpha = solve_coeffs(result.B[:n, :n], measure(f, result, n))
    return _combine(result, alpha)


def reconstruct(m, result):
    """Rebuild a field from raw measurement values, without access to f.

    ``m`` holds readings of the first len(m) selected functionals.
    """
    m = np.asarray(m, dtype=float).ravel()
    n = m.size
    if n > result.n:
        raise ValueError(f"got {n} measurements but only {result.n} basis functions")
    if n == 0:
        return DiscreteFunction(result.grid, np.zeros(result.grid.size))
    alpha = solve_coeffs(result.B[:n, :n], m)
    return _combine(result, alpha)


def interp_error(f, result, n=None, mode=None):
    """Norm of f minus its n-term interpolant."""
    mode = result.mode if mode is None else mode
    g = interpolate(f, result, n)
    return float(norm_values(f.values - g.values, f.grid.weights, mode))


def interpolate_matrix(values, result, n=None):
    """Interpolants of many fields at once; rows of ``values`` are fields."""
    n = result.n if n is None else n
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if n == 0:
        return np.zeros_like(values)
    S = result.functional_rows()[:n]        # (n, n_points)
    Q = result.basis_matrix()[:, :n]        # (n_points, n)
    alpha = solve_coeffs(result.B[:n, :n], S @ values.T)
    return (Q @ alpha).T
