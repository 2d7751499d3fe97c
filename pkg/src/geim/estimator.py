"""Scikit-learn style front end for the greedy interpolation machinery.

``GeneralizedInterpolator.fit`` takes a snapshot matrix (rows are fields
sampled on a grid), co-selects basis functions and measurement functionals,
and exposes the usual transformer surface: ``transform`` replaces each row
by its interpolant, ``measure`` extracts the selected sensor readings, and
``predict`` reconstructs fields from raw measurement rows.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .core import HILBERT, DiscreteFunction, FunctionSet, Grid, check_mode
from .families import DIRAC, DictionarySpec, build_dictionary
from .greedy import FULL, GreedyConfig, run_geim
from .interp import interpolate_matrix, solve_coeffs


def _as_snapshot_matrix(X, n_features=None):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D snapshot matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("snapshot matrix contains NaN or infinite entries")
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(f"expected {n_features} grid values per row, got {X.shape[1]}")
    return X


class GeneralizedInterpolator(BaseEstimator, TransformerMixin):
    """Greedy sensor/basis co-selection with measurement-driven reconstruction.

    Parameters
    ----------
    n_components : target number of basis/functional pairs.
    norm : 'hilbert' (weighted L2) or 'sup' (max) selection geometry.
    grid : optional Grid; defaults to a uniform trapezoid grid on [-1, 1]
        matching the number of columns seen in fit.
    dictionary : optional DictionarySpec or explicit list of functionals;
        defaults to point-reading functionals at every grid point.
    eta_target, subset_schedule, subset_size, stop_tol, seed : weak-greedy
        controls, passed through to the selection loop.
    """

    def __init__(self, n_components=10, norm=HILBERT, grid=None, dictionary=None,
                 eta_target=1.0, subset_schedule=FULL, subset_size=None,
                 stop_tol=1e-12, seed=0):
        self.n_components = n_components
        self.norm = norm
        self.grid = grid
        self.dictionary = dictionary
        self.eta_target = eta_target
        self.subset_schedule = subset_schedule
        self.subset_size = subset_size
        self.stop_tol = stop_tol
        self.seed = seed

    def _build_functionals(self, grid):
        if self.dictionary is None:
            spec = DictionarySpec(DIRAC, centers=tuple(grid.points))
            return build_dictionary(spec, grid, self.norm)
        if isinstance(self.dictionary, DictionarySpec):
            return build_dictionary(self.dictionary, grid, self.norm)
        return list(self.dictionary)

    def fit(self, X, y=None):
        check_mode(self.norm)
        X = _as_snapshot_matrix(X)
        grid = self.grid if self.grid is not None else Grid.uniform(-1.0, 1.0, X.shape[1])
        if grid.size != X.shape[1]:
            raise ValueError("grid size does not match snapshot columns")
        F = FunctionSet(tuple(DiscreteFunction(grid, row) for row in X))
        sigmas = self._build_functionals(grid)
        cfg = GreedyConfig(
            n_max=min(self.n_components, len(F), len(sigmas)),
            mode=self.norm,
            eta_target=self.eta_target,
            subset_schedule=self.subset_schedule,
            subset_size=self.subset_size,
            stop_tol=self.stop_tol,
            seed=self.seed,
        )
        self.result_ = run_geim(F, sigmas, cfg)
        self.grid_ = grid
        self.n_components_ = self.result_.n
        self.n_features_in_ = X.shape[1]
        return self

    def _check_fitted(self):
        if not hasattr(self, "result_"):
            raise NotFittedError("this GeneralizedInterpolator is not fitted yet")

    def transform(self, X):
        """Interpolant of each row in the selected basis."""
        self._check_fitted()
        X = _as_snapshot_matrix(X, self.n_features_in_)
        return interpolate_matrix(X, self.result_)

    def measure(self, X):
        """Selected sensor readings of each row, shape (n_samples, n_components_)."""
        self._check_fitted()
        X = _as_snapshot_matrix(X, self.n_features_in_)
        return X @ self.result_.functional_rows().T

    def predict(self, M):
        """Reconstruct fields from measurement rows (inverse of ``measure``)."""
        self._check_fitted()
        M = np.asarray(M, dtype=float)
        if M.ndim == 1:
            M = M[None, :]
        if M.shape[1] != self.n_components_:
            raise ValueError(
                f"expected {self.n_components_} measurements per row, got {M.shape[1]}"
            )
        if not np.all(np.isfinite(M)):
            raise ValueError("measurements contain NaN or infinite entries")
        alpha = solve_coeffs(self.result_.B, M.T)
        return (self.result_.basis_matrix() @ alpha).T
