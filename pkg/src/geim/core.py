"""Discretized function-space substrate.

Fields live on a 1D quadrature grid and come in two norm flavors: a weighted
L2 ("hilbert") norm and the pointwise maximum ("sup") norm.  Bounded linear
functionals are stored as densities against the quadrature weights, so the
same weight vector serves as the L2 Riesz representer and as the integrand
of a sup-mode (L1-dual) functional.
"""

from dataclasses import dataclass

import numpy as np

HILBERT = "hilbert"
SUP = "sup"
MODES = (HILBERT, SUP)

DEFAULT_TOL = 1e-12


class GridMismatchError(ValueError):
    """Two objects that must share a grid do not."""


class DegenerateInputError(ValueError):
    """An input is identically zero where a nonzero object is required."""


class UnsupportedModeError(ValueError):
    """The requested norm mode is not supported by this operation."""


def check_mode(mode):
    if mode not in MODES:
        raise UnsupportedModeError(f"unknown norm mode {mode!r}, expected one of {MODES}")
    return mode


def _readonly(a):
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Grid:
    """Quadrature grid: strictly increasing points with positive weights."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", _readonly(self.points))
        object.__setattr__(self, "weights", _readonly(self.weights))
        if self.points.ndim != 1 or self.weights.ndim != 1:
            raise ValueError("grid points and weights must be 1-D")
        if self.points.size < 2:
            raise ValueError("grid needs at least 2 points")
        if self.points.size != self.weights.size:
            raise ValueError("points and weights must have equal length")
        if not np.all(np.diff(self.points) > 0):
            raise ValueError("grid points must be strictly increasing")
        if not np.all(self.weights > 0):
            raise ValueError("quadrature weights must be positive")

    @property
    def size(self):
        return self.points.size

    @classmethod
    def uniform(cls, a=-1.0, b=1.0, n=200):
        """Uniform grid on [a, b] with composite-trapezoid weights."""
        if n < 2:
            raise ValueError("need n >= 2")
        x = np.linspace(a, b, n)
        h = (b - a) / (n - 1)
        w = np.full(n, h)
        w[0] = w[-1] = h / 2.0
        return cls(x, w)

    def matches(self, other):
        return self is other or (
            np.array_equal(self.points, other.points)
            and np.array_equal(self.weights, other.weights)
        )


def _require_same_grid(a, b):
    if not a.grid.matches(b.grid):
        raise GridMismatchError("operands live on different grids")


@dataclass(frozen=True, eq=False)
class DiscreteFunction:
    """A field sampled on a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))
        if self.values.shape != (self.grid.size,):
            raise ValueError("values length must equal grid size")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")


@dataclass(frozen=True, eq=False)
class Functional:
    """A bounded linear functional stored as a density against the quadrature.

    Applying it to f computes sum_i weights_i * w_i * f_i, so in hilbert mode
    the weight vector is its own Riesz representer.  ``mode_normalized_for``
    records the mode in which the dual norm equals one.
    """

    grid: Grid
    weights: np.ndarray
    mode_normalized_for: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "weights", _readonly(self.weights))
        if self.weights.shape != (self.grid.size,):
            raise ValueError("functional weights length must equal grid size")
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("functional weights must be finite")


@dataclass(frozen=True, eq=False)
class FunctionSet:
    """A finite family of fields sharing one grid."""

    members: tuple
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ValueError("function set must be nonempty")
        g = self.members[0].grid
        for m in self.members[1:]:
            if not g.matches(m.grid):
                raise GridMismatchError("all members must share one grid")

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]

    @property
    def grid(self):
        return self.members[0].grid

    def values_matrix(self):
        """Member values stacked as rows, shape (n_members, n_points)."""
        return np.array([m.values for m in self.members])


def norm_values(values, weights, mode):
    """Norm of raw grid values; vectorized over leading axes."""
    check_mode(mode)
    values = np.asarray(values, dtype=float)
    if mode == HILBERT:
        return np.sqrt(np.maximum((values * values) @ weights, 0.0))
    return np.max(np.abs(values), axis=-1)


def norm(f, mode):
    """Hilbert: sqrt(sum w_i f_i^2); sup: max |f_i|."""
    return float(norm_values(f.values, f.grid.weights, mode))


def inner(f, g):
    """Quadrature inner product sum_i w_i f_i g_i."""
    _require_same_grid(f, g)
    return float((f.values * g.values) @ f.grid.weights)


def apply_functional(sigma, f):
    """Evaluate sigma on f: sum_i sigma_weights_i * w_i * f_i."""
    _require_same_grid(sigma, f)
    return float((sigma.weights * f.values) @ f.grid.weights)


def dual_norm(sigma, mode):
    """Dual norm of a functional: L2 norm of its representer (hilbert) or the
    weighted L1 norm of its density (sup)."""
    check_mode(mode)
    w = sigma.grid.weights
    if mode == HILBERT:
        return float(np.sqrt((sigma.weights * sigma.weights) @ w))
    return float(np.abs(sigma.weights) @ w)


def normalize_dual(sigma, mode):
    """Scale a functional so its dual norm is one.  Idempotent."""
    nd = dual_norm(sigma, mode)
    if nd <= 0.0:
        raise DegenerateInputError("cannot normalize the zero functional")
    return Functional(sigma.grid, sigma.weights / nd, mode_normalized_for=mode)


def functional_matrix(sigmas, grid):
    """Rows apply each functional to grid values: row_i @ f = sigma_i(f)."""
    return np.array([s.weights * grid.weights for s in sigmas])
