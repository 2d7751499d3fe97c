"""Synthetic snapshot families and measurement dictionaries.

The families are analytic in their parameter, so their singular values (and
hence the best-approximation widths of the generated set) decay fast; the
Gaussian and rational kinds decay exponentially, the Fourier mixture decays
like the chosen mode-coefficient power law.
"""

from dataclasses import dataclass

import numpy as np

from .core import (
    HILBERT,
    SUP,
    DiscreteFunction,
    FunctionSet,
    Functional,
    Grid,
    check_mode,
    norm_values,
    normalize_dual,
)

GAUSSIAN_BUMP = "gaussian_bump"
RATIONAL_PEAK = "rational_peak"
FOURIER_MIX = "fourier_mix"
FAMILY_KINDS = (GAUSSIAN_BUMP, RATIONAL_PEAK, FOURIER_MIX)

DIRAC = "dirac"
LOCAL_AVERAGE = "local_average"
DICTIONARY_KINDS = (DIRAC, LOCAL_AVERAGE)


@dataclass(frozen=True)
class FamilySpec:
    """Recipe for a parametric snapshot set.

    kind:        one of FAMILY_KINDS.
    param_grid:  parameter values, one snapshot each.
    grid:        sampling grid.
    normalize:   scale the whole set so no member exceeds norm one
                 (in either norm mode).
    width:       shape parameter s of the gaussian kind, exp(-((x-mu)/s)^2).
    modes/decay: mode count and coefficient power of the fourier kind.
    """

    kind: str
    param_grid: tuple
    grid: Grid
    normalize: bool = True
    width: float = 0.25
    modes: int = 12
    decay: float = 2.0

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        object.__setattr__(self, "param_grid", tuple(float(p) for p in self.param_grid))
        if not self.param_grid:
            raise ValueError("param_grid must be nonempty")
        if self.width <= 0:
            raise ValueError("width must be positive")


@dataclass(frozen=True)
class DictionarySpec:
    """Recipe for a set of measurement functionals.

    Dirac functionals read off single grid values; local averages integrate
    over [c - spread, c + spread] clipped to the domain.
    """

    kind: str
    centers: tuple
    spread: float = 0.0

    def __post_init__(self):
        if self.kind not in DICTIONARY_KINDS:
            raise ValueError(f"unknown dictionary kind {self.kind!r}")
        object.__setattr__(self, "centers", tuple(float(c) for c in self.centers))
        if not self.centers:
            raise ValueError("centers must be nonempty")
        if self.spread < 0:
            raise ValueError("spread must be nonnegative")


def _family_values(spec):
    x = spec.grid.points
    mus = np.asarray(spec.param_grid)
    if spec.kind == GAUSSIAN_BUMP:
        return np.exp(-(((x[None, :] - mus[:, None]) / spec.width) ** 2))
    if spec.kind == RATIONAL_PEAK:
        return 1.0 / (1.0 + (mus[:, None] * x[None, :]) ** 2)
    # fourier mixture: sum_k k^-decay * cos(k * pi * (x - mu))
    k = np.arange(1, spec.modes + 1, dtype=float)
    coeff = k ** (-spec.decay)
    phase = np.pi * k[None, None, :] * (x[None, :, None] - mus[:, None, None])
    return np.tensordot(np.cos(phase), coeff, axes=([2], [0]))


def build_family(spec):
    """Realize the snapshot set described by ``spec``.

    With ``normalize`` set, every member is scaled by one common factor so the
    largest member norm is exactly one, whichever of the two norm modes
    measures it; the set then satisfies the norm-at-most-one convention in
    both modes.
    """
    values = _family_values(spec)
    if spec.normalize:
        w = spec.grid.weights
        peak = max(
            norm_values(values, w, HILBERT).max(),
            norm_values(values, w, SUP).max(),
        )
        if peak <= 0:
            raise ValueError("cannot normalize an all-zero family")
        values = values / peak
    members = tuple(DiscreteFunction(spec.grid, row) for row in values)
    return FunctionSet(members, label=spec.kind)


def _nearest_index(x, c):
    return int(np.argmin(np.abs(x - c)))


def build_dictionary(spec, grid, mode):
    """Realize ``spec`` as dual-normalized functionals on ``grid``.

    A Dirac in hilbert mode is realized as the narrowest local average the
    grid supports (a single cell); in sup mode it reads the nearest grid
    value exactly.
    """
    check_mode(mode)
    x = grid.points
    a, b = x[0], x[-1]
    out = []
    for c in spec.centers:
        if c < a or c > b:
            raise ValueError(f"center {c} outside grid range [{a}, {b}]")
        if spec.kind == DIRAC or spec.spread == 0.0:
            density = np.zeros(grid.size)
            k = _nearest_index(x, c)
            density[k] = 1.0 / grid.weights[k]
        else:
            mask = np.abs(x - c) <= spec.spread
            if not mask.any():
                mask[_nearest_index(x, c)] = True
            density = mask.astype(float)
        out.append(normalize_dual(Functional(grid, density), mode))
    return out


def dirac_dictionary(grid, mode, stride=1):
    """Dirac-type functionals at every ``stride``-th grid point."""
    spec = DictionarySpec(DIRAC, centers=tuple(grid.points[::stride]))
    return build_dictionary(spec, grid, mode)


def unisolvence_rank(F, sigmas, rel_tol=1e-10):
    """Numerical ranks backing the dictionary-separates-the-family check.

    Returns (rank of the reading matrix [sigma_k(phi_j)], rank of the
    weighted snapshot matrix); a usable pair satisfies
    rank_readings >= min(len(sigmas), rank_snapshots).  Ranks count singular
    values above ``rel_tol`` times the largest one, so the comparison does
    not depend on how either matrix is scaled.
    """
    from .core import functional_matrix

    grid = F.grid
    readings = functional_matrix(sigmas, grid) @ F.values_matrix().T
    sv_r = np.linalg.svd(readings, compute_uv=False)
    snap = np.sqrt(grid.weights)[:, None] * F.values_matrix().T
    sv_s = np.linalg.svd(snap, compute_uv=False)
    rank_r = int((sv_r > rel_tol * sv_r[0]).sum())
    rank_s = int((sv_s > rel_tol * sv_s[0]).sum())
    return rank_r, rank_s
