"""Quantities the convergence theory compares.

Everything here is computed on the finite snapshot set: worst-case
best-approximation errors of the greedy spaces, SVD-based widths, exact
interpolation-operator norms (inverse inf-sup constant in hilbert mode, the
max absolute row sum of the discrete operator in sup mode), and the
Gram-Schmidt coefficient matrix of the selected snapshots together with its
two structural inequalities.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .core import (
    HILBERT,
    DiscreteFunction,
    UnsupportedModeError,
    check_mode,
    norm_values,
)
from .interp import interpolate_matrix

RANK_TOL = 1e-10


class RankDeficientError(ValueError):
    """A basis expected to be independent is numerically rank deficient."""


class IllPosedInterpolationError(RuntimeError):
    """The basis/functional cross-Gramian is numerically singular."""


@dataclass(frozen=True)
class AnalysisReport:
    """Per-dimension sequences, all indexed n = 1..n (entry 0 is n = 1)."""

    mode: str
    tau: np.ndarray              # worst best-approximation error onto X_n
    d: np.ndarray                # widths of the snapshot set (hilbert SVD)
    lam: np.ndarray              # interpolation operator norm
    beta_infsup: np.ndarray      # inf-sup constants (hilbert runs, else nan)
    gamma: np.ndarray            # measured-eta / (1 + lam)
    lebesgue_upper: np.ndarray   # 2^(n-1) * max basis norm
    eps_worst: np.ndarray        # worst interpolation error over snapshots
    eta_effective: np.ndarray    # per-step achieved selection fraction
    d0: float                    # largest snapshot norm
    d_is_hilbert_surrogate: bool = False

    @property
    def n(self):
        return len(self.tau)


@dataclass(frozen=True)
class GramSchmidtCoefficients:
    """Gram-Schmidt coefficients of the selected snapshots.

    ``a`` is lower triangular with a[i, j] the coefficient of snapshot i on
    the j-th orthonormalized direction.  ``diagonal_bounds`` records the
    two-sided pinch on each diagonal entry, rows (n, gamma_n*tau_n, |a_nn|,
    tau_n); ``tail_bounds`` records the tail-sum cap, rows
    (n, m, sum_{j=n..m} a_mj^2, tau_n^2).
    """

    a: np.ndarray
    diagonal_bounds: np.ndarray
    tail_bounds: np.ndarray

    def block(self, N, K):
        """K x K sub-block with rows/columns N+1 .. N+K."""
        if N + K >= self.a.shape[0]:
            raise ValueError("block exceeds available selection history")
        return self.a[N + 1 : N + K + 1, N + 1 : N + K + 1]

    @property
    def diagonal_ok(self):
        d = self.diagonal_bounds
        return bool(np.all(d[:, 1] <= d[:, 2] * (1 + 1e-9) + 1e-12)
                    and np.all(d[:, 2] <= d[:, 3] * (1 + 1e-9) + 1e-12))

    @property
    def tails_ok(self):
        t = self.tail_bounds
        return bool(np.all(t[:, 2] <= t[:, 3] * (1 + 1e-9) + 1e-12))


def _scaled_columns(fns, weights):
    """Stack function values as columns, scaled so Euclidean = weighted L2."""
    M = np.column_stack([f.values if isinstance(f, DiscreteFunction) else np.asarray(f, float) for f in fns])
    return np.sqrt(weights)[:, None] * M


def _orthonormal_columns(scaled, label="basis"):
    q, r = np.linalg.qr(scaled)
    diag = np.abs(np.diag(r))
    if diag.min() <= RANK_TOL * max(diag.max(), 1.0):
        raise RankDeficientError(f"{label} is numerically rank deficient")
    return q


def project(f, basis, mode):
    """Best approximation of f in span(basis) and the achieved distance.

    Hilbert mode projects orthogonally; sup mode solves the grid-discrete
    minimax problem as a linear program.
    """
    check_mode(mode)
    w = f.grid.weights
    scaled = _scaled_columns(basis, w)
    if mode == HILBERT:
        U = _orthonormal_columns(scaled)
        fs = np.sqrt(w) * f.values
        ps = U @ (U.T @ fs)
        best = DiscreteFunction(f.grid, ps / np.sqrt(w))
        return best, float(np.linalg.norm(fs - ps))
    # minimax: minimize t subject to |f - Q c| <= t pointwise
    _orthonormal_columns(scaled)  # rank check only
    Q = np.column_stack([b.values if isinstance(b, DiscreteFunction) else np.asarray(b, float) for b in basis])
    npts, nb = Q.shape
    c_obj = np.zeros(nb + 1)
    c_obj[-1] = 1.0
    ones = np.ones((npts, 1))
    A_ub = np.block([[-Q, -ones], [Q, -ones]])
    b_ub = np.concatenate([-f.values, f.values])
    bounds = [(None, None)] * nb + [(0, None)]
    res = linprog(c_obj, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success:
        raise RuntimeError(f"minimax projection failed: {res.message}")
    coeffs = res.x[:nb]
    vals = Q @ coeffs
    best = DiscreteFunction(f.grid, vals)
    return best, float(np.max(np.abs(f.values - vals)))


def worst_projection_errors(F, result, mode=None, n_max=None):
    """Worst distance from the snapshot set to each nested greedy space,
    for n = 1 .. n_max."""
    mode = result.mode if mode is None else mode
    n_max = result.n if n_max is None else n_max
    w = F.grid.weights
    if mode == HILBERT:
        U = _orthonormal_columns(_scaled_columns(result.basis_q[:n_max], w), "greedy basis")
        S = np.sqrt(w)[:, None] * F.values_matrix().T      # (pts, m)
        C = U.T @ S                                        # (n_max, m)
        return np.array([
            np.linalg.norm(S - U[:, :n] @ C[:n], axis=0).max()
            for n in range(1, n_max + 1)
        ])
    out = np.empty(n_max)
    for n in range(1, n_max + 1):
        dists = [project(f, result.basis_q[:n], mode)[1] for f in F]
        out[n - 1] = max(dists)
    return out


def kolmogorov_widths(F, n_max, mode=HILBERT):
    """Widths d_0..d_n_max of the finite snapshot set.

    d_n is the worst snapshot distance to the span of the leading n left
    singular vectors of the quadrature-scaled snapshot matrix; d_0 is the
    largest snapshot norm.  Only the hilbert geometry is supported.
    """
    if mode != HILBERT:
        raise UnsupportedModeError(
            "widths are computed in hilbert mode only; sup-mode reports reuse "
            "them as a flagged surrogate"
        )
    w = F.grid.weights
    S = np.sqrt(w)[:, None] * F.values_matrix().T
    U, sv, _ = np.linalg.svd(S, full_matrices=False)
    C = U.T @ S
    d = np.empty(n_max + 1)
    d[0] = np.linalg.norm(S, axis=0).max()
    upto = min(n_max, C.shape[0])
    for n in range(1, upto + 1):
        d[n] = np.linalg.norm(S - U[:, :n] @ C[:n], axis=0).max()
    if upto < n_max:
        d[upto + 1 :] = 0.0
    return d


def lebesgue_hilbert(result, n):
    """Exact operator norm in hilbert mode: (1/beta_n, beta_n) where beta_n
    is the smallest singular value of the cross-Gramian between the
    orthonormalized basis and the orthonormalized measurement representers."""
    w = result.grid.weights
    U = _orthonormal_columns(_scaled_columns(result.basis_q[:n], w), "greedy basis")
    reps = [s.weights for s in result.selected_sigma[:n]]
    V = _orthonormal_columns(_scaled_columns(reps, w), "representers")
    sv = np.linalg.svd(U.T @ V, compute_uv=False)
    beta = float(sv.min())
    if beta <= RANK_TOL:
        raise IllPosedInterpolationError("cross-Gramian is numerically singular")
    return 1.0 / beta, beta


def lebesgue_sup(result, n):
    """Exact operator norm in sup mode: max absolute row sum of the matrix
    sending grid values to interpolant grid values."""
    from .interp import solve_coeffs

    S = result.functional_rows(n)
    Q = result.basis_matrix()[:, :n]
    J = Q @ solve_coeffs(result.B[:n, :n], S)
    return float(np.abs(J).sum(axis=1).max())


def lebesgue_constant(result, n, mode=None):
    mode = result.mode if mode is None else mode
    if mode == HILBERT:
        return lebesgue_hilbert(result, n)[0]
    return lebesgue_sup(result, n)


def lebesgue_empirical(result, probes, n, mode=None):
    """Largest interpolant-to-field norm ratio over the probe set; a lower
    bound on the operator norm.  Zero-norm probes are skipped."""
    mode = result.mode if mode is None else mode
    w = result.grid.weights
    vals = probes.values_matrix()
    fn = norm_values(vals, w, mode)
    keep = fn > 0
    if not keep.any():
        raise ValueError("all probes have zero norm")
    Jn = norm_values(interpolate_matrix(vals[keep], result, n), w, mode)
    return float((Jn / fn[keep]).max())


def lebesgue_upper_bound(result, n, mode=None):
    """2^(n-1) times the largest basis-function norm."""
    mode = result.mode if mode is None else mode
    w = result.grid.weights
    qn = norm_values(np.array([q.values for q in result.basis_q[:n]]), w, mode)
    return float(2.0 ** (n - 1) * qn.max())


def gram_schmidt_matrix(result, tau, gamma):
    """Lower-triangular expansion of each selected snapshot on the
    Gram-Schmidt orthonormalization of its predecessors, plus records of the
    diagonal pinch and tail-sum cap against ``tau`` (hilbert geometry).

    Raises on rank deficiency, which happens when a run was pushed past the
    snapshot rank.
    """
    w = result.grid.weights
    scaled = _scaled_columns(result.selected_phi, w)
    q, r = np.linalg.qr(scaled)
    diag = np.diag(r).copy()
    # pivots shrink with the residual errors, which are legitimately tiny
    # near stopping; only flag pivots at the roundoff floor
    if np.abs(diag).min() <= 1e-13 * max(np.abs(diag).max(), 1.0):
        raise RankDeficientError("selected snapshots are numerically dependent")
    signs = np.sign(diag)
    a = (r * signs[:, None]).T  # rows: snapshots; columns: orthonormal directions
    n_sel = a.shape[0]
    diag_rows = []
    tail_rows = []
    for n in range(1, n_sel):
        diag_rows.append((n, gamma[n - 1] * tau[n - 1], abs(a[n, n]), tau[n - 1]))
        for m in range(n, n_sel):
            tail = float(np.sum(a[m, n : m + 1] ** 2))
            tail_rows.append((n, m, tail, tau[n - 1] ** 2))
    return GramSchmidtCoefficients(
        a=a, diagonal_bounds=np.array(diag_rows), tail_bounds=np.array(tail_rows)
    )


def projection_product_inequality(G, W, m):
    """Check the triangular-matrix product bound: the squared diagonal
    product of a lower-triangular G is at most the m-th power of the mean
    squared projected row norm onto W times the (K-m)-th power of the mean
    squared residual row norm.

    Returns (ok, log_lhs, log_rhs, margin); the comparison runs in log space
    so tiny diagonals cannot underflow.
    """
    G = np.asarray(G, dtype=float)
    K = G.shape[0]
    W = np.asarray(W, dtype=float)
    if W.shape != (K, m):
        raise ValueError(f"W must be {K} x {m}, got {W.shape}")
    if m < 1 or m >= K:
        raise ValueError("need 1 <= m < K")
    Wq, _ = np.linalg.qr(W)
    P = G @ Wq                       # row projections in the W coordinates
    proj2 = (P * P).sum()
    resid2 = (G * G).sum() - proj2
    diag = np.abs(np.diag(G))
    with np.errstate(divide="ignore"):
        log_lhs = float(2.0 * np.sum(np.log(diag))) if diag.min() > 0 else -np.inf
        log_rhs = (
            m * np.log(proj2 / m) if proj2 > 0 else -np.inf
        ) + (
            (K - m) * np.log(max(resid2, 0.0) / (K - m)) if resid2 > 0 else -np.inf
        )
    ok = log_lhs <= log_rhs + np.log1p(1e-9) or log_lhs == -np.inf
    return bool(ok), log_lhs, float(log_rhs), float(log_rhs - log_lhs)


def _eta_for_step(eta_effective, n):
    if n < len(eta_effective):
        return eta_effective[n]
    return min(eta_effective)


def build_report(F, result):
    """Assemble every measured sequence for a finished run."""
    mode = result.mode
    n_sel = result.n
    w = F.grid.weights
    tau = worst_projection_errors(F, result)
    d_full = kolmogorov_widths(F, n_sel, HILBERT)
    surrogate = mode != HILBERT
    if mode == HILBERT:
        # the SVD space minimizes mean-square distance, not the worst case,
        # so the greedy space is a second candidate subspace; reporting the
        # better of the two keeps the estimate an upper bound on the true
        # width while never exceeding the greedy projection error
        d_full[1:] = np.minimum(d_full[1:], tau)
    lam = np.empty(n_sel)
    beta = np.full(n_sel, np.nan)
    for n in range(1, n_sel + 1):
        if mode == HILBERT:
            lam[n - 1], beta[n - 1] = lebesgue_hilbert(result, n)
        else:
            lam[n - 1] = lebesgue_sup(result, n)
    eta = np.asarray(result.effective_eta)
    gamma = np.array([
        _eta_for_step(result.effective_eta, n) / (1.0 + lam[n - 1])
        for n in range(1, n_sel + 1)
    ])
    upper = np.array([lebesgue_upper_bound(result, n, mode) for n in range(1, n_sel + 1)])
    vals = F.values_matrix()
    eps_worst = np.array([
        norm_values(vals - interpolate_matrix(vals, result, n), w, mode).max()
        for n in range(1, n_sel + 1)
    ])
    return AnalysisReport(
        mode=mode,
        tau=tau,
        d=d_full[1 : n_sel + 1],
        lam=lam,
        beta_infsup=beta,
        gamma=gamma,
        lebesgue_upper=upper,
        eps_worst=eps_worst,
        eta_effective=eta,
        d0=float(d_full[0]),
        d_is_hilbert_surrogate=surrogate,
    )
