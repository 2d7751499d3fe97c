"""Greedy co-selection of snapshots and measurement functionals.

Each step picks the snapshot whose current interpolant is worst, then the
functional that sees the residual best, and normalizes the residual by that
reading so the collocation matrix keeps a unit diagonal.  The weak variant
searches a sampled subset per step but always records the achieved fraction
of the full-set maximum, and keeps enlarging the sample until that fraction
reaches the configured floor.
"""

from dataclasses import dataclass, replace
import numpy as np

from .core import (
    HILBERT,
    DegenerateInputError,
    DiscreteFunction,
    FunctionSet,
    check_mode,
    functional_matrix,
    norm_values,
)
from .interp import interpolate_matrix

FULL = "full"
FIXED_SIZE = "fixed_size"
GROWING = "growing"
SCHEDULES = (FULL, FIXED_SIZE, GROWING)


class UnisolvenceError(RuntimeError):
    """Every dictionary functional annihilates the current residual."""


@dataclass(frozen=True)
class GreedyConfig:
    n_max: int
    mode: str = HILBERT
    eta_target: float = 1.0
    subset_schedule: str = FULL
    subset_size: int | None = None
    stop_tol: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        check_mode(self.mode)
        if self.n_max < 1:
            raise ValueError("n_max must be at least 1")
        if not 0.0 < self.eta_target <= 1.0:
            raise ValueError("eta_target must lie in (0, 1]")
        if self.subset_schedule not in SCHEDULES:
            raise ValueError(f"unknown subset schedule {self.subset_schedule!r}")
        if self.subset_schedule != FULL and not self.subset_size:
            raise ValueError("subset_size required for sampled schedules")
        if self.stop_tol < 0:
            raise ValueError("stop_tol must be nonnegative")


@dataclass(frozen=True)
class GreedyResult:
    """Selected snapshots, functionals, normalized basis and histories.

    ``B[i, j]`` holds sigma_i applied to q_j.  The diagonal is one and the
    upper triangle zero by construction of q_j; the matching-measurements
    property that makes those entries vanish is verified separately.
    """

    grid: object
    mode: str
    selected_phi: tuple
    selected_sigma: tuple
    basis_q: tuple
    B: np.ndarray
    eps_history: tuple
    effective_eta: tuple
    selected_phi_idx: tuple
    selected_sigma_idx: tuple
    stopped_early: bool = False

    @property
    def n(self):
        return len(self.basis_q)

    def basis_matrix(self):
        """Basis values as columns, shape (n_points, n)."""
        return np.column_stack([q.values for q in self.basis_q])

    def functional_rows(self, n=None):
        """Rows applying each selected functional to grid values."""
        n = self.n if n is None else n
        return functional_matrix(self.selected_sigma[:n], self.grid)


def _residual_norms(values, result, weights, mode):
    J = interpolate_matrix(values, result)
    return norm_values(values - J, weights, mode)


def select_first(F, sigmas, mode):
    """Pick the largest-norm snapshot, its best-seen functional and the
    reading-normalized first basis function."""
    i, j, q0 = _first_selection(
        F.values_matrix(), functional_matrix(sigmas, F.grid), F.grid.weights, mode
    )
    return F[i], sigmas[j], DiscreteFunction(F.grid, q0)


def _first_selection(values, sig_rows, weights, mode):
    norms = norm_values(values, weights, mode)
    if norms.max() <= 0.0:
        raise DegenerateInputError("all candidate snapshots are zero")
    i = int(np.argmax(norms))
    readings = sig_rows @ values[i]
    j = int(np.argmax(np.abs(readings)))
    if readings[j] == 0.0:
        raise UnisolvenceError("no functional sees the first snapshot")
    return i, j, values[i] / readings[j]


def _init_result(F, sigmas, cfg, candidate_idx=None):
    values = F.values_matrix()
    sig_rows = functional_matrix(sigmas, F.grid)
    norms = norm_values(values, F.grid.weights, cfg.mode)
    if candidate_idx is None:
        candidate_idx = np.arange(len(F))
    i_local, j, q0 = _first_selection(
        values[candidate_idx], sig_rows, F.grid.weights, cfg.mode
    )
    i = int(candidate_idx[i_local])
    return GreedyResult(
        grid=F.grid,
        mode=cfg.mode,
        selected_phi=(F[i],),
        selected_sigma=(sigmas[j],),
        basis_q=(DiscreteFunction(F.grid, q0),),
        B=np.array([[1.0]]),
        eps_history=(float(norms[i]),),
        effective_eta=(float(norms[i] / norms.max()),),
        selected_phi_idx=(i,),
        selected_sigma_idx=(j,),
    )


def greedy_step(state, F_n, sigmas_n, reference=None, stop_tol=0.0,
                candidate_idx=None, sigma_idx=None):
    """One selection step over the candidate subset ``F_n``.

    ``reference`` (default ``F_n``) is the set against which the achieved
    fraction of the maximal residual is measured.  Returns a new result; when
    every candidate residual falls below ``stop_tol`` times the initial error
    the state comes back unchanged except for the early-stop flag.
    """
    if reference is None:
        reference = F_n
    weights = state.grid.weights
    cand_values = F_n.values_matrix()
    ref_values = reference.values_matrix() if reference is not F_n else cand_values
    eps_cand = _residual_norms(cand_values, state, weights, state.mode)
    eps_ref = (
        eps_cand if ref_values is cand_values
        else _residual_norms(ref_values, state, weights, state.mode)
    )
    i_local = int(np.argmax(eps_cand))
    eps_sel = float(eps_cand[i_local])
    if eps_sel <= stop_tol * state.eps_history[0]:
        return replace(state, stopped_early=True)

    phi = F_n[i_local]
    residual = phi.values - interpolate_matrix(phi.values, state)[0]
    sig_rows = functional_matrix(sigmas_n, state.grid)
    readings = sig_rows @ residual
    j_local = int(np.argmax(np.abs(readings)))
    if readings[j_local] == 0.0:
        raise UnisolvenceError(
            "dictionary cannot see the selected residual; unisolvence fails on the active set"
        )
    q_vals = residual / readings[j_local]

    n = state.n
    B = np.zeros((n + 1, n + 1))
    B[:n, :n] = state.B
    B[n, :n] = state.basis_matrix().T @ sig_rows[j_local]  # new functional on old basis
    B[n, n] = 1.0  # exact by the residual normalization; uppers are exact zeros

    i_global = candidate_idx[i_local] if candidate_idx is not None else i_local
    j_global = sigma_idx[j_local] if sigma_idx is not None else j_local
    eta = eps_sel / float(np.max(eps_ref))
    return replace(
        state,
        selected_phi=state.selected_phi + (phi,),
        selected_sigma=state.selected_sigma + (sigmas_n[j_local],),
        basis_q=state.basis_q + (DiscreteFunction(state.grid, q_vals),),
        B=B,
        eps_history=state.eps_history + (eps_sel,),
        effective_eta=state.effective_eta + (eta,),
        selected_phi_idx=state.selected_phi_idx + (i_global,),
        selected_sigma_idx=state.selected_sigma_idx + (j_global,),
    )


def _draw_subset(rng, n_total, size, keep=None):
    idx = set() if keep is None else set(keep)
    size = min(size, n_total)
    while len(idx) < size:
        idx.update(rng.integers(0, n_total, size - len(idx)).tolist())
    return np.array(sorted(idx))


def run_geim(F, sigmas, cfg):
    """Run the full selection loop.

    With a sampled schedule the per-step search set is drawn with the
    configured seed, grown until the sampled maximum reaches ``eta_target``
    times the full-set maximum, and the achieved fraction is recorded.
    """
    if cfg.n_max > min(len(F), len(sigmas)):
        raise ValueError("n_max exceeds the number of snapshots or functionals")
    rng = np.random.default_rng(cfg.seed)
    if cfg.subset_schedule == FULL:
        state = _init_result(F, sigmas, cfg)
        for _ in range(1, cfg.n_max):
            try:
                state = greedy_step(state, F, sigmas, stop_tol=cfg.stop_tol)
            except UnisolvenceError as e:
                raise UnisolvenceError(f"step {state.n}: {e}") from e
            if state.stopped_early:
                break
        return state

    all_values = F.values_matrix()
    member_idx = np.arange(len(F))
    norms = norm_values(all_values, F.grid.weights, cfg.mode)
    idx0 = _draw_subset(rng, len(F), cfg.subset_size)
    while norms[idx0].max() < cfg.eta_target * norms.max() and len(idx0) < len(F):
        idx0 = _draw_subset(rng, len(F), len(idx0) + 1, keep=idx0)
    state = _init_result(F, sigmas, cfg, candidate_idx=idx0)
    grown = idx0 if cfg.subset_schedule == GROWING else None
    for _ in range(1, cfg.n_max):
        eps_full = _residual_norms(all_values, state, F.grid.weights, cfg.mode)
        if eps_full.max() <= cfg.stop_tol * state.eps_history[0]:
            state = replace(state, stopped_early=True)
            break
        keep = grown if cfg.subset_schedule == GROWING else None
        target_size = cfg.subset_size if keep is None else len(keep) + cfg.subset_size
        idx = _draw_subset(rng, len(F), target_size, keep=keep)
        # enlarge the sample until the weak-selection floor is met
        while eps_full[idx].max() < cfg.eta_target * eps_full.max() and len(idx) < len(F):
            idx = _draw_subset(rng, len(F), len(idx) + 1, keep=idx)
        if cfg.subset_schedule == GROWING:
            grown = idx
        subset = FunctionSet(tuple(F[i] for i in idx), label=F.label)
        try:
            state = greedy_step(
                state, subset, sigmas,
                reference=F, stop_tol=cfg.stop_tol,
                candidate_idx=member_idx[idx],
            )
        except UnisolvenceError as e:
            raise UnisolvenceError(f"step {state.n}: {e}") from e
        if state.stopped_early:
            break
    return state
