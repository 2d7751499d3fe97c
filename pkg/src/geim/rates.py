"""Bound auditor: explicit rate constants and one-sided inequality checks.

Every check is of the form lhs <= rhs with relative slack 1e-9 (plus an
absolute 1e-12), evaluated in log space wherever products of many small
numbers could underflow.  Decay hypotheses are made true on the data first:
the fitted constant C0 is raised to the envelope value, so each conditional
bound is audited with its hypothesis satisfied exactly.
"""

from dataclasses import dataclass, field
import math
import numpy as np

POLYNOMIAL = "polynomial"
EXPONENTIAL = "exponential"

POLY_BANACH = "poly_banach"
EXP_BANACH = "exp_banach"
POLY_HILBERT = "poly_hilbert"
EXP_HILBERT = "exp_hilbert"
REGIMES = (POLY_BANACH, EXP_BANACH, POLY_HILBERT, EXP_HILBERT)

REL_SLACK = 1e-9
ABS_SLACK = 1e-12


def _passes(lhs, rhs):
    return lhs <= rhs * (1.0 + REL_SLACK) + ABS_SLACK


def _log_passes(log_lhs, log_rhs):
    if log_lhs == -math.inf:
        return True
    if log_rhs == -math.inf:
        return False
    return log_lhs <= log_rhs + math.log1p(REL_SLACK)


@dataclass(frozen=True)
class DecayFit:
    """Envelope-fitted decay model for a positive sequence.

    polynomial: s_n <= c0 * n^-alpha;  exponential: s_n <= c0 * exp(-c1 n^alpha).
    ``c0`` is raised until the bound dominates every fitted entry, so the
    model is a true pointwise envelope; ``r_squared`` reports the quality of
    the underlying log-space regression before the envelope adjustment.
    """

    kind: str
    c0: float
    alpha: float
    c1: float | None
    r_squared: float
    fitted_range: tuple

    def bound_at(self, n):
        n = np.asarray(n, dtype=float)
        if self.kind == POLYNOMIAL:
            return self.c0 * n ** (-self.alpha)
        return self.c0 * np.exp(-self.c1 * n**self.alpha)


@dataclass
class AuditCheck:
    check_id: str
    index: tuple
    lhs: float
    rhs: float
    margin: float
    passed: bool
    skipped: bool = False
    note: str = ""

    def as_dict(self):
        return {
            "check_id": self.check_id,
            "index": list(self.index),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "passed": self.passed,
            "skipped": self.skipped,
            "note": self.note,
        }


@dataclass
class RateAudit:
    checks: list = field(default_factory=list)

    def add(self, check_id, index, lhs, rhs, note=""):
        ok = _passes(lhs, rhs)
        self.checks.append(
            AuditCheck(check_id, tuple(index), float(lhs), float(rhs),
                       float(rhs - lhs), ok, note=note)
        )
        return ok

    def add_log(self, check_id, index, log_lhs, log_rhs, note=""):
        ok = _log_passes(log_lhs, log_rhs)
        lhs = math.exp(log_lhs) if log_lhs < 700 else math.inf
        rhs = math.exp(log_rhs) if log_rhs < 700 else math.inf
        self.checks.append(
            AuditCheck(check_id, tuple(index), lhs, rhs,
                       float(log_rhs - log_lhs), ok, note="log-margin; " + note)
        )
        return ok

    def skip(self, check_id, index, note):
        self.checks.append(
            AuditCheck(check_id, tuple(index), math.nan, math.nan, math.nan,
                       True, skipped=True, note=note)
        )

    def extend(self, checks):
        self.checks.extend(checks)

    @property
    def n_passed(self):
        return sum(1 for c in self.checks if c.passed and not c.skipped)

    @property
    def n_failed(self):
        return sum(1 for c in self.checks if not c.passed)

    @property
    def n_skipped(self):
        return sum(1 for c in self.checks if c.skipped)

    @property
    def all_passed(self):
        return self.n_failed == 0

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def summary(self):
        return {"passed": self.n_passed, "failed": self.n_failed,
                "skipped": self.n_skipped, "total": len(self.checks)}

    def to_dict(self):
        return {"summary": self.summary(), "checks": [c.as_dict() for c in self.checks]}

    def to_text(self):
        lines = [f"{'check':34s} {'index':>16s} {'lhs':>13s} {'rhs':>13s} {'margin':>13s} status"]
        for c in self.checks:
            status = "SKIP" if c.skipped else ("pass" if c.passed else "FAIL")
            idx = ",".join(str(i) for i in c.index)
            lines.append(
                f"{c.check_id:34s} {idx:>16s} {c.lhs:13.5e} {c.rhs:13.5e} "
                f"{c.margin:13.5e} {status}"
            )
        s = self.summary()
        lines.append(f"passed={s['passed']} failed={s['failed']} skipped={s['skipped']}")
        return "\n".join(lines)


def _r_squared(y, y_hat):
    ss_res = float(np.sum((y - y_hat) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res <= 1e-24 else 0.0
    return max(0.0, 1.0 - ss_res / ss_tot)


def fit_decay(seq, kind, alpha_range=(0.25, 2.0), alpha_steps=176):
    """Least-squares fit in log space, then envelope-adjust c0 upward.

    Polynomial fits log s against log n.  Exponential fits log s against
    n^alpha with alpha scanned over ``alpha_range``; the alpha with the best
    regression quality wins, and c0 is clamped to at least one so the
    exponential-regime hypotheses keep their normalization.
    """
    s = np.asarray(seq, dtype=float)
    if s.size < 4:
        raise ValueError("need at least 4 entries to fit a decay model")
    if not np.all(s > 0):
        raise ValueError("decay fit requires positive entries")
    n = np.arange(1, s.size + 1, dtype=float)
    logs = np.log(s)
    if kind == POLYNOMIAL:
        A = np.column_stack([np.ones_like(n), np.log(n)])
        coef, *_ = np.linalg.lstsq(A, logs, rcond=None)
        alpha = max(-coef[1], 1e-12)
        r2 = _r_squared(logs, A @ coef)
        c0 = float(np.max(s * n**alpha))
        return DecayFit(POLYNOMIAL, c0, float(alpha), None, r2, (1, s.size))
    if kind != EXPONENTIAL:
        raise ValueError(f"unknown decay kind {kind!r}")
    best = None
    for alpha in np.linspace(alpha_range[0], alpha_range[1], alpha_steps):
        A = np.column_stack([np.ones_like(n), n**alpha])
        coef, *_ = np.linalg.lstsq(A, logs, rcond=None)
        c1 = -coef[1]
        if c1 <= 0:
            continue
        r2 = _r_squared(logs, A @ coef)
        if best is None or r2 > best[0]:
            best = (r2, float(alpha), float(c1))
    if best is None:
        raise ValueError("sequence does not decay; no exponential fit found")
    r2, alpha, c1 = best
    c0 = float(max(1.0, np.max(s * np.exp(c1 * n**alpha))))
    return DecayFit(EXPONENTIAL, c0, alpha, c1, r2, (1, s.size))


def gamma_sequence(eta_eff, lam):
    """Effective weak-greedy constants eta_n / (1 + Lambda_n), elementwise."""
    eta = np.asarray(eta_eff, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("operator norms must be nonnegative")
    if np.any((eta <= 0) | (eta > 1)):
        raise ValueError("eta entries must lie in (0, 1]")
    return eta / (1.0 + lam)


def index_split(n):
    """Write n = 4l + k with k in {0,1,2,3}; return (l, k, l1, l2) where
    l1 = 2l + floor(2k/3) and l2 = 2(l + ceil(k/4))."""
    if n < 1:
        raise ValueError("n must be at least 1")
    l, k = divmod(n, 4)
    l1 = 2 * l + (2 * k) // 3
    l2 = 2 * (l + (1 if k > 0 else 0))
    return l, k, l1, l2


def _mean_log_gamma(gamma, start, count):
    """Mean of log gamma over 1-based indices start+1 .. start+count."""
    g = np.asarray(gamma, dtype=float)
    if start < 0 or start + count > g.size:
        raise ValueError(
            f"gamma window [{start + 1}, {start + count}] exits available history "
            f"(have {g.size} entries)"
        )
    return float(np.mean(np.log(g[start : start + count])))


def beta_coeff(n, regime, alpha, eta, gamma):
    """Prefactor beta_n of the decay transfer bounds tau_n <= C0 beta_n shape(n).

    n = 1 gives 2(1 + 1/eta) in every regime.  The polynomial regimes recurse
    through the split index l1 with a geometric-mean gamma window ending at n;
    the exponential regimes use the window 1..2*floor(n/2), with an extra
    sqrt(n) factor in the banach variant only.
    """
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    if n < 1:
        raise ValueError("n must be at least 1")
    if n == 1:
        return 2.0 * (1.0 + 1.0 / eta)
    if regime in (EXP_BANACH, EXP_HILBERT):
        half = 2 * (n // 2)
        inv_geo = math.exp(-_mean_log_gamma(gamma, 0, half))
        base = math.sqrt(2.0) * inv_geo
        return base * math.sqrt(n) if regime == EXP_BANACH else base
    _, k, l1, l2 = index_split(n)
    start = l1 - (1 if k > 0 else 0)
    inv_geo = math.exp(-_mean_log_gamma(gamma, start, l2))
    prev = beta_coeff(l1, regime, alpha, eta, gamma)
    root = 2.0 * l2 * prev if regime == POLY_BANACH else 2.0 * prev
    return inv_geo * math.sqrt(root) * (2.0 * math.sqrt(2.0)) ** alpha


def monotone_coeff(n, regime, alpha, eta, gamma_n):
    """Closed-form prefactors valid when the gamma sequence is nonincreasing."""
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    if n < 1:
        raise ValueError("n must be at least 1")
    if n == 1:
        return 2.0 * (1.0 + 1.0 / eta)
    if regime == POLY_BANACH:
        _, _, _, l2 = index_split(n)
        return 2.0 ** (3 * alpha + 1) * l2 / gamma_n**2
    if regime == POLY_HILBERT:
        return 2.0 ** (3 * alpha + 1) / gamma_n**2
    if regime == EXP_BANACH:
        return math.sqrt(2.0 * n) / gamma_n
    return math.sqrt(2.0) / gamma_n


def c1_zeta_constant(alpha, zeta, beta_exponent, c0, c_zeta):
    """Constant of the polynomial transfer bound under a power-law gamma
    hypothesis 1/gamma_n <= c_zeta n^zeta; valid for beta_exponent > 1/2.

    The audited conclusion is tau_n <= C1 * n^(-alpha + zeta + beta_exponent).
    """
    if beta_exponent <= 0.5:
        raise ValueError("beta_exponent must exceed 1/2")
    if zeta <= 0 or alpha <= 0:
        raise ValueError("alpha and zeta must be positive")
    b = beta_exponent
    first = (
        c0
        * 2.0 ** (2.0 * alpha**2 / zeta)
        * ((zeta + b) / (b - 0.5)) ** alpha
        * max(1.0, c_zeta ** ((zeta + b) / zeta))
    )
    n_top = 2 * math.floor(2 * (zeta + b)) + 1
    second = max(n ** (alpha - zeta - b) for n in range(1, n_top + 1))
    return max(first, second)


def product_bound_check(tau, gamma, d, N, K, m, space):
    """One instance of the K-term product bound on measured sequences.

    banach:  prod tau_{N+i}^2 <= gamma-product^-2 * 2^K K^(K-m)
             * (sum tau_{N+i}^2)^m * d_m^(2(K-m))
    hilbert: prod tau_{N+i}^2 <= gamma-product^-2 * (K/m)^m (K/(K-m))^(K-m)
             * tau_{N+1}^(2m) * d_m^(2(K-m))
    Indices are 1-based into tau/gamma/d.  Returns an AuditCheck.
    """
    tau = np.asarray(tau, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    d = np.asarray(d, dtype=float)
    if space not in ("banach", "hilbert"):
        raise ValueError("space must be 'banach' or 'hilbert'")
    if not (K >= 2 and 1 <= m < K and N >= 0):
        raise ValueError("need K >= 2, 1 <= m < K, N >= 0")
    if N + K > tau.size or N + K > gamma.size or m > d.size:
        raise IndexError("sequences too short for the requested (N, K, m)")
    t = tau[N : N + K]
    g = gamma[N : N + K]
    dm = d[m - 1]

    def safe_log(x):
        return math.log(x) if x > 0 else -math.inf

    log_lhs = float(np.sum([2.0 * safe_log(x) for x in t]))
    log_rhs = -2.0 * float(np.sum(np.log(g)))
    if space == "banach":
        sum_t2 = float(np.sum(t * t))
        log_rhs += K * math.log(2.0) + (K - m) * math.log(K)
        log_rhs += m * safe_log(sum_t2)
    else:
        log_rhs += m * math.log(K / m) + (K - m) * math.log(K / (K - m))
        log_rhs += 2.0 * m * safe_log(t[0])
    log_rhs += 2.0 * (K - m) * safe_log(dm)
    ok = _log_passes(log_lhs, log_rhs)
    lhs = math.exp(log_lhs) if log_lhs < 700 else math.inf
    rhs = math.exp(log_rhs) if log_rhs < 700 else math.inf
    return AuditCheck(
        f"product_bound_{space}", (N, K, m), lhs, rhs,
        float(log_rhs - log_lhs), ok, note="log-margin",
    )


def product_bound_sweep(tau, gamma, d, space, limit=None):
    """All (N, K, m) instances with N + K up to ``limit`` (default: length)."""
    n_avail = min(len(tau), len(gamma))
    limit = n_avail if limit is None else min(limit, n_avail)
    out = []
    for K in range(2, limit + 1):
        for N in range(0, limit - K + 1):
            for m in range(1, min(K, len(d) + 1)):
                out.append(product_bound_check(tau, gamma, d, N, K, m, space))
    return out


def even_index_bound_check(tau, gamma, d, ell, space):
    """Even-index bound: tau_{2l} <= 2 * gamma-geomean^-1 * sqrt(l d_l)
    (banach) or sqrt(2) * gamma-geomean^-1 * sqrt(d_l) (hilbert)."""
    n = 2 * ell
    tau = np.asarray(tau, dtype=float)
    d = np.asarray(d, dtype=float)
    if n > tau.size or ell > d.size:
        raise IndexError("sequences too short for the requested ell")
    inv_geo = math.exp(-_mean_log_gamma(gamma, 0, n))
    if space == "banach":
        rhs = 2.0 * inv_geo * math.sqrt(ell * d[ell - 1])
    else:
        rhs = math.sqrt(2.0) * inv_geo * math.sqrt(d[ell - 1])
    check = AuditCheck(
        f"even_index_bound_{space}", (ell,), float(tau[n - 1]), rhs,
        float(rhs - tau[n - 1]), _passes(tau[n - 1], rhs),
    )
    return check


def _fit_zeta_envelope(gamma, floor=0.25):
    """Power-law envelope for 1/gamma_n: returns (zeta, c_zeta) with
    1/gamma_n <= c_zeta n^zeta on the data."""
    g = np.asarray(gamma, dtype=float)
    n = np.arange(1, g.size + 1, dtype=float)
    inv = 1.0 / g
    A = np.column_stack([np.ones_like(n), np.log(n)])
    coef, *_ = np.linalg.lstsq(A, np.log(inv), rcond=None)
    zeta = max(float(coef[1]), floor)
    c_zeta = float(np.max(inv / n**zeta))
    return zeta, c_zeta


def audit_run(report, fits, options=None):
    """Audit every applicable bound against one run's measured sequences.

    ``report`` is an AnalysisReport; ``fits`` maps decay kinds (polynomial /
    exponential) to envelope DecayFits of the width sequence.  Checks whose
    hypotheses fail on the data (nonmonotone operator norms, missing fits)
    are recorded as explicit skips.
    """
    options = options or {}
    audit = RateAudit()
    tau, d, lam, gamma = report.tau, report.d, report.lam, report.gamma
    eps = report.eps_worst
    eta0 = float(report.eta_effective[0])
    eta_run = float(np.min(report.eta_effective))
    n_sel = report.n
    is_hilbert = report.mode == "hilbert"
    space = "hilbert" if is_hilbert else "banach"

    # sequence invariants
    audit.add("tau_nonincreasing", (), float(np.max(np.diff(tau), initial=0.0)), 0.0)
    audit.add("d_nonincreasing", (), float(np.max(np.diff(d), initial=0.0)), 0.0)
    audit.add("tau_at_most_one", (), float(tau.max()), 1.0)
    for n in range(1, n_sel + 1):
        audit.add("width_le_projection_error", (n,), d[n - 1], tau[n - 1],
                  note="surrogate width" if report.d_is_hilbert_surrogate else "")
    if is_hilbert:
        audit.add("lambda_at_least_one", (), 1.0, float(lam.min()))

    # dimension-one transfer: tau_1 <= 2 (1 + 1/eta) d_1
    audit.add("tau1_width_transfer", (1,), tau[0], 2.0 * (1.0 + 1.0 / eta0) * d[0])

    # interpolation error against best approximation
    for n in range(1, n_sel + 1):
        factor = lam[n - 1] if is_hilbert else 1.0 + lam[n - 1]
        audit.add("interp_error_vs_tau", (n,), eps[n - 1], factor * tau[n - 1])

    # operator-norm growth bound
    for n in range(1, n_sel + 1):
        audit.add("lebesgue_growth_bound", (n,), lam[n - 1], report.lebesgue_upper[n - 1])

    # even-index bounds
    for ell in range(1, n_sel // 2 + 1):
        audit.checks.append(even_index_bound_check(tau, gamma, d, ell, space))

    # product-bound sweep
    limit = options.get("sweep_limit")
    if options.get("sweep", True):
        audit.extend(product_bound_sweep(tau, gamma, d, space, limit))
        if is_hilbert:
            audit.extend(product_bound_sweep(tau, gamma, d, "banach", limit))

    gamma_monotone = bool(np.all(np.diff(gamma) <= 1e-12))

    for kind in (POLYNOMIAL, EXPONENTIAL):
        fit = fits.get(kind)
        if fit is None:
            audit.skip(f"decay_transfer_{kind}", (), "no decay fit supplied")
            continue
        hyp_ok = np.all(d <= fit.bound_at(np.arange(1, n_sel + 1)) * (1 + 1e-9))
        if not hyp_ok:
            audit.skip(f"decay_transfer_{kind}", (), "width envelope violated")
            continue
        regimes = [(POLY_BANACH, "banach"), (POLY_HILBERT, "hilbert")] \
            if kind == POLYNOMIAL else [(EXP_BANACH, "banach"), (EXP_HILBERT, "hilbert")]
        for regime, regime_space in regimes:
            if regime_space == "hilbert" and not is_hilbert:
                continue
            for n in range(1, n_sel + 1):
                beta_n = beta_coeff(n, regime, fit.alpha, eta0, gamma)
                if kind == POLYNOMIAL:
                    rhs = fit.c0 * beta_n * n ** (-fit.alpha)
                else:
                    c2 = fit.c1 * 2.0 ** (-2.0 * fit.alpha - 1.0)
                    rhs = fit.c0 * beta_n * math.exp(-c2 * n**fit.alpha)
                audit.add(f"decay_transfer_{regime}", (n,), tau[n - 1], rhs)
                audit.add(f"interp_decay_{regime}", (n,), eps[n - 1],
                          (1.0 + lam[n - 1]) * rhs)
            if gamma_monotone:
                for n in range(1, n_sel + 1):
                    bt = monotone_coeff(n, regime, fit.alpha, eta_run, gamma[n - 1])
                    if kind == POLYNOMIAL:
                        rhs = fit.c0 * bt * n ** (-fit.alpha)
                    else:
                        c2 = fit.c1 * 2.0 ** (-2.0 * fit.alpha - 1.0)
                        rhs = fit.c0 * bt * math.exp(-c2 * n**fit.alpha)
                    audit.add(f"decay_transfer_monotone_{regime}", (n,), tau[n - 1], rhs)
                    beta_n = beta_coeff(n, regime, fit.alpha, eta_run, gamma)
                    audit.add(f"monotone_dominates_{regime}", (n,), beta_n, bt)
            else:
                audit.skip(f"decay_transfer_monotone_{regime}", (),
                           "gamma sequence not nonincreasing")

    # monotone-lambda interpolation bounds, exponential regime
    fit = fits.get(EXPONENTIAL)
    if fit is not None and gamma_monotone:
        c2 = fit.c1 * 2.0 ** (-2.0 * fit.alpha - 1.0)
        for n in range(1, n_sel + 1):
            if n == 1:
                rhs = 2.0 * fit.c0 * (1.0 + 1.0 / eta_run) * (1.0 + lam[0])
            elif is_hilbert:
                rhs = fit.c0 * math.sqrt(2.0) * (1.0 + lam[n - 1]) ** 2 / eta_run \
                    * math.exp(-c2 * n**fit.alpha)
            else:
                rhs = fit.c0 * math.sqrt(2.0 * n) * (1.0 + lam[n - 1]) ** 2 / eta_run \
                    * math.exp(-c2 * n**fit.alpha)
            audit.add("interp_monotone_exp", (n,), eps[n - 1], rhs)
    elif fit is not None:
        audit.skip("interp_monotone_exp", (), "gamma sequence not nonincreasing")

    # power-law gamma transfer and its interpolation consequence
    fit = fits.get(POLYNOMIAL)
    if fit is not None:
        zeta, c_zeta = _fit_zeta_envelope(gamma)
        b = options.get("beta_exponent", 1.0)
        c1c = c1_zeta_constant(fit.alpha, zeta, b, fit.c0, c_zeta)
        for n in range(1, n_sel + 1):
            audit.add("zeta_transfer", (n,), tau[n - 1],
                      c1c * n ** (-fit.alpha + zeta + b),
                      note=f"zeta={zeta:.3g} c_zeta={c_zeta:.3g}")
            # the eta multiplier is the per-step one embedded in gamma_n
            eta_n = gamma[n - 1] * (1.0 + lam[n - 1])
            audit.add("zeta_interp", (n,), eps[n - 1],
                      eta_n * c_zeta * c1c * n ** (-fit.alpha + 2 * zeta + b))
        # cubic-width sanity: a fast polynomial envelope with mild operator
        # growth certifies a decaying interpolation bound
        if fit.alpha >= 3.0 and zeta <= 1.0:
            audit.add("cubic_width_sanity", (), 0.0,
                      fit.alpha - 2 * zeta - b,
                      note="interp bound exponent stays negative")

    return audit
