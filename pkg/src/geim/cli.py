"""Command-line orchestration: build, analyze, audit, assimilate.

Configs are JSON; tabular outputs are headered CSV with 17-significant-digit
decimals; artifact and report files round-trip byte exactly.  The audit
command exits nonzero when any inequality check fails, so it can gate CI.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import analysis, artifacts, families, rates
from .core import HILBERT, Grid, apply_functional
from .greedy import FULL, GreedyConfig, run_geim
from .interp import reconstruct

CONSISTENCY_TOL = 1e-10


class ConfigError(ValueError):
    pass


def _load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config parse error in {path} at line {e.lineno} column {e.colno}: {e.msg}")


def _values_from(section, what):
    """A list of numbers, or a {start, stop, count} range description."""
    if isinstance(section, dict):
        try:
            return np.linspace(section["start"], section["stop"], int(section["count"]))
        except KeyError as e:
            raise ConfigError(f"{what} range needs start/stop/count, missing {e}")
    return np.asarray(section, dtype=float)


def _build_grid(cfg):
    g = cfg.get("grid", {})
    return Grid.uniform(g.get("a", -1.0), g.get("b", 1.0), int(g.get("n", 200)))


def _build_family_spec(cfg, grid):
    f = cfg.get("family")
    if f is None:
        raise ConfigError("config is missing the 'family' section")
    kwargs = {}
    for key in ("width", "modes", "decay"):
        if key in f:
            kwargs[key] = f[key]
    return families.FamilySpec(
        kind=f.get("kind", families.GAUSSIAN_BUMP),
        param_grid=tuple(_values_from(f.get("params", {"start": -0.8, "stop": 0.8, "count": 40}), "family params")),
        grid=grid,
        normalize=bool(f.get("normalize", True)),
        **kwargs,
    )


def _build_dictionary(cfg, grid, mode):
    d = cfg.get("dictionary", {})
    centers = d.get("centers")
    if centers is None:
        centers = grid.points
    else:
        centers = _values_from(centers, "dictionary centers")
    spec = families.DictionarySpec(
        kind=d.get("kind", families.DIRAC),
        centers=tuple(centers),
        spread=float(d.get("spread", 0.0)),
    )
    return families.build_dictionary(spec, grid, mode)


def _greedy_config(cfg, seed_override=None):
    g = cfg.get("greedy", {})
    seed = int(g.get("seed", 0)) if seed_override is None else seed_override
    return GreedyConfig(
        n_max=int(g.get("n_max", 10)),
        mode=g.get("mode", HILBERT),
        eta_target=float(g.get("eta_target", 1.0)),
        subset_schedule=g.get("subset_schedule", FULL),
        subset_size=g.get("subset_size"),
        stop_tol=float(g.get("stop_tol", 1e-12)),
        seed=seed,
    )


def _out_dir(cfg, args):
    out = args.out or cfg.get("outputs") or "."
    os.makedirs(out, exist_ok=True)
    return out


def cmd_build(args):
    cfg = _load_config(args.config)
    out = _out_dir(cfg, args)
    grid = _build_grid(cfg)
    F = families.build_family(_build_family_spec(cfg, grid))
    gcfg = _greedy_config(cfg, args.seed)
    sigmas = _build_dictionary(cfg, grid, gcfg.mode)
    result = run_geim(F, sigmas, gcfg)

    artifacts.save_artifact(os.path.join(out, "artifact.json"), result)
    rows = [
        (n, result.eps_history[n], result.effective_eta[n],
         result.selected_phi_idx[n], result.selected_sigma_idx[n])
        for n in range(result.n)
    ]
    artifacts.write_csv(
        os.path.join(out, "greedy.csv"),
        ("n", "eps_n", "effective_eta", "selected_phi_index", "selected_sigma_index"),
        rows,
    )
    print(f"selected {result.n} of {gcfg.n_max} requested basis functions "
          f"({gcfg.mode} mode)")
    print(f"stopped_early={result.stopped_early} final_eps={result.eps_history[-1]:.6e}")
    print(f"artifact: {os.path.join(out, 'artifact.json')}")
    return 0


def report_to_dict(report):
    return {
        "mode": report.mode,
        "d0": report.d0,
        "d_is_hilbert_surrogate": report.d_is_hilbert_surrogate,
        "tau": report.tau,
        "d": report.d,
        "lambda": report.lam,
        "beta": report.beta_infsup,
        "gamma": report.gamma,
        "lebesgue_upper": report.lebesgue_upper,
        "eps_worst": report.eps_worst,
        "eta_effective": report.eta_effective,
    }


def report_from_dict(data):
    return analysis.AnalysisReport(
        mode=data["mode"],
        tau=np.array(data["tau"]),
        d=np.array(data["d"]),
        lam=np.array(data["lambda"]),
        beta_infsup=np.array(data["beta"]),
        gamma=np.array(data["gamma"]),
        lebesgue_upper=np.array(data["lebesgue_upper"]),
        eps_worst=np.array(data["eps_worst"]),
        eta_effective=np.array(data["eta_effective"]),
        d0=float(data["d0"]),
        d_is_hilbert_surrogate=bool(data["d_is_hilbert_surrogate"]),
    )


def cmd_analyze(args):
    cfg = _load_config(args.config)
    out = _out_dir(cfg, args)
    result = artifacts.load_artifact(os.path.join(out, "artifact.json"))
    grid = _build_grid(cfg)
    if not grid.matches(result.grid):
        print("error: artifact grid does not match the grid regenerated from the config",
              file=sys.stderr)
        return 2
    F = families.build_family(_build_family_spec(cfg, grid))
    report = analysis.build_report(F, result)

    footer = [
        f"tau_nonincreasing: {'pass' if np.all(np.diff(report.tau) <= 1e-12) else 'FAIL'}",
        f"d_nonincreasing: {'pass' if np.all(np.diff(report.d) <= 1e-12) else 'FAIL'}",
    ]
    if report.mode == HILBERT:
        lam_check = np.max(np.abs(report.lam * report.beta_infsup - 1.0))
        footer.append(f"lambda_times_beta_is_one: {'pass' if lam_check <= 1e-12 else 'FAIL'}")
    if report.d_is_hilbert_surrogate:
        footer.append("hilbert_surrogate=true")
    beta_col = np.where(np.isnan(report.beta_infsup), 0.0, report.beta_infsup)
    rows = [
        (n, report.tau[n - 1], report.d[n - 1], report.lam[n - 1],
         float(beta_col[n - 1]), report.gamma[n - 1], report.lebesgue_upper[n - 1])
        for n in range(1, report.n + 1)
    ]
    artifacts.write_csv(
        os.path.join(out, "analysis.csv"),
        ("n", "tau", "d", "lambda", "beta", "gamma", "lebesgue_upper"),
        rows,
        footer_comments=footer,
    )
    with open(os.path.join(out, "analysis.json"), "w", newline="\n") as fh:
        fh.write(artifacts.dumps(report_to_dict(report)))
        fh.write("\n")
    if cfg.get("emit_plots") or args.emit_plots:
        for name, seq in (("tau", report.tau), ("d", report.d), ("eps", report.eps_worst)):
            with open(os.path.join(out, f"{name}.dat"), "w", newline="\n") as fh:
                for n, v in enumerate(seq, start=1):
                    fh.write(f"{n} {artifacts.format_float(v)}\n")
    print(f"analysis written to {out} ({report.n} rows)")
    for line in footer:
        print(f"  {line}")
    return 0


def _positive_prefix(seq):
    seq = np.asarray(seq, dtype=float)
    floor = 1e-13 * max(seq[0], 1e-300)
    k = 0
    while k < seq.size and seq[k] > floor:
        k += 1
    return seq[:k]


def cmd_audit(args):
    cfg = _load_config(args.config)
    out = _out_dir(cfg, args)
    path = os.path.join(out, "analysis.json")
    if not os.path.exists(path):
        print(f"error: missing analysis file {path}; run `geim analyze` first",
              file=sys.stderr)
        return 2
    with open(path) as fh:
        report = report_from_dict(json.load(fh))

    fits = {}
    d_prefix = _positive_prefix(report.d)
    if d_prefix.size >= 4:
        for kind in (rates.POLYNOMIAL, rates.EXPONENTIAL):
            try:
                fits[kind] = rates.fit_decay(d_prefix, kind)
            except ValueError:
                pass
    options = {"sweep": True, "beta_exponent": args.beta_exponent}
    if args.sweep_theorem:
        options["sweep_limit"] = args.nk_limit
    else:
        options["sweep_limit"] = min(args.nk_limit, 8)
    audit = rates.audit_run(report, fits, options)

    with open(os.path.join(out, "audit.json"), "w", newline="\n") as fh:
        fh.write(artifacts.dumps(audit.to_dict()))
        fh.write("\n")
    text = audit.to_text()
    with open(os.path.join(out, "audit.txt"), "w", newline="\n") as fh:
        fh.write(text + "\n")
    s = audit.summary()
    print(f"audit: {s['passed']} passed, {s['failed']} failed, {s['skipped']} skipped")
    for c in audit.failures():
        print(f"  FAIL {c.check_id} index={c.index} lhs={c.lhs:.6e} rhs={c.rhs:.6e}")
    return 0 if audit.all_passed else 1


def cmd_assimilate(args):
    cfg = _load_config(args.config)
    out = _out_dir(cfg, args)
    result = artifacts.load_artifact(os.path.join(out, "artifact.json"))
    m = artifacts.read_measurements_csv(args.measurements)
    n = args.n if args.n is not None else min(m.size, result.n)
    if m.size < n:
        print(f"error: need at least {n} measurements, got {m.size}", file=sys.stderr)
        return 2
    rec = reconstruct(m[:n], result)
    residual = max(
        (abs(apply_functional(result.selected_sigma[i], rec) - m[i]) for i in range(n)),
        default=0.0,
    )
    rows = list(zip(result.grid.points.tolist(), rec.values.tolist()))
    artifacts.write_csv(
        os.path.join(out, "reconstruction.csv"), ("point", "value"), rows,
        footer_comments=[f"consistency_residual: {artifacts.format_float(residual)}"],
    )
    print(f"reconstruction written to {os.path.join(out, 'reconstruction.csv')}")
    print(f"interpolation consistency residual: {residual:.3e}")
    if residual > CONSISTENCY_TOL:
        print(f"error: consistency residual exceeds {CONSISTENCY_TOL:g}", file=sys.stderr)
        return 1
    return 0


def _parser():
    p = argparse.ArgumentParser(
        prog="geim",
        description="greedy basis/functional co-selection, reconstruction and bound audits",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="JSON run configuration")
        sp.add_argument("--out", default=None, help="output directory (overrides config)")

    b = sub.add_parser("build", help="run the greedy selection and save the artifact")
    common(b)
    b.add_argument("--seed", type=int, default=None, help="override the config seed")

    a = sub.add_parser("analyze", help="compute measured sequences for a built artifact")
    common(a)
    a.add_argument("--emit-plots", action="store_true", help="write two-column decay series")

    u = sub.add_parser("audit", help="check every bound against the analysis sequences")
    common(u)
    u.add_argument("--sweep-theorem", action="store_true",
                   help="enumerate all (N, K, m) product-bound instances")
    u.add_argument("--nk-limit", type=int, default=16, help="largest N+K in the sweep")
    u.add_argument("--beta-exponent", type=float, default=1.0,
                   help="exponent parameter (> 1/2) of the power-law gamma audit")

    s = sub.add_parser("assimilate", help="reconstruct a field from a measurement file")
    common(s)
    s.add_argument("--measurements", required=True, help="CSV with one reading per line")
    s.add_argument("--n", type=int, default=None, help="number of measurements to use")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    handlers = {
        "build": cmd_build,
        "analyze": cmd_analyze,
        "audit": cmd_audit,
        "assimilate": cmd_assimilate,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
