"""Command line: ``orliczvar inspect|solve|check CONFIG``.

Exit codes: 0 success, 1 iteration limit or failed checks, 2 non-coercive,
3 stalled line search, 64 configuration error, 65 invalid N-function,
66 unreadable input or output path.
"""
import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import checks
from .config import ConfigError, load_config
from .mesh import write_field_csv
from .nfunction import IndexOutOfRange, NFunctionError, sobolev_conjugate
from .solver import coercivity_estimate, growth_audit, minimize, power_critical

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_NON_COERCIVE = 2
EXIT_STALLED = 3
EXIT_CONFIG = 64
EXIT_PHI = 65
EXIT_IO = 66

_STATUS_EXIT = {"converged": EXIT_OK, "non_coercive": EXIT_NON_COERCIVE, "stalled": EXIT_STALLED,
                "max_iter": EXIT_FAILED}


def _fmt(x):
    return repr(float(x))


def _out_dir(args, config):
    path = Path(args.out_dir or config.get("output", "dir", "."))
    path.mkdir(parents=True, exist_ok=True)
    return path


def _conjugate(nf, dimension):
    """Sobolev conjugate, or None with the reason it is unavailable."""
    if dimension is None:
        return None, "no dimension given"
    try:
        return sobolev_conjugate(nf, dimension), ""
    except IndexOutOfRange as exc:
        return None, str(exc)


def cmd_inspect(config, out_dir, echo=print):
    nf = config.nfunction()
    sc, why = _conjugate(nf, config.dimension)
    echo(f"phi: {nf.name}")
    echo(f"ell = {nf.ell:.10g}")
    echo(f"m = {nf.em:.10g}")
    echo(f"K = {nf.delta2_constant:.10g}")
    if sc is None:
        echo(f"ell* = n/a ({why})")
        echo(f"m* = n/a")
    else:
        echo(f"ell* = {sc.ell_star:.10g}")
        echo(f"m* = {sc.em_star:.10g}")
    t = nf.probe_grid
    star = np.full_like(t, np.nan)
    if sc is not None:
        lo, hi = sc.domain
        ok = (t > lo) & (t < hi)
        star[ok] = sc.potential(t[ok])
    with open(out_dir / "nfun.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "phi", "Phi", "Phi_tilde", "Phi_star"])
        for row in zip(t, nf.phi(t), nf.potential(t), nf.complementary(t), star):
            w.writerow([_fmt(v) for v in row])
    return EXIT_OK


def _critical(config, nf):
    r = config.sections.get("reaction", {})
    dim = config.dimension
    if "a" not in r:
        return None
    if dim is None:
        raise ConfigError("growth constant 'a' needs [phi] dimension")
    if r.get("critical", "sobolev") == "power":
        if "gamma" not in r:
            raise ConfigError("critical = power needs [reaction] gamma")
        return power_critical(r["gamma"], dim)
    sc, why = _conjugate(nf, dim)
    if sc is None:
        raise ConfigError(f"no Sobolev conjugate for the growth audit: {why}")
    return sc


def cmd_solve(config, out_dir, echo=print):
    nf = config.nfunction()
    spec = config.problem(nf)
    report = minimize(spec)

    samples = config.get("solver", "coercivity_samples", 0)
    if samples > 0:
        report.coercivity_estimate = coercivity_estimate(
            spec, samples=samples, descent_steps=config.get("solver", "coercivity_steps", 200),
            seed=config.seed)
    r = config.sections.get("reaction", {})
    if "A" in r or "a" in r:
        conditions = ["potential", "weak"]
        if "A_infinity" in r:
            conditions.append("a_infinity")
        report.growth_violations = growth_audit(
            spec.reaction, phi_star=_critical(config, nf), n_samples=r.get("audit_samples", 10_000),
            seed=config.seed, conditions=tuple(conditions), points=spec.mesh.centroids[::7])

    write_field_csv(report.minimizer, out_dir / "solution.csv")
    with open(out_dir / "trace.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iter", "energy", "residual"])
        for i, (e, g) in enumerate(zip(report.energy_trace, report.residual_trace)):
            w.writerow([i, _fmt(e), _fmt(g)])
    with open(out_dir / "report.json", "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")

    echo(f"status: {report.status}")
    echo(f"iterations: {report.iterations}")
    echo(f"energy: {report.energy_trace[-1]:.12g}")
    echo(f"residual: {report.residual_norm:.3e}")
    if report.coercivity_estimate is not None:
        echo(f"coercivity estimate: {report.coercivity_estimate:.6g}")
    if report.growth_violations:
        echo(f"growth violations: {len(report.growth_violations)}")
    if report.message:
        echo(report.message)
    return _STATUS_EXIT[report.status]


def cmd_check(config, out_dir=None, echo=print):
    nf = config.nfunction()
    results = checks.run_suite(nf, seed=config.seed, dimension=config.dimension)
    for r in results:
        echo(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


COMMANDS = {"inspect": cmd_inspect, "solve": cmd_solve, "check": cmd_check}


def build_parser():
    p = argparse.ArgumentParser(prog="orliczvar", description="N-function toolkit and Orlicz-Dirichlet solver")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("config", help="INI run configuration")
    p.add_argument("--out-dir", help="directory for CSV/JSON outputs (default: [output] dir or .)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--max-iter", type=int, help="override the solver iteration limit")
    p.add_argument("--tol", type=float, help="override the residual tolerance")
    p.add_argument("--quiet", action="store_true", help="suppress informational output")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(message)s")
    echo = (lambda *a, **k: None) if args.quiet else print
    try:
        config = load_config(args.config)
        config = config.replace("solver", seed=args.seed, max_iter=args.max_iter, tol=args.tol)
        out_dir = _out_dir(args, config)
        return COMMANDS[args.command](config, out_dir, echo=echo)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NFunctionError as exc:
        print(f"invalid phi: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PHI


if __name__ == "__main__":
    sys.exit(main())
