"""Command-line interface.

Subcommands::

    verify   [--nodes N] [--map-scale L] [--kmax K] [--tol-residual T] [--seed S]
             [--out PATH] [--format json|csv]
    spectrum --k K [--num-eigs M] [--nodes N] [--out PATH]
    shoot    [--phi0 P] [--rmax R] [--rtol T] [--atol T] [--out PATH]
    kernel   --x x1,...,x6 --y y1,...,y6 [--kmax K]

Values may also come from a YAML or JSON file named by the NLH_CONFIG
environment variable, keyed by flag name.  Top-level keys apply to every
subcommand that has that flag; a table named after a subcommand overrides
them for that subcommand.  Command-line flags take precedence over the file.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np
import yaml

from . import __version__
from .errors import ConfigurationError, Hartree6Error, UsageError
from .grid import build_grid, weighted_inner_product, weighted_norm
from .groundstate import eval_omega_prime
from .operator import assemble_mode_operator
from .potential import expand_kernel
from .shooting import check_bounds, shoot_frak_L0
from .spectrum import classify_kernel, solve_spectrum
from .verify import VerifyConfig, emit_report, run_verification_suite

__all__ = ["main", "build_parser", "load_config_file", "CONFIG_ENV"]

CONFIG_ENV = "NLH_CONFIG"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# built-in defaults per subcommand, keyed by argparse destination
DEFAULTS = {
    "verify": {"nodes": 256, "map_scale": 1.0, "kmax": 6, "tol_residual": 1e-6, "seed": 42,
               "out": None, "format": "json"},
    "spectrum": {"k": None, "num_eigs": 6, "nodes": 256, "out": None},
    "shoot": {"phi0": 1.0, "rmax": 50.0, "rtol": 1e-10, "atol": 1e-12, "out": None},
    "kernel": {"x": None, "y": None, "kmax": 40},
}
REQUIRED = {"spectrum": ("k",), "kernel": ("x", "y")}


def _point(text):
    try:
        vals = [float(v) for v in str(text).replace(" ", "").split(",") if v != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if len(vals) != 6:
        raise argparse.ArgumentTypeError(f"expected 6 coordinates, got {len(vals)}")
    return vals


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hartree6",
        description="Verify the mode decomposition of the linearized Hartree operator in R^6.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the full verification suite")
    p.add_argument("--nodes", type=int, help="grid nodes (default 256)")
    p.add_argument("--map-scale", type=float, dest="map_scale", help="map length scale (default 1.0)")
    p.add_argument("--kmax", type=int, help="largest harmonic degree checked (default 6)")
    p.add_argument("--tol-residual", type=float, dest="tol_residual",
                   help="tolerance of the kernel residual checks (default 1e-6)")
    p.add_argument("--seed", type=int, help="seed of the randomized checks (default 42)")
    p.add_argument("--out", help="write the report to this file")
    p.add_argument("--format", choices=("json", "csv"), help="report format (default json)")

    p = sub.add_parser("spectrum", help="smallest eigenpairs of one mode operator")
    p.add_argument("--k", type=int, help="harmonic degree (required)")
    p.add_argument("--num-eigs", type=int, dest="num_eigs", help="number of eigenpairs (default 6)")
    p.add_argument("--nodes", type=int, help="grid nodes (default 256)")
    p.add_argument("--out", help="write eigenvalues and eigenvectors as JSON")

    p = sub.add_parser("shoot", help="shooting solution of the k = 0 problem without rank-one part")
    p.add_argument("--phi0", type=float, help="phi(0) (default 1.0)")
    p.add_argument("--rmax", type=float, help="right end of the mesh (default 50)")
    p.add_argument("--rtol", type=float, help="relative tolerance (default 1e-10)")
    p.add_argument("--atol", type=float, help="absolute tolerance (default 1e-12)")
    p.add_argument("--out", help="write the trajectory (CSV if the name ends in .csv, else JSON)")

    p = sub.add_parser("kernel", help="zonal expansion of |x - y|^{-4}")
    p.add_argument("--x", type=_point, help="x1,...,x6 (use --x=-1,... for a leading minus)")
    p.add_argument("--y", type=_point, help="y1,...,y6")
    p.add_argument("--kmax", type=int, help="truncation degree (default 40)")
    return parser


def load_config_file(path):
    """Parse a YAML (or JSON) mapping of flag names to values."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path!r}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"cannot parse config file {path!r}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError("config file must contain a mapping")
    return data


def _normalize(key):
    return str(key).lstrip("-").replace("-", "_")


def _config_values(command, data):
    known = {k for d in DEFAULTS.values() for k in d}
    out = {}
    sections = {}
    for key, val in data.items():
        if key in DEFAULTS:
            if not isinstance(val, dict):
                raise ConfigurationError(f"config section {key!r} must be a mapping")
            sections[key] = val
            continue
        name = _normalize(key)
        if name not in known:
            raise ConfigurationError(f"unknown config key {key!r}")
        if name in DEFAULTS[command]:
            out[name] = val
    for key, val in sections.get(command, {}).items():
        name = _normalize(key)
        if name not in DEFAULTS[command]:
            raise ConfigurationError(f"unknown key {key!r} in config section {command!r}")
        out[name] = val
    return out


def resolve_options(command, args, environ=None):
    """Merge flags, the NLH_CONFIG file and built-in defaults, in that order."""
    environ = os.environ if environ is None else environ
    merged = dict(DEFAULTS[command])
    path = environ.get(CONFIG_ENV)
    if path:
        merged.update(_config_values(command, load_config_file(path)))
    for name in DEFAULTS[command]:
        val = getattr(args, name, None)
        if val is not None:
            merged[name] = val
    for name in REQUIRED.get(command, ()):
        if merged[name] is None:
            raise UsageError(f"{command}: --{name} is required")
    return merged


def _cast(opts, name, kind):
    try:
        if kind is int:
            v = opts[name]
            if isinstance(v, bool) or int(v) != float(v):
                raise ValueError
            opts[name] = int(v)
        elif kind is float:
            opts[name] = float(opts[name])
        elif kind == "point":
            v = opts[name]
            opts[name] = _point(",".join(str(x) for x in v) if isinstance(v, (list, tuple)) else v)
    except (TypeError, ValueError, argparse.ArgumentTypeError) as exc:
        raise ConfigurationError(f"invalid value for {name}: {opts[name]!r}") from exc


def _write(path, text):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path!r}: {exc}") from exc


def _cmd_verify(opts, out):
    for name in ("nodes", "kmax", "seed"):
        _cast(opts, name, int)
    for name in ("map_scale", "tol_residual"):
        _cast(opts, name, float)
    if opts["format"] not in ("json", "csv"):
        raise UsageError(f"unknown format {opts['format']!r}; use json or csv")
    config = VerifyConfig(nodes=opts["nodes"], map_scale=opts["map_scale"], kmax=opts["kmax"],
                          tol_residual=opts["tol_residual"], seed=opts["seed"])
    build_grid(config.nodes, config.map_scale)
    report = run_verification_suite(config)
    for c in report.checks:
        value = "error" if c.value is None else f"{c.value:.3e}"
        print(f"{c.status.upper():4s}  {c.name:40s} value={value:>10s}  tol={c.tolerance:.1e}", file=out)
    n_fail = len(report.failed)
    print(f"{len(report.checks) - n_fail}/{len(report.checks)} checks passed", file=out)
    if opts["out"]:
        try:
            emit_report(report, opts["format"], opts["out"])
        except OSError as exc:
            raise UsageError(f"cannot write {opts['out']!r}: {exc}") from exc
    return EXIT_OK if report.all_passed else EXIT_FAIL


def _cmd_spectrum(opts, out):
    for name in ("k", "num_eigs", "nodes"):
        _cast(opts, name, int)
    if opts["k"] < 0:
        raise UsageError("--k must be nonnegative")
    grid = build_grid(opts["nodes"])
    op = assemble_mode_operator(opts["k"], grid)
    res = solve_spectrum(op, opts["num_eigs"])
    cands = classify_kernel(res)
    print(f"k = {res.k}, n = {grid.n}, map_scale = {grid.map_scale}", file=out)
    print(f"{'i':>3s} {'eigenvalue':>22s} {'residual':>10s} {'tail mass':>10s}", file=out)
    for i, (lam, r, loc) in enumerate(zip(res.eigenvalues, res.residuals, res.localization)):
        print(f"{i:3d} {lam:22.14e} {r:10.2e} {loc:10.2e}", file=out)
    print(f"localized near-zero eigenpairs: {len(cands)}", file=out)
    for c in cands:
        print(f"  index {c.index}: eigenvalue {c.eigenvalue:.3e}, sign changes {c.sign_changes}", file=out)
    if opts["out"]:
        data = {
            "k": res.k,
            "grid": grid.parameters(),
            "eigenvalues": res.eigenvalues.tolist(),
            "residuals": res.residuals.tolist(),
            "localization": res.localization.tolist(),
            "r_tail": res.r_tail,
            "max_imag": res.max_imag,
            "kernel_candidates": [vars(c) for c in cands],
            "nodes": grid.nodes.tolist(),
            "eigenvectors": [v.values.tolist() for v in res.eigenvectors],
        }
        if res.k == 1:
            wp = grid.sample(eval_omega_prime)
            data["cosine_with_omega_prime"] = [
                abs(weighted_inner_product(v, wp)) / (weighted_norm(v) * weighted_norm(wp))
                for v in res.eigenvectors
            ]
        _write(opts["out"], json.dumps(data, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _cmd_shoot(opts, out):
    for name in ("phi0", "rmax", "rtol", "atol"):
        _cast(opts, name, float)
    traj = shoot_frak_L0(opts["phi0"], opts["rmax"], opts["rtol"], opts["atol"])
    print(f"phi0 = {traj.phi0}, r_max = {traj.r_max}, nfev = {traj.nfev}, "
          f"runtime = {traj.runtime_s:.3f} s", file=out)
    sign_ok = bool(np.all(traj.phi * np.sign(traj.phi0) > 0))
    print(f"min phi/phi0 = {np.min(traj.phi / traj.phi0):.6f}, sign persistent: {sign_ok}", file=out)
    status = EXIT_OK if sign_ok else EXIT_FAIL
    bounds = None
    if traj.phi0 > 0:
        rep = check_bounds(traj)
        bounds = {
            "passed": rep.passed,
            "min_slack_i": rep.min_slack_i,
            "min_slack_ii": rep.min_slack_ii,
            "min_slack_iii": rep.min_slack_iii,
            "max_identity_residual": rep.max_identity_residual,
        }
        for key, ok in rep.passed.items():
            print(f"{'PASS' if ok else 'FAIL':4s}  {key}", file=out)
        if not rep.all_passed:
            status = EXIT_FAIL
    if opts["out"]:
        cols = ("r", "phi", "dphi", "m_a", "m_b", "lam")
        table = np.column_stack([getattr(traj, c) for c in cols])
        if opts["out"].endswith(".csv"):
            lines = [",".join(cols)] + [",".join(repr(float(v)) for v in row) for row in table]
            _write(opts["out"], "\n".join(lines) + "\n")
        else:
            data = {c: getattr(traj, c).tolist() for c in cols}
            data.update({"phi0": traj.phi0, "rtol": traj.rtol, "atol": traj.atol, "eps": traj.eps,
                         "nfev": traj.nfev, "bounds": bounds})
            _write(opts["out"], json.dumps(data, indent=2, sort_keys=True) + "\n")
    return status


def _cmd_kernel(opts, out):
    _cast(opts, "x", "point")
    _cast(opts, "y", "point")
    _cast(opts, "kmax", int)
    res = expand_kernel(opts["x"], opts["y"], K=opts["kmax"], details=True)
    print(f"exact |x-y|^-4      = {res.exact:.16e}", file=out)
    print(f"series (K = {opts['kmax']:d})    = {res.value:.16e}", file=out)
    print(f"relative error      = {res.relative_error:.3e}", file=out)
    print(f"ratio rho = {res.rho:.6f}, cosine t = {res.cosine:.6f}", file=out)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["k", "term", "partial_sum"])
    for k, (term, part) in enumerate(zip(res.terms, np.cumsum(res.terms))):
        writer.writerow([k, f"{term:.16e}", f"{part:.16e}"])
    return EXIT_OK


COMMANDS = {"verify": _cmd_verify, "spectrum": _cmd_spectrum, "shoot": _cmd_shoot, "kernel": _cmd_kernel}


def main(argv=None, out=None, environ=None):
    """Entry point; returns the process exit code."""
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        opts = resolve_options(args.command, args, environ)
        return COMMANDS[args.command](opts, out)
    except (Hartree6Error, ValueError) as exc:
        # domain, configuration and usage problems; numerical failures inside
        # verify are recorded in the report instead of raised
        if isinstance(exc, Hartree6Error) and not isinstance(exc, ValueError):
            print(f"hartree6: error: {exc}", file=sys.stderr)
            return EXIT_FAIL
        print(f"hartree6 {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
