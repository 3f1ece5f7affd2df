"""The verification suite and its machine-readable report.

Each check produces one record.  ``value`` is a nonnegative defect (an error,
a shortfall below a bound, or a count of violations) with target 0.  A check
passes iff value <= tolerance.  Timing-dependent checks report a violation
count as ``value`` and keep the measured times under ``runtime_ms`` keys, so
that two runs with the same configuration serialize identically apart from
``runtime_ms`` fields.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate

from . import __version__
from .errors import ConfigurationError, UsageError
from .families import random_mode_profile, random_orthogonal_radial, random_positive_profile
from .grid import MIN_NODES, RadialFunction, build_grid, weighted_inner_product, weighted_norm
from .groundstate import (
    AREA_S4,
    C_HARTREE,
    VOL_S5,
    eval_lambda_omega,
    eval_omega,
    eval_omega_prime,
    eval_omega_second,
    eval_omega_squared,
    radial_laplacian_omega,
    radial_laplacian_omega_exact,
)
from .harmonics import alpha_k, zonal_density_exact
from .operator import apply_mode_operator, assemble_mode_operator, monotonicity_gaps, quadratic_form
from .potential import (
    apply_mode_potential,
    apply_mode_potential_dense,
    expand_kernel,
    oracle_potential_direct,
)
from .shooting import check_bounds, shoot_frak_L0
from .spectrum import classify_kernel, solve_spectrum

__all__ = [
    "VerifyConfig",
    "CheckRecord",
    "VerificationReport",
    "run_verification_suite",
    "emit_report",
    "report_to_json",
    "report_to_csv",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ("name", "status", "value", "tolerance", "runtime_ms")
CONVERGENCE_NODES = (64, 128, 256)


@dataclass(frozen=True)
class VerifyConfig:
    """Parameters of one suite run."""

    nodes: int = 256
    map_scale: float = 1.0
    kmax: int = 6
    tol_residual: float = 1e-6
    seed: int = 42
    num_random: int = 20
    num_pairs: int = 100
    num_eigs: int = 6

    def __post_init__(self):
        if isinstance(self.nodes, bool) or int(self.nodes) != self.nodes or self.nodes < MIN_NODES:
            raise ConfigurationError(f"nodes must be an integer >= {MIN_NODES}, got {self.nodes!r}")
        if not (math.isfinite(self.map_scale) and self.map_scale > 0):
            raise ConfigurationError(f"map_scale must be positive and finite, got {self.map_scale!r}")
        if isinstance(self.kmax, bool) or int(self.kmax) != self.kmax or self.kmax < 0:
            raise ConfigurationError(f"kmax must be a nonnegative integer, got {self.kmax!r}")
        if not self.tol_residual > 0:
            raise ConfigurationError("tol_residual must be positive")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ConfigurationError("seed must be a nonnegative integer")
        for name in ("num_random", "num_pairs", "num_eigs"):
            if int(getattr(self, name)) < 1:
                raise ConfigurationError(f"{name} must be positive")


@dataclass
class CheckRecord:
    """One verification outcome."""

    name: str
    paper_anchor: str
    status: str
    value: float | None
    tolerance: float
    runtime_ms: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.status == "pass"


@dataclass
class VerificationReport:
    """Outcome of :func:`run_verification_suite`."""

    version: str
    grid: dict
    seed: int
    config: dict
    checks: list

    @property
    def all_passed(self):
        return all(c.passed for c in self.checks)

    @property
    def failed(self):
        return [c for c in self.checks if not c.passed]

    def names(self):
        return [c.name for c in self.checks]

    def to_dict(self):
        return {
            "tool": "hartree6",
            "version": self.version,
            "grid": dict(self.grid),
            "seed": self.seed,
            "config": dict(self.config),
            "summary": {
                "total": len(self.checks),
                "passed": sum(c.passed for c in self.checks),
                "failed": len(self.failed),
            },
            "checks": [_clean(asdict(c)) for c in self.checks],
        }

    @classmethod
    def from_dict(cls, data):
        checks = [CheckRecord(**c) for c in data["checks"]]
        return cls(data["version"], data["grid"], data["seed"], data["config"], checks)


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


class _Recorder:
    """Collects records of one check group, timing each since the previous one."""

    def __init__(self, names, anchor):
        self.expected = list(names)
        self.anchor = anchor
        self.records = []
        self._t = time.perf_counter()

    def add(self, name, value, tolerance, **details):
        if name not in self.expected:
            raise RuntimeError(f"undeclared check {name!r}")
        now = time.perf_counter()
        value = None if value is None else float(value)
        ok = value is not None and math.isfinite(value) and value <= tolerance
        details = _clean({"target": 0.0, **details})
        self.records.append(
            CheckRecord(name, self.anchor, "pass" if ok else "fail", value, float(tolerance),
                        1e3 * (now - self._t), details)
        )
        self._t = now

    def fail_remaining(self, exc, tolerances):
        done = {r.name for r in self.records}
        now = time.perf_counter()
        diag = getattr(exc, "diagnostics", None)
        for name in self.expected:
            if name in done:
                continue
            details = {"error": type(exc).__name__, "message": str(exc),
                       "traceback": traceback.format_exception_only(type(exc), exc)[-1].strip()}
            if diag:
                details["diagnostics"] = _clean(diag)
            self.records.append(
                CheckRecord(name, self.anchor, "fail", None, float(tolerances.get(name, 0.0)),
                            1e3 * (now - self._t), details)
            )
            self._t = now


def _rel_sup(approx, exact, scale=None):
    approx, exact = np.asarray(approx), np.asarray(exact)
    scale = np.max(np.abs(exact)) if scale is None else scale
    return float(np.max(np.abs(approx - exact)) / scale)


class _Context:
    """Grid, operators and spectra shared by the check groups of one run."""

    def __init__(self, config):
        self.config = config
        self.grid = build_grid(config.nodes, config.map_scale)
        self._ops = {}
        self._spectra = {}

    def op(self, k):
        if k not in self._ops:
            self._ops[k] = assemble_mode_operator(k, self.grid)
        return self._ops[k]

    def spectra(self, ks):
        todo = [k for k in ks if k not in self._spectra]
        for k in todo:
            self.op(k)
        num = min(self.config.num_eigs, self.grid.n - 2)
        with ThreadPoolExecutor(max_workers=max(1, min(4, len(todo)))) as pool:
            for k, res in zip(todo, pool.map(lambda k: solve_spectrum(self._ops[k], num), todo)):
                self._spectra[k] = res
        return {k: self._spectra[k] for k in ks}

    def rng(self, tag):
        # one independent stream per group, unaffected by kmax filtering
        return np.random.default_rng([self.config.seed, tag])


# Each group: (declared names, anchor, tolerances, function).  Names depend on
# kmax, so groups are built per run.


def _group_newton(ctx, rec):
    g = ctx.grid
    t0 = time.perf_counter()
    phi = apply_mode_potential(0, g.sample(eval_omega_squared))
    exact = C_HARTREE * eval_omega(g.nodes)
    err = np.abs(phi.values - exact) / eval_omega(g.nodes)
    t_grid = time.perf_counter() - t0
    rec.add("newton_identity", err.max(), 1e-8, worst_radius=g.nodes[np.argmax(err)],
            value_first_node=phi.values[0])
    spots = {}
    for x, target in ((0.0, 24.0), (1.0, 6.0)):
        ts = time.perf_counter()
        val = oracle_potential_direct(eval_omega_squared, x)
        spots[x] = (val, target, time.perf_counter() - ts)
    val, target, _ = spots[0.0]
    rec.add("newton_oracle_origin", abs(val - target), 1e-6, oracle=val, expected=target)
    val, target, _ = spots[1.0]
    rec.add("newton_oracle_unit", abs(val - target), 1e-6, oracle=val, expected=target)
    total = t_grid + sum(s[2] for s in spots.values())
    rec.add("newton_runtime", float(total >= 1.0), 0.0, budget_s=1.0,
            runtime_ms={"grid_application": 1e3 * t_grid, "total": 1e3 * total})


def _group_pde(ctx, rec):
    r = ctx.grid.nodes
    rhs = C_HARTREE * eval_omega_squared(r)
    err = np.abs(radial_laplacian_omega_exact(r) - rhs) / rhs
    err_float = np.abs(radial_laplacian_omega(r) - rhs) / rhs
    rec.add("pde_identity", err.max(), 1e-12, worst_radius=r[np.argmax(err)],
            float_sum_max_error=err_float.max(), float_sum_max_error_r_le_100=err_float[r <= 100].max(),
            second_derivative_at_zero=eval_omega_second(0.0))


def _kernel_residual(k, grid):
    op = assemble_mode_operator(k, grid)
    f = grid.sample(eval_lambda_omega if k == 0 else eval_omega_prime)
    return weighted_norm(apply_mode_operator(op, f)) / weighted_norm(f)


def _convergence(k, map_scale):
    res = [_kernel_residual(k, build_grid(n, map_scale)) for n in CONVERGENCE_NODES]
    violations = sum(b >= a for a, b in zip(res, res[1:]))
    return res, violations


def _group_l0(ctx, rec):
    cfg, g = ctx.config, ctx.grid
    op = ctx.op(0)
    lw = g.sample(eval_lambda_omega)
    res = weighted_norm(apply_mode_operator(op, lw)) / weighted_norm(lw)
    rec.add("l0_kernel_residual", res, cfg.tol_residual, nodes=g.n)
    seq, bad = _convergence(0, g.map_scale)
    rec.add("l0_kernel_convergence", bad, 0.0, nodes=list(CONVERGENCE_NODES), residuals=seq)
    w = g.sample(eval_omega)
    l0w = apply_mode_operator(op, w).values
    exact = -2.0 * C_HARTREE * eval_omega_squared(g.nodes)
    pointwise = np.abs(l0w - exact) / np.abs(exact)
    rec.add("l0_omega_identity", _rel_sup(l0w, exact), 1e-7,
            pointwise_relative_max=pointwise.max(), worst_radius=g.nodes[np.argmax(pointwise)])
    q = quadratic_form(op, w) / weighted_inner_product(w, w)
    # -4 pi^{3/2} c^3 int r^5 (1+r^2)^{-6} dr over c^2 int r^5 (1+r^2)^{-4} dr
    c = 12.0 * np.pi ** -1.5
    closed = -2.0 * C_HARTREE * c * (1.0 / 60.0) / (1.0 / 6.0)
    rec.add("l0_rayleigh_quotient", abs(q + 48.0) / 48.0, 1e-6, quotient=q, expected=-48.0,
            closed_form_quotient=closed)


def _localized_lowest(res, tail=0.05):
    idx = [i for i, loc in enumerate(res.localization) if loc <= tail]
    return idx[0] if idx else None


def _group_l1(ctx, rec):
    cfg, g = ctx.config, ctx.grid
    op = ctx.op(1)
    wp = g.sample(eval_omega_prime)
    res = weighted_norm(apply_mode_operator(op, wp)) / weighted_norm(wp)
    rec.add("l1_kernel_residual", res, cfg.tol_residual, nodes=g.n)
    sres = ctx.spectra([1])[1]
    i = _localized_lowest(sres)
    if i is None:
        rec.add("l1_zero_mode_eigenvalue", None, 1e-6, reason="no localized eigenpair")
        rec.add("l1_zero_mode_cosine", None, 0.0, reason="no localized eigenpair")
    else:
        v = sres.eigenvectors[i]
        cos = abs(weighted_inner_product(v, wp)) / (weighted_norm(v) * weighted_norm(wp))
        rec.add("l1_zero_mode_eigenvalue", abs(sres.eigenvalues[i]), 1e-6,
                eigenvalue=sres.eigenvalues[i], index=i, localization=sres.localization[i])
        rec.add("l1_zero_mode_cosine", max(0.0, 0.999 - cos), 0.0, cosine=cos, bound=0.999)
    lam0 = sres.eigenvalues[0]
    rec.add("l1_no_negative", max(0.0, -lam0), 1e-6, smallest_eigenvalue=lam0)


def _group_modes(ctx, rec, ks):
    spectra = ctx.spectra(ks)
    for k in ks:
        sres = spectra[k]
        lam0 = sres.eigenvalues[0]
        rec.add(f"mode_{k}_no_negative", max(0.0, -lam0), 1e-6, k=k, smallest_eigenvalue=lam0,
                max_residual=sres.residuals.max())
        cands = classify_kernel(sres, 1e-6, 0.05)
        rec.add(f"mode_{k}_no_kernel", len(cands), 0.0, k=k,
                candidates=[c.eigenvalue for c in cands])


def _group_monotonicity(ctx, rec, ks):
    g = ctx.grid
    rng = ctx.rng(6)
    gaps = {k: [] for k in ks}
    for _ in range(ctx.config.num_random):
        prof = random_positive_profile(rng)
        for gap in monotonicity_gaps(ks, g.sample(prof), prof):
            gaps[gap.k].append(gap)
    for k in ks:
        gk = gaps[k]
        nonpos = sum(not x.positive for x in gk)
        rec.add(f"monotonicity_{k}_positive", nonpos, 0.0, k=k,
                min_gap=min(x.direct for x in gk), samples=len(gk))
        rec.add(f"monotonicity_{k}_closed_form", max(x.relative_difference for x in gk), 1e-8,
                k=k, min_closed_form=min(x.closed_form for x in gk))


def _group_nonnegativity(ctx, rec, ks):
    g = ctx.grid
    rng = ctx.rng(7)
    for k in ks:
        op = ctx.op(k)
        qs = []
        for _ in range(ctx.config.num_random):
            if k == 0:
                f = random_orthogonal_radial(rng, g)
            else:
                f = g.sample(random_mode_profile(rng, k))
            qs.append(quadratic_form(op, f) / weighted_norm(f) ** 2)
        extra = {}
        if k == 0:
            extra["projection"] = "<f, omega^2> = 0"
        rec.add(f"nonnegativity_{k}", max(0.0, -min(qs)), 1e-6, k=k, min_normalized_form=min(qs),
                samples=len(qs), **extra)


def _random_pair(rng, rho_max=0.8):
    dx, dy = rng.standard_normal(6), rng.standard_normal(6)
    dx /= np.linalg.norm(dx)
    dy /= np.linalg.norm(dy)
    big = rng.uniform(0.5, 2.0)
    rho = rho_max * (1.0 - rng.random())
    if rng.random() < 0.5:
        return big * dx, rho * big * dy, rho
    return rho * big * dx, big * dy, rho


def _angular_average(nx, ny):
    """Average of |x - y|^{-4} over the direction of y, by 1D quadrature."""
    def g(th):
        return np.sin(th) ** 4 / (nx * nx - 2.0 * nx * ny * np.cos(th) + ny * ny) ** 2
    val = integrate.quad(g, 0.0, np.pi, epsabs=0.0, epsrel=1e-13, limit=200)[0]
    return AREA_S4 * val / VOL_S5


def _group_expansion(ctx, rec):
    rng = ctx.rng(8)
    errs, rhos = [], []
    for _ in range(ctx.config.num_pairs):
        x, y, rho = _random_pair(rng)
        res = expand_kernel(x, y, K=60, details=True)
        errs.append(res.relative_error)
        rhos.append(res.rho)
    errs, rhos = np.array(errs), np.array(rhos)
    ok = rhos[errs <= 1e-8]
    rec.add("expansion_series", errs.max(), 1e-8, K=60, rho_max=0.8, pairs=len(errs),
            worst_rho=rhos[np.argmax(errs)], largest_passing_rho=ok.max() if ok.size else None,
            failing_pairs=int(np.sum(errs > 1e-8)))
    monopole = {}
    e1 = np.eye(6)[0]
    for conv in ("resolved", "printed"):
        worst = 0.0
        for ny in (0.3, 0.5, 2.0):
            avg = _angular_average(1.0, ny)
            mono = expand_kernel(e1, ny * np.eye(6)[1], K=0, convention=conv)
            worst = max(worst, abs(mono - avg) / avg)
        monopole[conv] = worst
    rec.add("expansion_monopole_resolved", monopole["resolved"], 1e-10, coefficient="2/(k+2)")
    rejected = monopole["printed"] > 1e-10
    rec.add("expansion_monopole_printed_rejected", float(not rejected), 0.0,
            coefficient="k/(k+2)", printed_monopole_error=monopole["printed"])


def _group_addition(ctx, rec):
    mism = [k for k in range(13) if zonal_density_exact(k, 1) != alpha_k(k)]
    rec.add("addition_dimension", len(mism), 0.0, degrees="0..12", mismatches=mism,
            alpha=[alpha_k(k) for k in range(13)])


def _group_shooting(ctx, rec):
    t0 = time.perf_counter()
    traj = shoot_frak_L0(phi0=1.0, r_max=50.0, rtol=1e-10, atol=1e-12)
    rep = check_bounds(traj, tolerance=1e-6, identity_tolerance=1e-8)
    elapsed = time.perf_counter() - t0
    min_phi = float(np.min(traj.phi))
    rec.add("shooting_min_phi", max(0.0, 0.25 - min_phi), 0.0, min_phi=min_phi,
            radius_of_min=traj.r[np.argmin(traj.phi)])
    rec.add("shooting_bound_i", max(0.0, -rep.min_slack_i), 1e-6, min_slack=rep.min_slack_i)
    rec.add("shooting_bound_ii", max(0.0, -rep.min_slack_ii), 1e-6, min_slack=rep.min_slack_ii)
    rec.add("shooting_wronskian", rep.max_identity_residual, 1e-8, nfev=traj.nfev)
    rec.add("shooting_runtime", float(elapsed >= 5.0), 0.0, budget_s=5.0,
            runtime_ms={"integration": 1e3 * traj.runtime_s, "total": 1e3 * elapsed})


def _group_performance(ctx, rec):
    g = build_grid(512, ctx.config.map_scale)
    rng = ctx.rng(11)
    worst = 0.0
    for k in (0, 1, 3, 6):
        for _ in range(3):
            # omega f, the source the operators feed to the kernels
            prof = random_mode_profile(rng, k) if k else random_positive_profile(rng)
            f = RadialFunction(g, prof(g.nodes) * eval_omega(g.nodes))
            a = apply_mode_potential(k, f).values
            b = apply_mode_potential_dense(k, f).values
            worst = max(worst, float(np.max(np.abs(a - b)) / np.max(np.abs(b))))
    rec.add("prefix_dense_agreement", worst, 1e-13, nodes=512)
    f = g.sample(eval_omega_squared)
    apply_mode_potential(0, f)
    t = time.perf_counter()
    for _ in range(50):
        apply_mode_potential(0, f)
    t_prefix = time.perf_counter() - t
    t = time.perf_counter()
    for _ in range(50):
        apply_mode_potential_dense(0, f)
    t_dense = time.perf_counter() - t
    speedup = t_dense / t_prefix
    rec.add("prefix_speedup", float(speedup < 10.0), 0.0, nodes=512, applications=50,
            required_speedup=10.0,
            runtime_ms={"prefix": 1e3 * t_prefix, "dense": 1e3 * t_dense, "speedup": speedup})


_ANCHORS = {
    "newton": "Newton's theorem for omega^2 in R^6",
    "pde": "ground-state equation -Delta omega = 2 pi^{3/2} omega^2",
    "l0": "radial kernel of L_0 spanned by the scaling mode",
    "l1": "kernel of L_1 spanned by omega' and its lowest eigenvalue",
    "modes": "no kernel of L_k for k >= 2",
    "monotonicity": "monotonicity of the mode quadratic forms in k",
    "nonnegativity": "nonnegativity of L_k under orthogonality to omega^2",
    "expansion": "zonal expansion of |x - y|^{-4}",
    "addition": "addition formula and dimension of degree-k harmonics",
    "shooting": "sign and growth of the shooting solution without the rank-one part",
    "performance": "prefix-sum application of the mode kernels",
}


def _groups(kmax):
    g = []
    g.append(("newton", ["newton_identity", "newton_oracle_origin", "newton_oracle_unit",
                         "newton_runtime"], _group_newton))
    g.append(("pde", ["pde_identity"], _group_pde))
    g.append(("l0", ["l0_kernel_residual", "l0_kernel_convergence", "l0_omega_identity",
                     "l0_rayleigh_quotient"], _group_l0))
    if kmax >= 1:
        g.append(("l1", ["l1_kernel_residual", "l1_zero_mode_eigenvalue", "l1_zero_mode_cosine",
                         "l1_no_negative"], _group_l1))
    ks = list(range(2, kmax + 1))
    if ks:
        names = [n for k in ks for n in (f"mode_{k}_no_negative", f"mode_{k}_no_kernel")]
        g.append(("modes", names, lambda c, r, ks=ks: _group_modes(c, r, ks)))
    ks = list(range(1, kmax + 1))
    if ks:
        names = [n for k in ks for n in (f"monotonicity_{k}_positive", f"monotonicity_{k}_closed_form")]
        g.append(("monotonicity", names, lambda c, r, ks=ks: _group_monotonicity(c, r, ks)))
    ks = list(range(0, kmax + 1))
    g.append(("nonnegativity", [f"nonnegativity_{k}" for k in ks],
              lambda c, r, ks=ks: _group_nonnegativity(c, r, ks)))
    g.append(("expansion", ["expansion_series", "expansion_monopole_resolved",
                            "expansion_monopole_printed_rejected"], _group_expansion))
    g.append(("addition", ["addition_dimension"], _group_addition))
    g.append(("shooting", ["shooting_min_phi", "shooting_bound_i", "shooting_bound_ii",
                           "shooting_wronskian", "shooting_runtime"], _group_shooting))
    g.append(("performance", ["prefix_dense_agreement", "prefix_speedup"], _group_performance))
    return g


def run_verification_suite(config=None):
    """Run every check and collect a :class:`VerificationReport`.

    Numerical failures inside a check group are caught; the group's remaining
    checks are recorded as failed with the exception in ``details``.
    """
    config = VerifyConfig() if config is None else config
    if not isinstance(config, VerifyConfig):
        raise UsageError("config must be a VerifyConfig")
    ctx = _Context(config)
    records = []
    for key, names, fn in _groups(int(config.kmax)):
        rec = _Recorder(names, _ANCHORS[key])
        try:
            fn(ctx, rec)
        except Exception as exc:  # recorded, never propagated
            rec.fail_remaining(exc, {})
        missing = [n for n in names if n not in {r.name for r in rec.records}]
        if missing:
            rec.fail_remaining(RuntimeError(f"check not evaluated: {missing}"), {})
        records.extend(rec.records)
    return VerificationReport(__version__, ctx.grid.parameters(), int(config.seed),
                              _clean(asdict(config)), records)


def report_to_json(report):
    return json.dumps(report.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"


def report_to_csv(report):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for c in report.checks:
        writer.writerow([c.name, c.status, "" if c.value is None else repr(c.value),
                         repr(c.tolerance), f"{c.runtime_ms:.3f}"])
    return buf.getvalue()


def emit_report(report, fmt="json", path=None):
    """Serialize ``report`` as JSON or CSV, writing to ``path`` if given.

    Returns the serialized text.  Raises UsageError for an unknown format and
    OSError if the file cannot be written.
    """
    if fmt == "json":
        text = report_to_json(report)
    elif fmt == "csv":
        text = report_to_csv(report)
    else:
        raise UsageError(f"unknown report format {fmt!r}; use json or csv")
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
