"""Experiment runner: grid sweeps, run artifacts, pass/fail assertions.

A run takes a validated ``ExperimentConfig`` and produces three files in the
output directory:

  results.csv   raw per-cell measurements, row order fixed by the grid order
  summary.json  assertions with observed values and pass/fail, plus metrics
  manifest.json config echo, library versions, wall-clock timing

``results.csv`` and ``summary.json`` are deterministic functions of the
config and seed: identical inputs give byte-identical bodies, regardless of
the thread count (cells are independent and reassembled in grid order, and
every random draw is keyed by cell position, not execution order).  The
manifest carries timestamps and is the one artifact excluded from that
guarantee.

Cell-level computational failures (a quadrature that cannot converge, an
infeasible tube) are recorded in place: the row stays, numeric columns are
emptied, the status column carries the error, and the run continues.  Any
such failure forces exit code 3; failed assertions alone give 1.

``tolerance_scale`` loosens every assertion limit by the given factor; it
rescales allowed-error magnitudes (band widths, slope windows, residual
ceilings), never measured values.
"""

from __future__ import annotations

import csv
import json
import math
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import bounds, construct, hermite, mehler, phase, spectral, stationary
from .config import ExperimentConfig
from .normquad import Domain, local_lp_norm

_EPS = float(np.finfo(float).eps)

SATURATE_HEADER = ("kind", "n", "N", "lambda", "j", "delta", "nu", "r", "p",
                   "measured", "Lambda", "ratio", "status")


@dataclass
class Assertion:
    name: str
    observed: float
    limit: float
    op: str  # "<=" or ">="
    passed: bool


@dataclass
class _Ctx:
    params: dict
    seed: int
    threads: int
    scale: float
    assertions: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def check(self, name: str, observed: float, limit: float,
              op: str = "<=") -> None:
        ok = observed <= limit if op == "<=" else observed >= limit
        self.assertions.append(
            Assertion(name, float(observed), float(limit), op, bool(ok)))


@dataclass
class RunResult:
    exit_code: int
    out_dir: Path
    csv_path: Path
    summary_path: Path
    manifest_path: Path
    assertions: list
    summary: dict


def _map_cells(fn, cells, threads: int) -> list:
    if threads <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, cells))


def _cell_seed(base: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=base, spawn_key=tuple(key))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    x = float(v)
    if math.isnan(x):
        return "nan"
    if x == 0.0:
        return "0.0"
    return repr(x)


def _fmt_point(vals) -> str:
    return ";".join(repr(float(v)) for v in vals)


def _slope(xs, ys) -> float:
    return float(np.polyfit(np.log(np.asarray(xs, dtype=float)),
                            np.log(np.asarray(ys, dtype=float)), 1)[0])


# ------------------------------------------------------------------- eval

def _run_eval(ctx: _Ctx):
    p = ctx.params
    rows: list = []

    nodes, weights = np.polynomial.hermite.hermgauss(p["quad_points"])
    table = hermite.hermite_batch_grid(p["k_max_ortho"], nodes)
    # hermgauss weights absorb exp(-x^2); the pair h_j h_k carries its own
    gram = (table * (weights * np.exp(nodes * nodes))) @ table.T
    dev = np.abs(gram - np.eye(p["k_max_ortho"] + 1))
    for k in range(p["k_max_ortho"] + 1):
        rows.append(["orthonormality", k, float(dev[k].max()), "ok"])
    ctx.check("orthonormality-deviation", float(dev.max()),
              p["tol_ortho"] * ctx.scale)

    # Five-point second differences; the step balances the h^4 truncation
    # against roundoff growing like eps/h^2, which keeps the relative
    # residual a couple of decades under the tolerance up to k ~ 500.
    stencil = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    fd_w = np.array([-1.0, 16.0, -30.0, 16.0, -1.0])

    def eigen_cell(k: int):
        u = math.sqrt(2.0 * k + 1.0)
        h = (45.0 * _EPS) ** (1.0 / 6.0) / u
        xs = np.linspace(-0.75 * u, 0.75 * u, p["eigen_samples"])
        pts = (xs[:, None] + h * stencil).ravel()
        vals = hermite.hermite_batch([k], pts)[0].reshape(-1, 5)
        second = vals @ fd_w / (12.0 * h * h)
        residual = np.abs(-second + (xs * xs - 2.0 * k - 1.0) * vals[:, 2])
        envelope = hermite.AMP_OSCILLATORY * (u * u - xs * xs) ** -0.25
        return float(np.max(residual / ((2.0 * k + 1.0) * envelope)))

    ks = list(range(p["k_max_eigen"] + 1))
    residuals = _map_cells(eigen_cell, ks, ctx.threads)
    for k, res in zip(ks, residuals):
        rows.append(["eigen-equation", k, res, "ok"])
    ctx.check("eigen-equation-residual", max(residuals),
              p["tol_eigen"] * ctx.scale)
    ctx.metrics["orthonormality_max"] = float(dev.max())
    ctx.metrics["eigen_residual_max"] = max(residuals)
    return ("check", "k", "value", "status"), rows


# --------------------------------------------------------- kernel-compare

_REL_FLOOR = 1e-4  # reference size under which agreement is taken absolutely


def _run_kernel_compare(ctx: _Ctx):
    if ctx.params["mode"] == "bound-check":
        return _kernel_bound_mode(ctx)
    return _kernel_cross_mode(ctx)


def _kernel_cross_mode(ctx: _Ctx):
    p = ctx.params
    rng = np.random.default_rng(_cell_seed(ctx.seed))
    pairs = []
    while len(pairs) < p["pair_count"]:
        x, y = rng.uniform(-p["box_half_width"], p["box_half_width"], 2)
        if abs(x - y) >= p["min_separation"]:
            pairs.append((float(x), float(y)))

    def cell(args):
        r, sx, sy = args
        lam = math.sqrt(r)
        level = (r - 1) // 2
        direct = spectral.projection_kernel_sum(
            level, 1, np.array([sx * lam]), np.array([sy * lam]))
        kv = mehler.kernel_oscillatory([sx * lam], [sy * lam], r,
                                       tol=p["quad_tol"])
        rel = abs(kv.value - direct) / max(abs(direct), _REL_FLOOR)
        return [r, sx, sy, direct, kv.value, rel, kv.imag_residual,
                kv.evals, "ok"]

    cells = [(r, sx, sy) for r in p["r_values"] for sx, sy in pairs]
    rows, errors = _collect(ctx, cell, cells, width=9)
    oks = [row for row in rows if row[-1] == "ok"]
    if oks:
        ctx.check("cross-validation-relative-error",
                  max(row[5] for row in oks), p["tol_rel"] * ctx.scale)
        ctx.check("cross-validation-imag-residual",
                  max(row[6] for row in oks), p["tol_imag"] * ctx.scale)
    header = ("r", "x", "y", "spectral", "quadrature", "rel_error",
              "imag_residual", "evals", "status")
    return header, rows


def _kernel_bound_mode(ctx: _Ctx):
    p = ctx.params

    def cell(args):
        mu_idx, mu, r = args
        # one seed per mu, shared across r, so the trend in r is not
        # re-randomized at every radius
        seed = int(_cell_seed(ctx.seed, mu_idx).generate_state(1)[0])
        spec = mehler.KernelSampleSpec(mu=mu, count=p["sample_count"],
                                       seed=seed)
        rep = mehler.kernel_bound_check(p["n"], r, spec)
        return [p["n"], r, mu, rep.normalizer, rep.max_ratio,
                rep.median_ratio, rep.diagonal_ratio, rep.count, "ok"]

    cells = [(i, mu, r) for i, mu in enumerate(p["mu_values"])
             for r in p["r_values"]]
    rows, _ = _collect(ctx, cell, cells, width=9)
    oks = [row for row in rows if row[-1] == "ok"]
    if oks:
        ctx.check("bound-check-max-ratio", max(row[4] for row in oks),
                  p["ratio_limit"] * ctx.scale)
    for mu in p["mu_values"]:
        series = [(row[1], row[4]) for row in oks if row[2] == mu]
        if len(series) >= 2:
            slope = _slope([s[0] for s in series], [s[1] for s in series])
            ctx.check(f"bound-check-growth-slope-mu-{mu}", abs(slope),
                      p["slope_limit"] * ctx.scale)
            ctx.metrics[f"slope_mu_{mu}"] = slope
    header = ("n", "r", "mu", "normalizer", "max_ratio", "median_ratio",
              "diagonal_ratio", "count", "status")
    return header, rows


# ----------------------------------------------------------- sphase-check

def _run_sphase(ctx: _Ctx):
    p = ctx.params
    gamma, width = p["cubic_coefficient"], p["bump_half_width"]
    phase_series = np.zeros(31)
    phase_series[2], phase_series[3] = 0.5, gamma
    amp_series = stationary.smooth_bump_series(28, width)

    def phase_fn(t):
        return 0.5 * t * t + gamma * t ** 3

    def amp_fn(t):
        return stationary.smooth_bump(t, width)

    def reference(lam: float) -> complex:
        return stationary.oscillatory_quadrature(
            amp_fn, phase_fn, lam, -width, width,
            panels=max(300, int(3 * lam)), nodes=16)

    refs = _map_cells(reference, list(p["lambda_values"]), ctx.threads)
    rows = []
    margins = {1: p["slope_margin_m1"], 2: p["slope_margin_m2"]}
    for m in p["orders"]:
        exp_m = stationary.expand_from_series(phase_series, amp_series, m)
        errs = [abs(exp_m.evaluate(lam) - ref)
                for lam, ref in zip(p["lambda_values"], refs)]
        for lam, err in zip(p["lambda_values"], errs):
            rows.append(["remainder", m, lam, err, "ok"])
        slope = _slope(p["lambda_values"], errs)
        ctx.metrics[f"remainder_slope_m{m}"] = slope
        ctx.check(f"remainder-slope-m{m}", slope,
                  -(m - margins[m] * ctx.scale))

    # pure quadratic phase: the engine's one-term expansion and the closed
    # Fresnel formula must both land on sqrt(2 pi / lam) e^{i pi/4} exactly
    quad_series = np.zeros(4)
    quad_series[2] = 0.5
    exact_err = 0.0
    for lam in p["lambda_values"]:
        target = math.sqrt(2.0 * math.pi / lam) * complex(
            math.cos(math.pi / 4.0), math.sin(math.pi / 4.0))
        got = stationary.expand_from_series(quad_series, [1.0], 1).evaluate(lam)
        exact_err = max(exact_err, abs(got - target) / abs(target))
        for curv, amp0, ph0 in ((1.0, 1.0, 0.0), (2.5, 0.7, 0.3),
                                (-1.5, 1.3, -0.2)):
            lead = stationary.fresnel_leading(lam, ph0, curv, amp0)
            want = amp0 * math.sqrt(2.0 * math.pi / (lam * abs(curv))) * \
                np.exp(1j * (lam * ph0 + math.copysign(math.pi / 4.0, curv)))
            exact_err = max(exact_err, abs(lead - want) / abs(want))
        rows.append(["gaussian-exactness", 1, lam, exact_err, "ok"])
    ctx.check("gaussian-exactness", exact_err, p["gaussian_tol"] * ctx.scale)

    if p["consistency_r_values"]:
        sx, sy = p["consistency_point"]
        slope, residuals = mehler.stationary_consistency(
            np.array([sx]), np.array([sy]), p["consistency_r_values"])
        for r, res in zip(p["consistency_r_values"], residuals):
            rows.append(["kernel-consistency", 0, float(r), res, "ok"])
        ctx.metrics["kernel_consistency_slope"] = slope
        ctx.check("kernel-consistency-slope", slope,
                  p["consistency_slope_limit"] * ctx.scale)
    return ("check", "order", "lambda", "value", "status"), rows


# ------------------------------------------------------- phase-identities

def _interior_pair(rng, n: int, bound: float):
    """A coordinate pair whose window holds two clean interior roots."""
    while True:
        x = rng.uniform(-bound, bound, n)
        y = rng.uniform(-bound, bound, n)
        pts = phase.critical_points(x, y).interior()
        if len(pts) == 2 and all(p_.sin2t > 0.1 for p_ in pts):
            return x, y, pts


def _run_phase_identities(ctx: _Ctx):
    p = ctx.params
    dims = p["dims"]
    t_per_pair = 20
    pair_count = max(1, p["sample_count"] // (len(dims) * t_per_pair))
    rows = []

    for d_idx, n in enumerate(dims):
        rng = np.random.default_rng(_cell_seed(ctx.seed, d_idx))
        worst_fact = 0.0
        worst_curv = 0.0
        worst_closed = 0.0
        worst_fd = 0.0
        hess_done = 0
        for _ in range(pair_count):
            x, y, pts = _interior_pair(rng, n, p["coordinate_bound"])
            t1, t2 = pts[0].t, pts[1].t
            ts = rng.uniform(0.05, 1.45, t_per_pair)
            lhs = phase.phase_derivative(ts, x, y)
            rhs = (-(4.0 / np.sin(2.0 * ts) ** 2)
                   * np.sin(ts + t1) * np.sin(ts - t1)
                   * np.sin(ts + t2) * np.sin(ts - t2))
            worst_fact = max(worst_fact, float(
                np.max(np.abs(lhs - rhs) / (1.0 + np.abs(lhs)))))

            if hess_done >= p["hessian_samples"]:
                continue
            hess_done += 1
            for pt in pts:
                h = 1e-6
                fd_curv = (phase.phase_derivative(pt.t + h, x, y)
                           - phase.phase_derivative(pt.t - h, x, y)) / (2 * h)
                worst_curv = max(worst_curv,
                                 abs(fd_curv - pt.curvature)
                                 / abs(pt.curvature))
                target = np.sort(np.concatenate(
                    [[0.0], np.full(n - 1, -1.0 / pt.sin2t)]))
                closed = phase.mixed_hessian(x, y, pt)
                ev = np.sort(np.real(np.linalg.eigvals(closed)))
                worst_closed = max(worst_closed, float(
                    np.max(np.abs(ev - target))))
                fd_mat = _fd_mixed_hessian(x, y, pt.kind, n)
                ev_fd = np.sort(np.real(np.linalg.eigvals(fd_mat)))
                worst_fd = max(worst_fd, float(
                    np.max(np.abs(ev_fd - target)) /
                    max(1.0, 1.0 / pt.sin2t)))

        samples = pair_count * t_per_pair
        for check, worst, tol in (
                ("derivative-factorization", worst_fact,
                 p["tol_factorization"]),
                ("curvature-vs-fd", worst_curv, p["tol_curvature"]),
                ("mixed-hessian-closed", worst_closed, p["tol_mixed_closed"]),
                ("mixed-hessian-fd", worst_fd, p["tol_mixed_fd"])):
            rows.append([check, n, samples, worst, tol, "ok"])
            ctx.check(f"{check}-n{n}", worst, tol * ctx.scale)
    header = ("check", "n", "samples", "max_residual", "tolerance", "status")
    return header, rows


def _fd_mixed_hessian(x, y, kind: str, n: int) -> np.ndarray:
    def reduced(xv, yv):
        cps = phase.critical_points(xv, yv)
        pt = cps.plus if kind == "plus" else cps.minus
        return float(phase.phase_value(pt.t, xv, yv))

    h = 1e-5
    fd = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            xp, xm = x.copy(), x.copy()
            xp[i] += h
            xm[i] -= h
            yp, ym = y.copy(), y.copy()
            yp[j] += h
            ym[j] -= h
            fd[i, j] = (reduced(xp, yp) - reduced(xp, ym)
                        - reduced(xm, yp) + reduced(xm, ym)) / (4 * h * h)
    return fd


# ------------------------------------------------------------ bounds-table

def _run_bounds_table(ctx: _Ctx):
    p = ctx.params
    rows = []
    for n in p["n_values"]:
        for lam in p["lambda_values"]:
            for r in p["r_values"]:
                for pv in p["p_values"]:
                    for mu in p["mu_values"]:
                        b = bounds.lambda_lp_at_mu(n, lam, r, mu, pv)
                        rows.append(["at-mu", n, lam, r, mu,
                                     _fmt(pv), b.branch, b.log_value,
                                     b.value, "ok"])
                    if p["include_max_table"]:
                        b = bounds.max_local_bound(n, lam, r, pv)
                        rows.append(["max", n, lam, r, b.mu, _fmt(pv),
                                     b.branch, b.log_value, b.value, "ok"])
    _bounds_identities(ctx)
    header = ("table", "n", "lambda", "r", "mu", "p", "branch",
              "log_value", "value", "status")
    return header, rows


def _bounds_identities(ctx: _Ctx) -> None:
    p = ctx.params
    tol = p["tol_identity"] * ctx.scale
    kink_dev = 0.0
    for n in p["n_values"]:
        pc = bounds.sogge_kink(n)
        if math.isfinite(pc):
            lo = 0.5 * (n - 1) * (0.5 - 1.0 / pc)
            hi = 0.5 * (n - 1) - n / pc
            kink_dev = max(kink_dev, abs(lo - hi),
                           abs(bounds.sogge_exponent(n, pc)
                               - 0.5 * (n - 1) / (n + 1)))
        qc = bounds.rho_kink(n)
        v1 = -0.5 + 1.0 / qc
        v2 = (n - 2) / 6.0 - n / (3.0 * qc)
        kink_dev = max(kink_dev, abs(v1 - v2), abs(v1 + 1.0 / (n + 3)))
        sc = bounds.thangavelu_kink(n)
        if math.isfinite(sc):
            kink_dev = max(kink_dev, abs((n - 2) / 6.0 - n / (3.0 * sc)),
                           abs(0.5 * (n - 2) - n / sc))
    ctx.check("exponent-kink-continuity", kink_dev, tol)

    seam_dev = 0.0
    fixed_dev = 0.0
    for n in p["n_values"]:
        for lam in p["lambda_values"]:
            for frac in (0.15, 0.55, 0.95):
                mu = math.exp(frac * math.log(lam ** (-4.0 / 3.0)))
                s = lam * math.sqrt(mu)
                for pv in p["p_values"]:
                    ip = 0.0 if math.isinf(pv) else 1.0 / pv
                    r1 = 1.0 / s
                    point = (0.5 * (n - 2) * math.log(s)
                             + n * ip * math.log(r1))
                    if pv <= bounds.sogge_kink(n):
                        e = 0.25 * (n - 1) - 0.5 * (n + 1) * ip
                        tube = (e * (math.log(s) - math.log(r1))
                                + (ip - 0.5) * math.log(s))
                    else:
                        tube = (0.5 * (n - 2) - n * ip) * math.log(s)
                    got = bounds.lambda_lp_at_mu(n, lam, r1, mu, pv).log_value
                    seam_dev = max(
                        seam_dev,
                        abs(point - tube) / max(1.0, abs(point)),
                        abs(got - point) / max(1.0, abs(point)))
                    r2 = lam * mu
                    if pv < bounds.rho_kink(n) and r2 > r1:
                        e = 0.25 * (n - 1) - 0.5 * (n + 1) * ip
                        tube2 = (e * (math.log(s) - math.log(r2))
                                 + (ip - 0.5) * math.log(s))
                        ec = 0.25 * (n + 3) * ip - 0.125 * (n + 1)
                        cap = (ec * (math.log(r2) - math.log(lam))
                               + (ip - 0.5) * math.log(lam))
                        got2 = bounds.lambda_lp_at_mu(
                            n, lam, r2, mu, pv).log_value
                        seam_dev = max(
                            seam_dev,
                            abs(tube2 - cap) / max(1.0, abs(cap)),
                            abs(got2 - cap) / max(1.0, abs(cap)))
            for pv in p["p_values"]:
                want = (bounds.sogge_exponent(n, pv) - 0.5) * math.log(lam)
                got = bounds.lambda_lp(n, lam, 1.0, 0.0, pv).log_value
                fixed_dev = max(fixed_dev,
                                abs(got - want) / max(1.0, abs(want)))
    ctx.check("envelope-seam-identities", seam_dev, tol)
    ctx.check("fixed-ball-rate-identity", fixed_dev, tol)

    lam = max(max(p["lambda_values"]), 100.0)
    mus = (0.2, 0.35, 0.6, 0.9)
    slope_dev = 0.0
    for n in p["n_values"]:
        vals = [bounds.lambda_lp_at_mu(n, lam, 1.0, m, 2.0) for m in mus]
        for a, b, ma, mb in zip(vals, vals[1:], mus, mus[1:]):
            slope = (b.log_value - a.log_value) / (math.log(mb)
                                                   - math.log(ma))
            slope_dev = max(slope_dev, abs(slope + 0.25))
    ctx.check("quarter-power-mu-slope", slope_dev, p["tol_slope"] * ctx.scale)


# -------------------------------------------------------------- construct

def _construct_delta(rule: dict, n: int, level: int, j: int) -> float:
    if rule["type"] == "fixed":
        return rule["value"]
    lam = math.sqrt(2 * level + n)
    mu = 0.75 if j == 0 else 2.0 ** (-2 * j)
    return (lam * math.sqrt(mu) / rule["r"]) ** -0.5


def _run_construct(ctx: _Ctx):
    p = ctx.params

    def cell(level: int):
        delta = _construct_delta(p["delta"], p["n"], level, p["j"])
        rep = construct.build_concentrated(p["n"], level, p["j"], delta,
                                           m_bins=p["m_bins"])
        tube = rep.tube
        amp_ratio = rep.measured_median_amplitude / rep.target_amplitude
        return [p["n"], level, tube.lam, p["j"], delta,
                len(rep.eigenfunction.indices), rep.bin_index,
                rep.bin_fraction, rep.target_amplitude,
                rep.measured_median_amplitude, amp_ratio, "ok"]

    rows, _ = _collect(ctx, cell, list(p["levels"]), width=12)
    oks = [row for row in rows if row[-1] == "ok"]
    if oks:
        ctx.check("bin-fraction-pigeonhole", min(row[7] for row in oks),
                  1.0 / p["m_bins"], op=">=")
        ratios = [row[10] for row in oks]
        ctx.check("amplitude-ratio-low", min(ratios),
                  p["amp_ratio_min"] / ctx.scale, op=">=")
        ctx.check("amplitude-ratio-high", max(ratios),
                  p["amp_ratio_max"] * ctx.scale)
    header = ("n", "N", "lambda", "j", "delta", "set_size", "bin_index",
              "bin_fraction", "target", "measured", "amp_ratio", "status")
    return header, rows


# --------------------------------------------------------------- saturate

def _tube_case_row(kind: str, n: int, level: int, j: int, delta: float,
                   nu: tuple, r: float, p_norm: float):
    lam = math.sqrt(2 * level + n)
    rep = construct.build_concentrated(n, level, j, delta)
    ratio = construct.saturation_ratio(rep, nu, r, p_norm)
    bound = bounds.lambda_lp(n, lam, r, math.hypot(*nu), p_norm)
    return [kind, n, level, lam, j, delta, _fmt_point(nu), r, p_norm,
            ratio * bound.value, bound.value, ratio, "ok"]


def _random_level_rows(ctx: _Ctx, case_idx: int, case: dict, level: int):
    lam = math.sqrt(2 * level + 2)
    j, r, p_norm = case["j"], case["r"], case["p"]
    delta = _construct_delta({"type": "case2", "r": r}, 2, level, j)
    tube = construct.TubeSpec.from_level(2, level, j, delta)
    nu = (tube.x1_star, 0.0)
    grid, feature = construct._ball_quadrature(lam, r, tube.half_width)
    dom = Domain(shape="ball", center=nu, scale=r, quad=grid)
    bound = bounds.lambda_lp(2, lam, r, math.hypot(*nu), p_norm)
    rows = []
    for i in range(case["per_level"]):
        rng = np.random.default_rng(_cell_seed(ctx.seed, case_idx, level, i))
        coeffs = rng.standard_normal(level + 1)
        coeffs /= np.linalg.norm(coeffs)
        e = spectral.DenseEigenfunction2D(level, coeffs)
        measured = local_lp_norm(lambda pts: np.abs(e(pts)), dom, p_norm,
                                 osc_scale=lam, feature_scale=feature,
                                 with_error=False)
        rows.append([f"random-{i}", 2, level, lam, j, delta, _fmt_point(nu),
                     r, p_norm, measured.value, bound.value,
                     measured.value / bound.value, "ok"])
    return rows


def _run_saturate(ctx: _Ctx):
    p = ctx.params
    cells = []
    for case_idx, case in enumerate(p["cases"]):
        for level in case["levels"]:
            cells.append((case_idx, case, level))

    def cell(args):
        case_idx, case, level = args
        if case["kind"] == "case2":
            n, j, r = case["n"], case["j"], case["r"]
            delta = _construct_delta({"type": "case2", "r": r}, n, level, j)
            tube = construct.TubeSpec.from_level(n, level, j, delta)
            nu = (tube.x1_star,) + (0.0,) * (n - 1)
            return [_tube_case_row("case2", n, level, j, delta, nu, r,
                                   case["p"])]
        if case["kind"] == "case3":
            k = case["k"]
            lam = math.sqrt(2 * level + 1)
            r = lam * 2.0 ** (-2 * k)
            return [_tube_case_row("case3", 1, level, k, 2.0 ** (-0.5 * k),
                                   (lam - r,), r, case["p"])]
        return _random_level_rows(ctx, case_idx, case, level)

    per_cell, errors = _collect_nested(ctx, cell, cells)
    rows = [row for chunk in per_cell for row in chunk]

    sweep_ratios = []
    for case_idx, case in enumerate(p["cases"]):
        if case["kind"] == "random":
            continue
        series = [(row[3], row[11]) for chunk, (ci, _, _) in
                  zip(per_cell, cells) for row in chunk
                  if ci == case_idx and row[-1] == "ok"]
        if not series:
            continue
        ratios = [s[1] for s in series]
        sweep_ratios.extend(ratios)
        tag = f"{case['kind']}-{case_idx}"
        ctx.check(f"band-ratio-{tag}", max(ratios) / min(ratios),
                  p["band_limit"] * ctx.scale)
        if len(series) >= 2:
            slope = _slope([s[0] for s in series], ratios)
            ctx.metrics[f"slope_{tag}"] = slope
            ctx.check(f"trend-slope-{tag}", abs(slope),
                      p["slope_limit"] * ctx.scale)

    all_ratios = [row[11] for row in rows if row[-1] == "ok"]
    if all_ratios:
        ctx.metrics["c_upper"] = p["upper_bound"]
        ctx.metrics["max_ratio"] = max(all_ratios)
        ctx.check("upper-bound", max(all_ratios),
                  p["upper_bound"] * ctx.scale)
    if sweep_ratios and all_ratios:
        med = float(np.median(sweep_ratios))
        ctx.metrics["sweep_median"] = med
        ctx.check("median-factor", max(all_ratios),
                  p["median_factor"] * med * ctx.scale)
    return SATURATE_HEADER, rows


# ------------------------------------------------------- failure handling

def _collect(ctx: _Ctx, cell_fn, cells, width: int):
    """Run cells, turning per-cell exceptions into error rows."""

    def guarded(args):
        try:
            return cell_fn(args), None
        except Exception as exc:  # recorded, run continues
            return None, f"{type(exc).__name__}: {exc}"

    out = _map_cells(guarded, cells, ctx.threads)
    rows = []
    errors = []
    for args, (row, err) in zip(cells, out):
        if err is None:
            rows.append(row)
        else:
            errors.append({"cell": str(args), "error": err})
            rows.append([""] * (width - 1) + [f"error: {err}"])
    ctx.failures.extend(errors)
    return rows, errors


def _collect_nested(ctx: _Ctx, cell_fn, cells):
    def guarded(args):
        try:
            return cell_fn(args), None
        except Exception as exc:
            return None, f"{type(exc).__name__}: {exc}"

    out = _map_cells(guarded, cells, ctx.threads)
    chunks = []
    errors = []
    for args, (chunk, err) in zip(cells, out):
        if err is None:
            chunks.append(chunk)
        else:
            errors.append({"cell": str(args[::2]), "error": err})
            chunks.append([[""] * (len(SATURATE_HEADER) - 1)
                           + [f"error: {err}"]])
    ctx.failures.extend(errors)
    return chunks, errors


_RUNNERS = {
    "eval": _run_eval,
    "kernel-compare": _run_kernel_compare,
    "sphase-check": _run_sphase,
    "phase-identities": _run_phase_identities,
    "bounds-table": _run_bounds_table,
    "construct": _run_construct,
    "saturate": _run_saturate,
}


# ------------------------------------------------------------- entry point

def _package_version() -> str:
    try:
        from importlib.metadata import version
        return version("hermlp")
    except Exception:
        return "unknown"


def run(config: ExperimentConfig, out_dir=None, *, threads: int | None = None,
        seed: int | None = None,
        tolerance_scale: float | None = None) -> RunResult:
    """Execute one experiment and write its artifacts.

    Keyword overrides take precedence over the config's own values.  Returns
    a RunResult whose exit_code is 0 (all assertions passed), 1 (an
    assertion failed), or 3 (a cell-level computational failure occurred).
    """
    started = time.time()
    stamp = datetime.now(timezone.utc).isoformat()
    ctx = _Ctx(
        params=config.parameters,
        seed=config.seed if seed is None else seed,
        threads=config.threads if threads is None else threads,
        scale=(config.tolerance_scale if tolerance_scale is None
               else tolerance_scale),
    )
    header, rows = _RUNNERS[config.experiment](ctx)

    out = Path(out_dir if out_dir is not None
               else (config.out or f"runs/{config.experiment}"))
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "results.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])

    passed = all(a.passed for a in ctx.assertions)
    exit_code = 3 if ctx.failures else (0 if passed else 1)
    summary = {
        "experiment": config.experiment,
        "seed": ctx.seed,
        "tolerance_scale": ctx.scale,
        "row_count": len(rows),
        "assertions": [vars(a) for a in ctx.assertions],
        "metrics": ctx.metrics,
        "computational_failures": ctx.failures,
        "passed": passed and not ctx.failures,
        "exit_code": exit_code,
    }
    summary_path = out / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True)
                            + "\n", encoding="utf-8")

    manifest = {
        "experiment": config.experiment,
        "config": config.echo(),
        "effective": {"seed": ctx.seed, "threads": ctx.threads,
                      "tolerance_scale": ctx.scale},
        "versions": {"python": platform.python_version(),
                     "numpy": np.__version__,
                     "hermlp": _package_version()},
        "timing": {"started_utc": stamp,
                   "duration_seconds": time.time() - started},
        "artifacts": {"results": "results.csv", "summary": "summary.json"},
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True)
                             + "\n", encoding="utf-8")
    return RunResult(exit_code=exit_code, out_dir=out, csv_path=csv_path,
                     summary_path=summary_path, manifest_path=manifest_path,
                     assertions=ctx.assertions, summary=summary)


# -------------------------------------------------------------- plot data

PLOT_KINDS = ("hermite-profile", "rho-sigma", "bound-vs-r", "bound-vs-mu",
              "saturate-ratios")


def emit_plot_data(kind: str, *, run_dir=None, params: dict | None = None,
                   out_path=None):
    """Tidy plot-ready CSV data for one figure kind.

    Generator kinds (profiles, exponent curves, envelope slices) compute
    fresh from ``params``; ``saturate-ratios`` reprocesses a completed
    saturate run found in ``run_dir``.  Returns (header, rows) and writes
    them to ``out_path`` when given.
    """
    params = dict(params or {})
    if kind == "hermite-profile":
        k = int(params.pop("k", 100))
        lo = float(params.pop("x_min", -16.0))
        hi = float(params.pop("x_max", 16.0))
        m = int(params.pop("points", 1601))
        _no_extra(params)
        if k < 0 or m < 2 or hi <= lo:
            raise ValueError("need k >= 0, points >= 2 and x_max > x_min")
        xs = np.linspace(lo, hi, m)
        vals = hermite.hermite_batch([k], xs)[0]
        approx, envelope, regime = hermite.szego_eval(k, xs)
        header = ("x", "value", "szego", "envelope", "regime")
        rows = [[float(x), float(v), float(a), float(e),
                 hermite.Regime(g).name.lower()]
                for x, v, a, e, g in zip(xs, vals, approx, envelope, regime)]
    elif kind == "rho-sigma":
        n = int(params.pop("n", 2))
        p_max = float(params.pop("p_max", 20.0))
        m = int(params.pop("points", 181))
        _no_extra(params)
        if n < 2 or p_max <= 2.0 or m < 2:
            raise ValueError("need n >= 2, p_max > 2 and points >= 2")
        kinks = [("sogge-kink", bounds.sogge_kink(n)),
                 ("rho-kink", bounds.rho_kink(n)),
                 ("thangavelu-kink", bounds.thangavelu_kink(n))]
        pts = [(float(p), "") for p in np.linspace(2.0, p_max, m)]
        pts += [(pk, tag) for tag, pk in kinks if pk <= p_max]
        pts.sort()
        header = ("p", "sigma", "rho", "marker")
        rows = [[p, bounds.sogge_exponent(n, p),
                 bounds.global_lp_exponent(n, p), tag] for p, tag in pts]
    elif kind == "bound-vs-r":
        n = int(params.pop("n", 2))
        lam = float(params.pop("lambda", 1000.0))
        pv = math.inf if params.get("p") == "inf" else float(
            params.pop("p", 2.0))
        params.pop("p", None)
        mu = params.pop("mu", None)
        nu_abs = float(params.pop("nu_abs", 0.0))
        m = int(params.pop("points", 121))
        _no_extra(params)
        rs = np.geomspace(lam ** (-4.0 / 3.0), lam, m)
        header = ("r", "mu", "branch", "log_value", "value")
        rows = []
        for r in rs:
            b = (bounds.lambda_lp_at_mu(n, lam, float(r), float(mu), pv)
                 if mu is not None
                 else bounds.lambda_lp(n, lam, float(r), nu_abs, pv))
            rows.append([float(r), b.mu, b.branch, b.log_value, b.value])
    elif kind == "bound-vs-mu":
        n = int(params.pop("n", 2))
        lam = float(params.pop("lambda", 1000.0))
        r = float(params.pop("r", 1.0))
        pv = math.inf if params.get("p") == "inf" else float(
            params.pop("p", 2.0))
        params.pop("p", None)
        m = int(params.pop("points", 121))
        _no_extra(params)
        mus = np.geomspace(lam ** (-4.0 / 3.0), 1.0, m)
        header = ("mu", "branch", "log_value", "value")
        rows = [[float(mu), b.branch, b.log_value, b.value]
                for mu in mus
                for b in [bounds.lambda_lp_at_mu(n, lam, r, float(mu), pv)]]
    elif kind == "saturate-ratios":
        _no_extra(params)
        if run_dir is None:
            raise ValueError("saturate-ratios needs a completed run "
                             "directory (--run)")
        src = Path(run_dir) / "results.csv"
        if not src.is_file():
            raise ValueError(f"no completed run at {run_dir}")
        with open(src, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            head = tuple(next(reader, ()))
            if head != SATURATE_HEADER:
                raise ValueError(f"{src} is not a saturate run")
            header = ("kind", "n", "lambda", "r", "p", "ratio")
            rows = [[rec[0], rec[1], rec[3], rec[7], rec[8], rec[11]]
                    for rec in reader if rec[-1] == "ok"]
    else:
        raise ValueError(f"unknown plot kind {kind!r}; expected one of "
                         + ", ".join(PLOT_KINDS))

    if out_path is not None:
        out_path = Path(out_path)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
    return header, rows


def _no_extra(params: dict) -> None:
    if params:
        raise ValueError("unknown plot parameters: "
                         + ", ".join(sorted(params)))
