"""Monte Carlo studies: moments, driver stability, scheme agreement,
convergence against closed forms and norm profiles.

Every study runs replicas in fixed chunks (so records never depend on the
degree of parallelism), stores one row per replica and measurement, and
derives its summary and verdicts from those rows alone. :func:`summarize`
is that pure stage; :func:`recompute` replays it from saved CSVs.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial
from pathlib import Path
from typing import Any, Callable

import numpy as np
from scipy.stats import spearmanr

from .. import __version__
from ..coefficients import build_coefficients, geometric_exact
from ..grid import SamplePath, TimeGrid, read_meta, write_meta
from ..norms import alpha_norm, solution_norm
from ..paths import (
    FbmParams,
    InitialSegment,
    generate_fbm,
    generate_wiener,
    smooth_driver,
    stop_driver,
    stopping_time_tau_N,
    substream,
)
from ..solver import LinearDelayODE, method_of_steps_oracle, solve_paths, solve_smoothed_paths, sup_distance
from .config import ConfigError, ProblemSpec, StudyConfig, config_from_json

logger = logging.getLogger(__name__)

CHUNK = 50
W_STREAM, Z_STREAM = 0, 1


@dataclass
class StudyResult:
    study: str
    records: list[dict[str, Any]]
    summary: list[dict[str, Any]]
    verdicts: dict[str, bool]
    details: dict[str, str] = field(default_factory=dict)
    config: StudyConfig | None = None
    tables: dict[str, list[dict[str, Any]]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def verdict_lines(self) -> list[str]:
        lines = [f"{name}: {'PASS' if ok else 'FAIL'}  {self.details.get(name, '')}".rstrip()
                 for name, ok in self.verdicts.items()]
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return lines

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_rows(out / "records.csv", self.records)
        write_rows(out / "summary.csv", self.summary)
        for name, rows in self.tables.items():
            write_rows(out / f"{name}.csv", rows)
        (out / "verdict.txt").write_text("\n".join(self.verdict_lines()) + "\n", encoding="utf-8")
        meta = {"study": self.study, "version": __version__}
        if self.config is not None:
            meta.update(self.config.flat())
            meta["config_json"] = json.dumps(asdict(self.config), sort_keys=True)
        write_meta(out / "meta.txt", meta)
        return out


# ---------------------------------------------------------------- csv helpers


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_rows(path, rows: list[dict[str, Any]]) -> None:
    cols: list[str] = []
    for row in rows:
        cols.extend(k for k in row if k not in cols)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for row in rows:
            writer.writerow([_fmt(row[c]) if c in row else "" for c in cols])


def _parse(s: str):
    if s in ("True", "False"):
        return s == "True"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_rows(path) -> list[dict[str, Any]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [{k: _parse(v) for k, v in row.items() if v != ""} for row in csv.DictReader(fh)]


# ---------------------------------------------------------------- shared pieces


def _chunks(n: int) -> list[range]:
    return [range(s, min(s + CHUNK, n)) for s in range(0, n, CHUNK)]


def _run_chunks(fn: Callable, config: StudyConfig) -> list[dict]:
    chunks = _chunks(config.replicas)
    work = partial(fn, config)
    if config.jobs > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    return [rec for part in parts for rec in part]


def _grid(spec: ProblemSpec, n_steps: int | None = None) -> TimeGrid:
    return TimeGrid(0.0, spec.T, spec.n_steps if n_steps is None else n_steps)


def _initial(spec: ProblemSpec) -> InitialSegment:
    return InitialSegment.constant(spec.x0, spec.r, spec.n_hist, spec.theta)


def _coefficients(spec: ProblemSpec):
    try:
        return build_coefficients(spec.coefficients, **spec.params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {spec.coefficients!r}: {exc}") from None


def _drivers(spec: ProblemSpec, seed: int, reps, grid: TimeGrid) -> tuple[np.ndarray, np.ndarray]:
    """Wiener and fBm values ``(len(reps), n+1, 1)``, one substream per (replica, driver)."""
    W = np.stack([generate_wiener(grid, 1, substream(seed, k, W_STREAM)).values for k in reps])
    Z = np.stack([generate_fbm(grid, FbmParams(spec.H, 1, substream(seed, k, Z_STREAM))).values for k in reps])
    return W, Z


def _path(grid: TimeGrid, values) -> SamplePath:
    return SamplePath(grid, values)


def _full_grid(spec: ProblemSpec) -> TimeGrid:
    return TimeGrid(-spec.r, spec.T, spec.n_hist + spec.n_steps)


def _check_problem(spec: ProblemSpec):
    if not 0.5 < spec.H < 1.0:
        raise ConfigError(f"H must lie in (1/2, 1), got {spec.H}")
    if not 1.0 - spec.gamma_eff < spec.alpha < min(spec.theta, 0.5):
        raise ConfigError(
            f"alpha={spec.alpha} outside (1 - gamma, min(theta, 1/2)) = ({1 - spec.gamma_eff}, {min(spec.theta, 0.5)})"
        )
    spec.n_hist


def _moments(values: np.ndarray, p: float) -> tuple[float, float]:
    x = values**p
    m = float(x.mean())
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else math.inf
    return m, se


def _strictly_decreasing(xs) -> bool:
    return all(b < a for a, b in zip(xs, xs[1:]))


def _by(records, key):
    out: dict = {}
    for rec in records:
        out.setdefault(rec[key], []).append(rec)
    return out


# ---------------------------------------------------------------- moments


def _moment_chunk(config: StudyConfig, reps) -> list[dict]:
    spec = config.problem
    grid = _grid(spec)
    co = _coefficients(spec)
    W, Z = _drivers(spec, config.seed, reps, grid)
    X = solve_paths(co, _initial(spec), grid, W, Z)
    full = _full_grid(spec)
    out = []
    for i, k in enumerate(reps):
        rep = solution_norm(_path(full, X[i]), spec.T, spec.alpha)
        out.append({
            "replica": k,
            "norm_T": rep.total,
            "sup_T": rep.sup_norm,
            "one_T": rep.one_norm,
            "z_alpha_norm": alpha_norm(_path(grid, Z[i]), spec.alpha),
        })
    return out


def _summarize_moments(records, config: StudyConfig):
    tol = config.tolerances
    recs = sorted(records, key=lambda r: r["replica"])
    norm = np.array([r["norm_T"] for r in recs])
    zn = np.array([r["z_alpha_norm"] for r in recs])
    M = len(recs)
    sizes = sorted({max(M // 4, 2), max(M // 2, 2), M})
    summary, verdicts, details = [], {}, {}
    finite = bool(np.all(np.isfinite(norm)))
    verdicts["no_blowup"] = finite
    details["no_blowup"] = f"max norm {float(norm.max())!r}"
    for p in config.p:
        est = {}
        for m in sizes:
            mean, se = _moments(norm[:m], p)
            est[m] = (mean, se)
            summary.append({"quantity": "moment", "p": p, "M": m, "N": "all", "mean": mean, "se": se})
        m_half = max(M // 2, 2)
        (a, sa), (b, sb) = est[m_half], est[M]
        pooled = math.sqrt(sa**2 + sb**2)
        key = f"stable_in_M[p={p:g}]"
        verdicts[key] = abs(a - b) <= tol["n_se"] * pooled
        details[key] = f"|E_M/2 - E_M| = {abs(a - b):.4g} vs {tol['n_se']:g} pooled SE = {tol['n_se'] * pooled:.4g}"
        restricted = []
        for N in config.N:
            mask = zn <= N
            x = np.where(mask, norm**p, 0.0)
            mean = float(x.mean())
            se = float(x.std(ddof=1) / math.sqrt(M)) if M > 1 else math.inf
            restricted.append(mean)
            summary.append({"quantity": "restricted_moment", "p": p, "M": M, "N": N, "mean": mean, "se": se,
                            "fraction_in_A": float(mask.mean())})
        key = f"monotone_in_N[p={p:g}]"
        verdicts[key] = all(b >= a for a, b in zip(restricted, restricted[1:]))
        details[key] = "restricted moments " + ", ".join(f"{v:.4g}" for v in restricted)
    return summary, verdicts, details


def run_moment_study(config: StudyConfig) -> StudyResult:
    """Moments of ``||X||_T``, unrestricted and on ``{||Z||_alpha <= N}``.

    Finiteness is probed as stability of the estimates between ``M/2`` and
    ``M`` replicas plus the absence of blow-ups.
    """
    _check_problem(config.problem)
    records = _run_chunks(_moment_chunk, config)
    return _result("moments", records, config)


# ---------------------------------------------------------------- stability


def _usable_rungs(config: StudyConfig, grid: TimeGrid) -> list[int]:
    rungs = []
    for n in config.ladder:
        if 1.0 / n < grid.dt * (1 - 1e-9):
            warnings.warn(f"skipping rung n={n}: window 1/n below dt={grid.dt}", RuntimeWarning, stacklevel=3)
            continue
        rungs.append(n)
    return rungs


def _stability_chunk(config: StudyConfig, reps) -> list[dict]:
    spec = config.problem
    grid = _grid(spec)
    full = _full_grid(spec)
    co = _coefficients(spec)
    eta = _initial(spec)
    W, Z = _drivers(spec, config.seed, reps, grid)
    X = solve_paths(co, eta, grid, W, Z)
    out = []
    for n in _usable_rungs(config, grid):
        Zn = np.stack([smooth_driver(_path(grid, Z[i]), n).values for i in range(len(reps))])
        Xn = solve_paths(co, eta, grid, W, Zn)
        for i, k in enumerate(reps):
            diff = _path(full, X[i] - Xn[i])
            rep = solution_norm(diff, spec.T, spec.alpha)
            out.append({
                "replica": k,
                "n": n,
                "z_dist": alpha_norm(_path(grid, Z[i] - Zn[i]), spec.alpha),
                "x_dist": rep.total,
                "x_sup": rep.sup_norm,
            })
    return out


def _summarize_stability(records, config: StudyConfig):
    tol = config.tolerances
    groups = _by(records, "n")
    rungs = sorted(groups)
    summary, zmed, xmed, rhos = [], [], [], []
    for n in rungs:
        rows = sorted(groups[n], key=lambda r: r["replica"])
        z = np.array([r["z_dist"] for r in rows])
        x = np.array([r["x_dist"] for r in rows])
        s = np.array([r["x_sup"] for r in rows])
        if len(rows) > 2 and np.ptp(z) > 0 and np.ptp(x) > 0:
            rho = float(spearmanr(z, x).statistic)
        else:
            rho = math.nan
        zmed.append(float(np.median(z)))
        xmed.append(float(np.median(x)))
        rhos.append(rho)
        summary.append({"n": n, "replicas": len(rows), "median_z_dist": zmed[-1], "median_x_dist": xmed[-1],
                        "median_x_sup": float(np.median(s)), "q90_x_dist": float(np.quantile(x, 0.9)),
                        "spearman": rho})
    # rank correlation over every recorded (replica, rung) pair; per-rung values are reported only
    z_all = np.array([r["z_dist"] for r in records])
    x_all = np.array([r["x_dist"] for r in records])
    pooled = math.nan
    if len(records) > 2 and np.ptp(z_all) > 0 and np.ptp(x_all) > 0:
        pooled = float(spearmanr(z_all, x_all).statistic)
    summary.append({"n": "pooled", "replicas": len(records), "spearman": pooled})
    verdicts = {
        "z_medians_decreasing": _strictly_decreasing(zmed),
        "x_medians_decreasing": _strictly_decreasing(xmed),
        "top_rung_below_eps": bool(xmed) and xmed[-1] < tol["stability_eps"],
        "spearman_above_min": pooled > tol["spearman_min"],
    }
    details = {
        "z_medians_decreasing": ", ".join(f"{v:.4g}" for v in zmed),
        "x_medians_decreasing": ", ".join(f"{v:.4g}" for v in xmed),
        "top_rung_below_eps": f"{xmed[-1] if xmed else math.nan:.4g} < {tol['stability_eps']:g}",
        "spearman_above_min": f"pooled {pooled:.3f}; per rung " + ", ".join(f"{v:.3f}" for v in rhos),
    }
    return summary, verdicts, details


def run_stability_study(config: StudyConfig) -> StudyResult:
    """Distance of solutions driven by ``Z`` and by its mollifications ``Z^n``."""
    _check_problem(config.problem)
    records = _run_chunks(_stability_chunk, config)
    return _result("stability", records, config)


# ---------------------------------------------------------------- uniqueness


def _uniqueness_chunk(config: StudyConfig, reps) -> list[dict]:
    out = []
    co = _coefficients(config.problem)
    N = config.N[-1]
    for level, (n_steps, n) in enumerate(config.levels):
        spec = config.problem.at_steps(n_steps)
        grid = _grid(spec)
        eta = _initial(spec)
        W, Z = _drivers(spec, config.seed, reps, grid)
        X = solve_paths(co, eta, grid, W, Z)
        Zs = []
        for i in range(len(reps)):
            zi = _path(grid, Z[i])
            zi = stop_driver(zi, stopping_time_tau_N(zi, spec.alpha, N))
            Zs.append(smooth_driver(zi, n).values)
        Y = solve_smoothed_paths(co, eta, grid, W, np.stack(Zs))
        dist = sup_distance(X, Y)
        for i, k in enumerate(reps):
            out.append({"replica": k, "level": level, "n_steps": n_steps, "n": n, "sup_dist": float(dist[i])})
    return out


def _summarize_uniqueness(records, config: StudyConfig):
    tol = config.tolerances
    groups = _by(records, "level")
    levels = sorted(groups)
    summary, med = [], []
    for lv in levels:
        rows = groups[lv]
        d = np.array([r["sup_dist"] for r in rows])
        med.append(float(np.median(d)))
        summary.append({"level": lv, "n_steps": rows[0]["n_steps"], "n": rows[0]["n"], "replicas": len(rows),
                        "median_sup_dist": med[-1], "q90_sup_dist": float(np.quantile(d, 0.9))})
    verdicts = {
        "median_decreasing": len(med) >= 2 and _strictly_decreasing(med),
        "final_median_below_tol": bool(med) and med[-1] < tol["uniqueness_tol"],
    }
    details = {
        "median_decreasing": ", ".join(f"{v:.4g}" for v in med),
        "final_median_below_tol": f"{med[-1] if med else math.nan:.4g} < {tol['uniqueness_tol']:g}",
    }
    return summary, verdicts, details


def run_uniqueness_check(config: StudyConfig) -> StudyResult:
    """Euler scheme against the mollified-driver construction on identical drivers."""
    _check_problem(config.problem)
    records = _run_chunks(_uniqueness_chunk, config)
    return _result("uniqueness", records, config)


# ---------------------------------------------------------------- convergence


def smooth_test_driver(t):
    return 0.5 * np.sin(2.0 * np.pi * t) + t


def expected_order(config: StudyConfig) -> float | None:
    """Strong order the scheme should show, or ``None`` when only the error level is tested."""
    spec = config.problem
    if config.variant == "pure-delay":
        return 1.0
    sigma = spec.params.get("sigma", 0.0)
    nu = spec.params.get("nu", 0.0)
    if sigma != 0.0:
        return 0.5 if (nu == 0.0 or config.driver != "fbm") else None
    return 1.0 if (nu == 0.0 or config.driver != "fbm") else None


def _convergence_setup(config: StudyConfig):
    spec = config.problem
    if config.variant == "pure-delay":
        co = _coefficients(spec)
        try:
            LinearDelayODE.from_coefficients(co, spec.r, lambda s: spec.x0)
        except ValueError as exc:
            raise ConfigError(f"no closed form for this problem: {exc}") from None
    elif config.variant == "geometric":
        if spec.coefficients != "geometric":
            raise ConfigError("the geometric closed form needs coefficients = 'geometric'")
        if config.driver not in ("fbm", "smooth", "zero"):
            raise ConfigError(f"unknown driver {config.driver!r}")
    else:
        raise ConfigError(f"no closed form registered for variant {config.variant!r}")
    kmax = max(config.dt_ladder)
    fine = spec.T * 2**kmax
    if abs(fine - round(fine)) > 1e-9:
        raise ConfigError("T * 2**k must be an integer")
    for k in config.dt_ladder:
        spec.at_steps(round(spec.T * 2**k)).n_hist


def _convergence_chunk(config: StudyConfig, reps) -> list[dict]:
    spec = config.problem
    co = _coefficients(spec)
    kmax = max(config.dt_ladder)
    fine = _grid(spec, round(spec.T * 2**kmax))
    out = []
    if config.variant == "pure-delay":
        if reps[0] != 0:
            return out
        for k in config.dt_ladder:
            sp = spec.at_steps(round(spec.T * 2**k))
            grid = _grid(sp)
            eta = _initial(sp)
            X = solve_paths(co, eta, grid, np.zeros((grid.n_steps + 1, 1)), np.zeros((grid.n_steps + 1, 1)))
            ode = LinearDelayODE.from_coefficients(co, sp.r, lambda s: sp.x0)
            exact = method_of_steps_oracle(ode, _full_grid(sp)).values
            err = float(np.abs(X - exact)[sp.n_hist :].max())
            out.append({"replica": 0, "k": k, "dt": grid.dt, "error": err})
        return out
    p = spec.params
    mu, sigma, nu = p.get("mu", 0.0), p.get("sigma", 0.0), p.get("nu", 0.0)
    R = len(reps)
    if sigma != 0.0:
        Wf = np.stack([generate_wiener(fine, 1, substream(config.seed, k, W_STREAM)).values for k in reps])
    else:
        Wf = np.zeros((R, fine.n_steps + 1, 1))
    if config.driver == "fbm":
        Zf = np.stack([generate_fbm(fine, FbmParams(spec.H, 1, substream(config.seed, k, Z_STREAM))).values
                       for k in reps])
    elif config.driver == "smooth":
        Zf = np.broadcast_to(smooth_test_driver(fine.times)[:, None], (R, fine.n_steps + 1, 1))
    else:
        Zf = np.zeros((R, fine.n_steps + 1, 1))
    for k in config.dt_ladder:
        step = 2 ** (kmax - k)
        sp = spec.at_steps(round(spec.T * 2**k))
        grid = _grid(sp)
        W, Z = Wf[:, ::step], Zf[:, ::step]
        X = solve_paths(co, _initial(sp), grid, W, Z)[:, sp.n_hist :, 0]
        exact = geometric_exact(sp.x0, mu, sigma, nu, grid.times, W[..., 0], Z[..., 0])
        err = np.abs(X - exact).max(axis=1)
        for i, rep in enumerate(reps):
            out.append({"replica": rep, "k": k, "dt": grid.dt, "error": float(err[i])})
    return out


def _summarize_convergence(records, config: StudyConfig):
    tol = config.tolerances
    groups = _by(records, "k")
    ks = sorted(groups)
    summary, dts, errs = [], [], []
    for k in ks:
        e = np.array([r["error"] for r in groups[k]])
        mean = float(e.mean())
        se = float(e.std(ddof=1) / math.sqrt(e.size)) if e.size > 1 else 0.0
        dts.append(groups[k][0]["dt"])
        errs.append(mean)
        summary.append({"k": k, "dt": dts[-1], "replicas": int(e.size), "strong_error": mean, "se": se})
    slope = float(np.polyfit(np.log(dts), np.log(errs), 1)[0]) if len(ks) >= 2 and min(errs) > 0 else math.nan
    summary.append({"k": "fit", "slope": slope})
    order = expected_order(config)
    verdicts, details = {}, {}
    if order is not None:
        band = tol["slope_tol_ito"] if order == 0.5 else tol["slope_tol_ode"]
        verdicts["slope"] = abs(slope - order) <= band
        details["slope"] = f"fitted {slope:.4f}, expected {order:g} +- {band:g}"
    verdicts["finest_error"] = errs[-1] < tol["strong_error_max"]
    details["finest_error"] = f"{errs[-1]:.4g} at dt={dts[-1]!r} (limit {tol['strong_error_max']:g})"
    return summary, verdicts, details


def run_convergence_study(config: StudyConfig) -> StudyResult:
    """Strong error against a closed form over a ladder ``dt = 2**-k``.

    Coarse drivers are subsamples of the finest one, so every rung sees the
    same Brownian and fractional paths.
    """
    _convergence_setup(config)
    records = _run_chunks(_convergence_chunk, config)
    return _result("convergence", records, config)


# ---------------------------------------------------------------- norms


NORM_KINDS = ("constant", "linear", "fbm")


def _norm_paths(spec: ProblemSpec, seed: int, k: int):
    full = _full_grid(spec)
    t = full.times
    yield "constant", np.full((t.size, 1), spec.x0)
    yield "linear", t[:, None].copy()
    Z = generate_fbm(_grid(spec), FbmParams(spec.H, 1, substream(seed, k, Z_STREAM))).values
    yield "fbm", np.concatenate([np.zeros((spec.n_hist, 1)), Z])


def _norm_chunk(config: StudyConfig, reps) -> list[dict]:
    spec = config.problem
    full = _full_grid(spec)
    out = []
    slack = config.tolerances["monotone_slack"]
    for k in reps:
        for kind, values in _norm_paths(spec, config.seed, k):
            rep = solution_norm(_path(full, values), spec.T, spec.alpha)
            out.append({
                "replica": k,
                "kind": kind,
                "sup": rep.sup_norm,
                "one": rep.one_norm,
                "total": rep.total,
                "sup_monotone": bool(np.all(np.diff(rep.sup_profile) >= -slack)),
                "one_monotone": bool(np.all(np.diff(rep.one_profile) >= -slack)),
            })
    return out


def linear_one_norm(t: float, alpha: float) -> float:
    """``||X||_{1,t}`` of ``X(s) = s``: ``t**(1 - alpha) / (1 - alpha)``."""
    return t ** (1.0 - alpha) / (1.0 - alpha)


def _summarize_norms(records, config: StudyConfig):
    tol = config.tolerances
    spec = config.problem
    groups = _by(records, "kind")
    summary = []
    for kind in NORM_KINDS:
        rows = groups.get(kind, [])
        if rows:
            summary.append({"kind": kind, "replicas": len(rows),
                            "mean_total": float(np.mean([r["total"] for r in rows])),
                            "mean_one": float(np.mean([r["one"] for r in rows]))})
    lin = groups.get("linear", [])
    target = linear_one_norm(spec.T, spec.alpha)
    lin_err = max((abs(r["one"] - target) / target for r in lin), default=math.nan)
    const = groups.get("constant", [])
    verdicts = {
        "profiles_monotone": all(r["sup_monotone"] and r["one_monotone"] for r in records),
        "linear_closed_form": lin_err < tol["norm_rtol"],
        "constant_flat": all(r["one"] == 0.0 and r["total"] == abs(spec.x0) for r in const),
    }
    details = {
        "profiles_monotone": f"{len(records)} profiles",
        "linear_closed_form": f"relative error {lin_err:.3g} against {target:.6g}",
        "constant_flat": f"total = |x0| = {abs(spec.x0)!r}",
    }
    return summary, verdicts, details


def _norm_profiles(config: StudyConfig) -> list[dict]:
    spec = config.problem
    full = _full_grid(spec)
    rows = []
    for kind, values in _norm_paths(spec, config.seed, 0):
        rep = solution_norm(_path(full, values), spec.T, spec.alpha)
        rows.extend({"kind": kind, "t": t, "sup": s, "one": o, "total": tot} for t, s, o, tot in rep.rows())
    return rows


def run_norm_study(config: StudyConfig) -> StudyResult:
    """Norm profiles of constant, linear and fBm paths; emits ``profiles.csv``."""
    _check_problem(config.problem)
    records = _run_chunks(_norm_chunk, config)
    res = _result("norms", records, config)
    res.tables["profiles"] = _norm_profiles(config)
    return res


# ---------------------------------------------------------------- dispatch


SUMMARIZERS = {
    "moments": _summarize_moments,
    "stability": _summarize_stability,
    "uniqueness": _summarize_uniqueness,
    "convergence": _summarize_convergence,
    "norms": _summarize_norms,
}

RUNNERS = {
    "moments": run_moment_study,
    "stability": run_stability_study,
    "uniqueness": run_uniqueness_check,
    "convergence": run_convergence_study,
    "norms": run_norm_study,
}


def summarize(study: str, records, config: StudyConfig):
    """Summary rows, verdicts and their explanations; a pure function of ``records``."""
    return SUMMARIZERS[study](records, config)


def _result(study, records, config) -> StudyResult:
    summary, verdicts, details = summarize(study, records, config)
    return StudyResult(study, records, summary, verdicts, details, config)


def run_study(config: StudyConfig) -> StudyResult:
    return RUNNERS[config.study](config)


def recompute(out_dir) -> StudyResult:
    """Rebuild verdicts from ``records.csv`` and the config stored in ``meta.txt``."""
    out = Path(out_dir)
    meta = read_meta(out / "meta.txt")
    config = config_from_json(meta["config_json"])
    records = read_rows(out / "records.csv")
    return _result(config.study, records, config)
