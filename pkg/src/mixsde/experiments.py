"""Monte Carlo ensembles for the convergence and moment statements.

Each experiment is a per-path worker plus an aggregator. Workers only see a
plain config dict and the path index, so they can run in worker processes;
results are collected in index order and aggregates are recomputed from the
stored records alone, which keeps summaries independent of the schedule.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import repeat
from pathlib import Path

import numpy as np

from ._quad import integrate_power_kernel
from .grid import ConfigError, GridPath, SolverOverflowError
from .holder import HolderParams, norm_2alpha, norm_alpha_profile, seminorm_profile
from .mixed_solver import CoefficientSet, SolveConfig, euler_solve_mixed, solve_smooth_driver
from .mollify import fit_loglog, mollify
from .process_gen import GenConfig, gen_fbm, gen_wiener, path_seeds

MAX_FAILURE_FRACTION = 0.02
PILOT_PATHS = 50
MIN_PATHS = 50


class ExperimentError(RuntimeError):
    """Too many paths failed for the aggregates to mean anything."""


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

LINEAR_COEFFS = {
    "a": {"kind": "linear", "scale": 0.1},
    "b": {"kind": "linear", "scale": 0.2},
    "c": {"kind": "linear", "scale": 0.3},
    "K": 0.6,
}

BOUNDED_COEFFS = {
    "a": {"kind": "linear", "scale": -0.5},
    "b": {"kind": "tanh", "amp": 0.5},
    "c": {"kind": "sine", "amp": 0.5},
    "K": 1.0,
    "K1": 0.5,
}


@dataclass
class ExperimentConfig:
    coeffs: dict = field(default_factory=lambda: dict(LINEAR_COEFFS))
    x0: float = 1.0
    n: int = 2048
    T: float = 1.0
    H: float = 0.7
    gamma: float | None = None
    alpha: float | None = None
    eps_levels: list = field(default_factory=lambda: [2.0**-k for k in range(3, 9)])
    M: int = 200
    threshold: float = 0.05
    master_seed: int = 0
    N: float | None = None
    R: float | None = None
    p_list: list = field(default_factory=lambda: [1, 2, 4])
    exp_scales: list = field(default_factory=lambda: [0.0, 0.01])
    time_points: int = 16

    def __post_init__(self):
        if self.gamma is None:
            self.gamma = round(self.H - 0.01, 12)
        if self.alpha is None:
            self.alpha = (3.0 - 2.0 * self.gamma) / 4.0
        self.eps_levels = [float(e) for e in self.eps_levels]
        if self.M < 1:
            raise ConfigError(f"M must be positive, got {self.M}")
        GenConfig(self.n, self.T, self.H, self.master_seed)
        SolveConfig(float(self.x0), self.n, self.T)
        CoefficientSet.from_spec(self.coeffs)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)

    def holder(self) -> HolderParams:
        return HolderParams(self.alpha, self.gamma)

    def check_ensemble(self):
        if self.M < MIN_PATHS:
            raise ConfigError(f"convergence ensembles need M >= {MIN_PATHS}, got {self.M}")
        self.check_eps()

    def check_eps(self):
        e = self.eps_levels
        if len(e) < 2 or any(b >= a for a, b in zip(e, e[1:])):
            raise ConfigError("eps_levels must be strictly decreasing with at least two entries")
        if e[-1] < self.T / self.n:
            raise ConfigError("the finest eps is below one grid step")


@dataclass
class EnsembleResult:
    kind: str
    config: dict
    records: list[dict]
    aggregates: dict
    failures: list[dict] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "config": self.config,
            "paths_requested": self.config["M"],
            "paths_used": len(self.records),
            "failures": self.failures,
            "aggregates": self.aggregates,
        }


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------

def _drivers(cfg: dict, index: int, n: int | None = None) -> tuple[GridPath, GridPath, int, int]:
    n = cfg["n"] if n is None else n
    sw, sz = path_seeds(cfg["master_seed"], index)
    W = gen_wiener(GenConfig(n, cfg["T"], 0.5, sw))
    Z = gen_fbm(GenConfig(n, cfg["T"], cfg["H"], sz))
    return W, Z, sw, sz


def _run(worker, cfg: ExperimentConfig, jobs: int = 1) -> tuple[list[dict], list[dict]]:
    d = cfg.to_dict()
    idx = range(cfg.M)
    if jobs <= 1:
        out = [_guarded(worker, d, i) for i in idx]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            out = list(ex.map(_guarded, repeat(worker), repeat(d), idx, chunksize=max(1, cfg.M // (4 * jobs))))
    records = [r for r in out if not r.get("failed")]
    failures = [r for r in out if r.get("failed")]
    if failures:
        frac = len(failures) / cfg.M
        if frac >= MAX_FAILURE_FRACTION:
            raise ExperimentError(f"{len(failures)} of {cfg.M} paths overflowed; first: {failures[0]['error']}")
        warnings.warn(f"{len(failures)} of {cfg.M} paths overflowed and are excluded", stacklevel=3)
    return records, failures


def _guarded(worker, cfg: dict, index: int) -> dict:
    try:
        return worker(cfg, index)
    except SolverOverflowError as exc:
        return {"index": index, "failed": True, "error": str(exc)}


def _mean(xs) -> float:
    xs = list(xs)
    return math.fsum(xs) / len(xs) if xs else float("nan")


def _median(xs) -> float:
    return float(np.median(np.asarray(xs, float))) if len(xs) else float("nan")


# ---------------------------------------------------------------------------
# limit theorem: X^eps -> X in probability, uniformly in t
# ---------------------------------------------------------------------------

def _limit_worker(cfg: dict, index: int) -> dict:
    cs = CoefficientSet.from_spec(cfg["coeffs"])
    W, Z, sw, sz = _drivers(cfg, index)
    scfg = SolveConfig(float(cfg["x0"]), cfg["n"], cfg["T"])
    X = euler_solve_mixed(cs, scfg, W, Z)
    alpha = cfg["alpha"]
    dev, gap, norm2 = [], [], []
    for eps in cfg["eps_levels"]:
        Ze = mollify(Z, eps)
        Xe = solve_smooth_driver(cs, scfg, W, Ze)
        dev.append(float(np.max(np.abs(Xe.values - X.values))))
        gap.append(float(seminorm_profile(Z - Ze, alpha)[-1]))
        norm2.append(math.sqrt(norm_2alpha(X - Xe, alpha, X.T)))
    return {"index": index, "seed_w": sw, "seed_z": sz, "dev": dev, "gap": gap, "norm2": norm2}


def aggregate_limit(records: list[dict], config: dict) -> dict:
    M = len(records)
    thr = config["threshold"]
    levels = []
    for j, eps in enumerate(config["eps_levels"]):
        exceed = sum(1 for r in records if r["dev"][j] > thr)
        p = exceed / M
        levels.append({
            "eps": eps,
            "exceed_count": exceed,
            "prob": p,
            "se": math.sqrt(p * (1 - p) / M),
            "median_dev": _median([r["dev"][j] for r in records]),
            "median_gap": _median([r["gap"][j] for r in records]),
            "median_norm2": _median([r["norm2"][j] for r in records]),
        })
    nonincreasing = all(
        b["prob"] <= a["prob"] + 2 * max(a["se"], b["se"]) for a, b in zip(levels, levels[1:])
    )
    med2 = [lv["median_norm2"] for lv in levels]
    return {
        "levels": levels,
        "nonincreasing_within_noise": nonincreasing,
        "finest_prob": levels[-1]["prob"],
        "finest_within_threshold": levels[-1]["prob"] <= 0.05,
        "norm2_median_decreasing": all(b <= a for a, b in zip(med2, med2[1:])),
    }


def limit_theorem_experiment(cfg: ExperimentConfig, jobs: int = 1) -> EnsembleResult:
    cfg.check_ensemble()
    cfg.holder()
    records, failures = _run(_limit_worker, cfg, jobs)
    return EnsembleResult("converge", cfg.to_dict(), records, aggregate_limit(records, cfg.to_dict()), failures)


# ---------------------------------------------------------------------------
# second-moment difference estimate on the localizing event
# ---------------------------------------------------------------------------

def _l2_worker(cfg: dict, index: int) -> dict:
    cs = CoefficientSet.from_spec(cfg["coeffs"])
    W, Z, sw, sz = _drivers(cfg, index)
    scfg = SolveConfig(float(cfg["x0"]), cfg["n"], cfg["T"])
    alpha = cfg["alpha"]
    X = euler_solve_mixed(cs, scfg, W, Z)
    rec = {
        "index": index, "seed_w": sw, "seed_z": sz,
        "z_semi": float(seminorm_profile(Z, alpha)[-1]),
        "x_inf": float(np.max(norm_alpha_profile(X, alpha))),
        "ze_semi": [], "xe_inf": [], "dev2": [], "gap2": [],
    }
    for eps in cfg["eps_levels"]:
        Ze = mollify(Z, eps)
        Xe = solve_smooth_driver(cs, scfg, W, Ze)
        rec["ze_semi"].append(float(seminorm_profile(Ze, alpha)[-1]))
        rec["xe_inf"].append(float(np.max(norm_alpha_profile(Xe, alpha))))
        rec["dev2"].append(float(np.max(np.abs(X.values - Xe.values)) ** 2))
        rec["gap2"].append(float(seminorm_profile(Z - Ze, alpha)[-1] ** 2))
    return rec


def in_event(rec: dict, j: int, N: float, R: float) -> bool:
    """Indicator of ``A^{N,R}``: both driver seminorms <= N and the two solution norms sum to <= R."""
    return rec["z_semi"] <= N and rec["ze_semi"][j] <= N and rec["x_inf"] + rec["xe_inf"][j] <= R


def event_levels(records: list[dict], pilot: int = PILOT_PATHS) -> tuple[float, float]:
    """90th percentiles of the driver seminorms and of the solution-norm sums over the pilot paths."""
    head = records[:pilot]
    zs = [max([r["z_semi"]] + r["ze_semi"]) for r in head]
    xs = [max(r["x_inf"] + x for x in r["xe_inf"]) for r in head]
    return float(np.percentile(zs, 90)), float(np.percentile(xs, 90))


def aggregate_l2(records: list[dict], config: dict) -> dict:
    N, R = config.get("N"), config.get("R")
    if N is None or R is None:
        pN, pR = event_levels(records)
        N = pN if N is None else N
        R = pR if R is None else R
    M = len(records)
    levels, fit_x, fit_y = [], [], []
    for j, eps in enumerate(config["eps_levels"]):
        ind = [in_event(r, j, N, R) for r in records]
        count = sum(ind)
        e_dev = math.fsum(r["dev2"][j] for r, a in zip(records, ind) if a) / M
        e_gap = math.fsum(r["gap2"][j] for r, a in zip(records, ind) if a) / M
        levels.append({"eps": eps, "event_count": count, "e_dev2": e_dev, "e_gap2": e_gap})
        if count == 0 or e_dev <= 0 or e_gap <= 0:
            warnings.warn(f"event empty or degenerate at eps={eps}; level excluded from the fit", stacklevel=2)
            continue
        fit_x.append(e_gap)
        fit_y.append(e_dev)
    slope = fit_loglog(fit_x, fit_y)[0] if len(fit_x) >= 2 else float("nan")
    return {"N": N, "R": R, "levels": levels, "slope": slope,
            "slope_in_range": bool(0.8 <= slope <= 1.3)}


def l2_difference_experiment(cfg: ExperimentConfig, jobs: int = 1) -> EnsembleResult:
    cfg.check_ensemble()
    cfg.holder()
    if cfg.N is not None and not cfg.N > 0:
        raise ConfigError("N must be positive")
    records, failures = _run(_l2_worker, cfg, jobs)
    return EnsembleResult("l2diff", cfg.to_dict(), records, aggregate_l2(records, cfg.to_dict()), failures)


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------

def _moment_worker(cfg: dict, index: int) -> dict:
    cs = CoefficientSet.from_spec(cfg["coeffs"])
    n = cfg["n"]
    Wf, Zf, sw, sz = _drivers(cfg, index, 2 * n)
    alpha = cfg["alpha"]
    out = {"index": index, "seed_w": sw, "seed_z": sz}
    for tag, W, Z in (("n", Wf, Zf), ("fine", Wf, Zf)):
        if tag == "n":
            W = GridPath(0.0, 2 * W.dt, W.values[::2])
            Z = GridPath(0.0, 2 * Z.dt, Z.values[::2])
        X = euler_solve_mixed(cs, SolveConfig(float(cfg["x0"]), W.n, cfg["T"]), W, Z)
        out[f"x_inf_{tag}"] = float(np.max(norm_alpha_profile(X, alpha)))
    out["z_semi"] = float(seminorm_profile(Zf, alpha)[-1])
    return out


def aggregate_moments(records: list[dict], config: dict) -> dict:
    alpha = config["alpha"]
    moments = []
    for p in config["p_list"]:
        m_n = _mean(r["x_inf_n"] ** p for r in records)
        m_f = _mean(r["x_inf_fine"] ** p for r in records)
        ratio = m_f / m_n if m_n > 0 else (1.0 if m_f == m_n else float("inf"))
        moments.append({"p": p, "mean_n": m_n, "mean_2n": m_f, "ratio": ratio,
                        "finite": bool(math.isfinite(m_n) and math.isfinite(m_f)),
                        "stable": bool(0.5 <= ratio <= 2.0)})
    expo = 1.0 / (1.0 - 2.0 * alpha)
    half = max(1, len(records) // 2)
    exp_moments = []
    for a in config["exp_scales"]:
        vals = [math.exp(a * r["z_semi"] ** expo) for r in records]
        full, first = _mean(vals), _mean(vals[:half])
        change = abs(full - first) / full if full > 0 else 0.0
        exp_moments.append({"scale": a, "mean": full, "mean_half": first, "rel_change": change,
                            "stabilized": bool(math.isfinite(full) and change <= 0.1)})
    return {"moments": moments, "exp_moments": exp_moments, "exponent": expo,
            "all_finite": all(m["finite"] for m in moments),
            "all_stable": all(m["stable"] for m in moments)}


def moment_experiment(cfg: ExperimentConfig, jobs: int = 1) -> EnsembleResult:
    cs = CoefficientSet.from_spec(cfg.coeffs)
    if cs.K1 is None:
        raise ConfigError("the moment experiment needs a bounded b (declare K1)")
    if not 0 < cfg.alpha < 0.25:
        raise ConfigError(f"the moment experiment needs alpha < 1/4, got {cfg.alpha}")
    if not cfg.H > 0.75:
        raise ConfigError(f"the moment experiment needs H > 3/4, got {cfg.H}")
    if 2 * cfg.n > 4096:
        raise ConfigError("the moment experiment doubles n; keep n <= 2048")
    records, failures = _run(_moment_worker, cfg, jobs)
    return EnsembleResult("moments", cfg.to_dict(), records, aggregate_moments(records, cfg.to_dict()), failures)


# ---------------------------------------------------------------------------
# a-priori inequality
# ---------------------------------------------------------------------------

def _kernel_term(xprof: np.ndarray, k: int, alpha: float, dt: float) -> float:
    """``int_0^t ||X||_s (s**-alpha + (t-s)**(-2 alpha)) ds`` with ``t`` at index ``k``."""
    w = xprof[: k + 1]
    return integrate_power_kernel(w, alpha, dt) + integrate_power_kernel(w[::-1], 2 * alpha, dt)


def apriori_sides(X: GridPath, Z: GridPath, Y: GridPath, alpha: float, k: int) -> tuple[float, float]:
    """Left and right sides of the a-priori bound at grid index ``k`` with unit constant.

    ``Y`` is the Itô integral path of ``b(s, X_s) dW_s``.
    """
    xprof = norm_alpha_profile(X, alpha)
    rhs = seminorm_profile(Z, alpha)[k] * (1.0 + _kernel_term(xprof, k, alpha, X.dt))
    return float(xprof[k]), float(rhs + norm_alpha_profile(Y, alpha)[k])


def _apriori_worker(cfg: dict, index: int) -> dict:
    cs = CoefficientSet.from_spec(cfg["coeffs"])
    W, Z, sw, sz = _drivers(cfg, index)
    X = euler_solve_mixed(cs, SolveConfig(float(cfg["x0"]), cfg["n"], cfg["T"]), W, Z)
    t = X.times[:-1]
    bvals = np.broadcast_to(np.asarray(cs.b(t, X.values[:-1]), float), t.shape)
    Y = X.with_values(np.concatenate(([0.0], np.cumsum(bvals * np.diff(W.values)))))
    alpha = cfg["alpha"]
    xprof = norm_alpha_profile(X, alpha)
    lam = seminorm_profile(Z, alpha)
    yprof = norm_alpha_profile(Y, alpha)
    ks = np.unique(np.linspace(0, cfg["n"], cfg["time_points"] + 1).round().astype(int)[1:])
    ratios = []
    for k in ks:
        rhs = lam[k] * (1.0 + _kernel_term(xprof, k, alpha, X.dt)) + yprof[k]
        lhs = xprof[k]
        ratios.append(0.0 if lhs == 0 else (lhs / rhs if rhs > 0 else float("inf")))
    return {"index": index, "seed_w": sw, "seed_z": sz, "times": [float(X.times[k]) for k in ks],
            "ratios": ratios, "max_ratio": max(ratios)}


def aggregate_apriori(records: list[dict], config: dict) -> dict:
    half = max(1, len(records) // 2)
    full = max(r["max_ratio"] for r in records)
    first = max(r["max_ratio"] for r in records[:half])
    per_time = [max(r["ratios"][j] for r in records) for j in range(len(records[0]["ratios"]))]
    return {"max_ratio": full, "max_ratio_half": first,
            "bounded": bool(math.isfinite(full)),
            "stable": bool(first == full == 0.0 or (first > 0 and abs(full / first - 1) <= 0.5)),
            "times": records[0]["times"], "max_ratio_by_time": per_time}


def apriori_inequality_check(cfg: ExperimentConfig, jobs: int = 1) -> EnsembleResult:
    cs = CoefficientSet.from_spec(cfg.coeffs)
    if cs.K1 is None:
        raise ConfigError("the a-priori check needs a bounded b (declare K1)")
    if not 0 < cfg.alpha < 0.5:
        raise ConfigError(f"alpha must lie in (0, 1/2), got {cfg.alpha}")
    records, failures = _run(_apriori_worker, cfg, jobs)
    return EnsembleResult("apriori", cfg.to_dict(), records, aggregate_apriori(records, cfg.to_dict()), failures)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

EXPERIMENTS = {
    "converge": (limit_theorem_experiment, aggregate_limit),
    "l2diff": (l2_difference_experiment, aggregate_l2),
    "moments": (moment_experiment, aggregate_moments),
    "apriori": (apriori_inequality_check, aggregate_apriori),
}


def summary_json(result: EnsembleResult) -> str:
    return json.dumps(result.summary(), indent=2, sort_keys=True) + "\n"


def _record_rows(result: EnsembleResult) -> tuple[list[str], list[list]]:
    cfg = result.config
    if result.kind == "converge":
        head = ["index", "seed_w", "seed_z", "eps", "dev", "gap", "norm2"]
        rows = [[r["index"], r["seed_w"], r["seed_z"], e, r["dev"][j], r["gap"][j], r["norm2"][j]]
                for r in result.records for j, e in enumerate(cfg["eps_levels"])]
    elif result.kind == "l2diff":
        head = ["index", "seed_w", "seed_z", "eps", "z_semi", "ze_semi", "x_inf", "xe_inf", "dev2", "gap2"]
        rows = [[r["index"], r["seed_w"], r["seed_z"], e, r["z_semi"], r["ze_semi"][j], r["x_inf"],
                 r["xe_inf"][j], r["dev2"][j], r["gap2"][j]]
                for r in result.records for j, e in enumerate(cfg["eps_levels"])]
    elif result.kind == "moments":
        head = ["index", "seed_w", "seed_z", "x_inf_n", "x_inf_2n", "z_semi"]
        rows = [[r["index"], r["seed_w"], r["seed_z"], r["x_inf_n"], r["x_inf_fine"], r["z_semi"]]
                for r in result.records]
    else:
        head = ["index", "seed_w", "seed_z", "t", "ratio"]
        rows = [[r["index"], r["seed_w"], r["seed_z"], t, q]
                for r in result.records for t, q in zip(r["times"], r["ratios"])]
    return head, rows


def _plot_rows(result: EnsembleResult) -> tuple[list[str], list[list]]:
    agg = result.aggregates
    if result.kind == "converge":
        return (["eps", "prob", "se", "median_dev", "median_gap", "median_norm2"],
                [[lv[k] for k in ("eps", "prob", "se", "median_dev", "median_gap", "median_norm2")]
                 for lv in agg["levels"]])
    if result.kind == "l2diff":
        return (["eps", "e_gap2", "e_dev2", "event_count"],
                [[lv["eps"], lv["e_gap2"], lv["e_dev2"], lv["event_count"]] for lv in agg["levels"]])
    if result.kind == "moments":
        return (["p", "mean_n", "mean_2n", "ratio"],
                [[m["p"], m["mean_n"], m["mean_2n"], m["ratio"]] for m in agg["moments"]])
    return (["t", "max_ratio"], [list(x) for x in zip(agg["times"], agg["max_ratio_by_time"])])


def _fmt(x):
    return format(x, ".17g") if isinstance(x, float) else x


def _write_rows(dest: Path, head, rows):
    with open(dest, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(head)
        w.writerows([[_fmt(x) for x in row] for row in rows])


def write_outputs(result: EnsembleResult, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_rows(out / "records.csv", *_record_rows(result))
    _write_rows(out / "plotdata.csv", *_plot_rows(result))
    (out / "summary.json").write_text(summary_json(result))
    return out
