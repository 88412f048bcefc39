"""Configuration-driven experiment runner.

Reads a TOML config, builds the catalog instance, runs the requested system
(continuous integrator or discrete solver), evaluates diagnostics, and writes
deterministic CSV artifacts plus a plain-text summary.  Every summary
quantity is recomputed from the emitted CSVs, never from in-memory state.

CSV schemas (headers are bit-exact, floats printed with 17 significant digits):

    trajectory.csv   t,x_0..x_{d-1},v_0..v_{d-1},phi,grad_norm
    diagnostics.csv  t,W0,Wbeta,E_lambda,E_scaled,t2_gap,t_resid
    iterates.csv     k,t_k,obj,best,prox_resid_norm
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import diagnostics as diag
from .dynamics import (DynamicsParams, Perturbation, Trajectory, TrajectoryMeta,
                       integrate_avd, integrate_dinavd_1st, integrate_dinavd_2nd,
                       integrate_gdinavd, integrate_perturbed, power_perturbation)
from .problems import CompositeProblem, make_instance
from .solvers import (AlgoParams, IterateHistory, run_fista, run_forward_backward,
                      run_ifb_avd)

CONTINUOUS_SYSTEMS = ("avd", "dinavd2", "dinavd1", "gdinavd", "perturbed")
DISCRETE_SYSTEMS = ("ifb_avd", "fista", "fb")
ALL_SYSTEMS = CONTINUOUS_SYSTEMS + DISCRETE_SYSTEMS
SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


class HarnessError(RuntimeError):
    """Failure with the pipeline stage named."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass
class DiagnosticsSpec:
    lam: Optional[float] = None
    rate_window: Optional[tuple[float, float]] = None
    little_o_head: Optional[tuple[float, float]] = None
    little_o_tail: Optional[tuple[float, float]] = None
    audit_tol: Optional[float] = None


@dataclass
class ExperimentConfig:
    problem_id: str
    seed: int
    system: str
    params: object  # DynamicsParams or AlgoParams, matching the system kind
    x0: Optional[np.ndarray] = None  # discrete systems only
    y0: Optional[np.ndarray] = None
    perturbation: Optional[Perturbation] = None
    diagnostics: DiagnosticsSpec = field(default_factory=DiagnosticsSpec)
    output_dir: str = "out"

    def __post_init__(self):
        if self.system not in ALL_SYSTEMS:
            raise ConfigError(
                f"[system] name: unknown tag {self.system!r}; valid tags: "
                f"{', '.join(ALL_SYSTEMS)}")
        want_dynamics = self.system in CONTINUOUS_SYSTEMS
        if want_dynamics and not isinstance(self.params, DynamicsParams):
            raise ConfigError(f"[params] system {self.system!r} needs dynamics "
                              "parameters (t_end/step)")
        if not want_dynamics and not isinstance(self.params, AlgoParams):
            raise ConfigError(f"[params] system {self.system!r} needs solver "
                              "parameters (h/iterations)")
        if self.system == "perturbed" and self.perturbation is None:
            raise ConfigError("[perturbation] required for system 'perturbed'")
        if isinstance(self.params, DynamicsParams) and self.diagnostics.lam is not None:
            a = self.params.alpha
            lam = self.diagnostics.lam
            if a < 3 or not (2.0 <= lam <= a - 1.0):
                raise ConfigError(f"[diagnostics] lambda: {lam} invalid for alpha={a}; "
                                  "needs alpha >= 3 and lambda in [2, alpha-1]")


def _get(table: dict, table_name: str, key: str, required=True, default=None):
    if key not in table:
        if required:
            raise ConfigError(f"[{table_name}] missing field {key!r}")
        return default
    return table[key]


def _pair(v, name):
    if not (isinstance(v, (list, tuple)) and len(v) == 2):
        raise ConfigError(f"[diagnostics] {name}: expected a [lo, hi] pair")
    return float(v[0]), float(v[1])


def load_config(path: str, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Parse a TOML experiment config; overrides (CLI flags) win over file values."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"config parse error in {path}: {e}") from e
    return config_from_dict(raw, overrides or {})


def config_from_dict(raw: dict, overrides: Optional[dict] = None) -> ExperimentConfig:
    ov = overrides or {}
    prob = raw.get("problem", {})
    problem_id = str(_get(prob, "problem", "id"))
    seed = int(ov.get("seed", prob.get("seed", 0)))

    system = str(_get(raw.get("system", {}), "system", "name"))
    if system not in ALL_SYSTEMS:
        raise ConfigError(f"[system] name: unknown tag {system!r}; valid tags: "
                          f"{', '.join(ALL_SYSTEMS)}")

    par = dict(raw.get("params", {}))
    for key in ("alpha", "beta", "step"):
        if key in ov:
            par[key] = ov[key]
    if "t_end" in ov:
        par["t_end"] = ov["t_end"]

    inst = make_instance(problem_id, seed)
    d = inst.dim
    x0_arr = None
    y0_arr = None
    if system in CONTINUOUS_SYSTEMS:
        x0 = np.asarray(par.get("x0", np.ones(d)), dtype=np.float64).reshape(-1)
        if x0.size != d:
            raise ConfigError(f"[params] x0: length {x0.size} does not match "
                              f"problem dimension {d}")
        if par.get("v0_preset") == "-beta-grad":
            beta = float(_get(par, "params", "beta"))
            v0 = -beta * np.asarray(inst.smooth.gradient(x0), dtype=np.float64)
        else:
            v0 = np.asarray(par.get("v0", np.zeros(d)), dtype=np.float64).reshape(-1)
        try:
            params = DynamicsParams(
                alpha=float(_get(par, "params", "alpha")),
                beta=float(par.get("beta", 0.0)),
                t0=float(par.get("t0", 1.0)),
                x0=x0, v0=v0,
                t_end=float(_get(par, "params", "t_end")),
                step=float(_get(par, "params", "step")),
                sample_every=par.get("sample_every"),
            )
        except ValueError as e:
            raise ConfigError(f"[params] {e}") from e
    else:
        try:
            params = AlgoParams(
                alpha=float(par.get("alpha", 3.1)),
                beta=float(par.get("beta", 1.0)),
                h=float(_get(par, "params", "h")),
                iterations=int(_get(par, "params", "iterations")),
                t0=float(par.get("t0", 1.0)),
                lipschitz=(float(par["lipschitz"]) if "lipschitz" in par
                           else inst.smooth.lipschitz_grad),
            )
        except ValueError as e:
            raise ConfigError(f"[params] {e}") from e
        if "x0" in par:
            x0_arr = np.asarray(par["x0"], dtype=np.float64).reshape(-1)
            if x0_arr.size != d:
                raise ConfigError(f"[params] x0: length {x0_arr.size} does not "
                                  f"match problem dimension {d}")
        if "y0" in par:
            y0_arr = np.asarray(par["y0"], dtype=np.float64).reshape(-1)

    pert = None
    if "perturbation" in raw:
        pt = raw["perturbation"]
        name = _get(pt, "perturbation", "name")
        if name != "power":
            raise ConfigError(f"[perturbation] name: unknown kind {name!r}; "
                              "supported: power")
        pert = power_perturbation(float(_get(pt, "perturbation", "coeff")),
                                  float(_get(pt, "perturbation", "exponent")), d)

    dg = raw.get("diagnostics", {})
    spec = DiagnosticsSpec(
        lam=(float(dg["lambda"]) if "lambda" in dg else None),
        rate_window=(_pair(dg["rate_window"], "rate_window") if "rate_window" in dg else None),
        little_o_head=(_pair(dg["little_o_head"], "little_o_head") if "little_o_head" in dg else None),
        little_o_tail=(_pair(dg["little_o_tail"], "little_o_tail") if "little_o_tail" in dg else None),
        audit_tol=(float(dg["audit_tol"]) if "audit_tol" in dg else None),
    )

    out_dir = str(ov.get("out", raw.get("output", {}).get("dir", "out")))
    return ExperimentConfig(problem_id=problem_id, seed=seed, system=system,
                            params=params, x0=x0_arr, y0=y0_arr, perturbation=pert,
                            diagnostics=spec, output_dir=out_dir)


# ---------------------------------------------------------------------------
# CSV I/O

def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_csv(path: str, header: str, rows: np.ndarray, int_cols: tuple[int, ...] = ()):
    rows = np.atleast_2d(rows)
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for r in rows:
            cells = [str(int(v)) if j in int_cols else _fmt(v) for j, v in enumerate(r)]
            fh.write(",".join(cells) + "\n")


def read_csv(path: str) -> tuple[list[str], np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header:
            raise HarnessError("read", f"{path}: empty CSV")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return header.split(","), data


def trajectory_header(dim: int) -> str:
    xcols = ",".join(f"x_{i}" for i in range(dim))
    vcols = ",".join(f"v_{i}" for i in range(dim))
    return f"t,{xcols},{vcols},phi,grad_norm"


def write_trajectory_csv(path: str, traj: Trajectory):
    rows = np.column_stack([traj.times, traj.xs, traj.vs, traj.phi_vals, traj.grad_norms])
    write_csv(path, trajectory_header(traj.dim), rows)


def read_trajectory_csv(path: str, meta: TrajectoryMeta) -> Trajectory:
    header, data = read_csv(path)
    d = (len(header) - 3) // 2
    if header != trajectory_header(d).split(","):
        raise HarnessError("read", f"{path}: header does not match the trajectory schema")
    return Trajectory(times=data[:, 0], xs=data[:, 1:1 + d], vs=data[:, 1 + d:1 + 2 * d],
                      phi_vals=data[:, 1 + 2 * d], grad_norms=data[:, 2 + 2 * d], meta=meta)


ITERATES_HEADER = "k,t_k,obj,best,prox_resid_norm"


def write_iterates_csv(path: str, hist: IterateHistory):
    resid = np.linalg.norm(hist.prox_residuals, axis=1)
    rows = np.column_stack([hist.ks.astype(np.float64), hist.ts, hist.objectives,
                            hist.best_so_far, resid])
    write_csv(path, ITERATES_HEADER, rows, int_cols=(0,))


# ---------------------------------------------------------------------------
# running experiments

def _run_system(cfg: ExperimentConfig, inst: CompositeProblem):
    sys_tag = cfg.system
    if sys_tag in CONTINUOUS_SYSTEMS:
        p: DynamicsParams = cfg.params
        f = inst.smooth
        if sys_tag == "avd":
            return integrate_avd(f, p)
        if sys_tag == "dinavd2":
            return integrate_dinavd_2nd(f, p)
        if sys_tag == "dinavd1":
            return integrate_dinavd_1st(f, p)
        if sys_tag == "perturbed":
            return integrate_perturbed(f, p, cfg.perturbation)
        return integrate_gdinavd(inst, p)
    p: AlgoParams = cfg.params
    x0 = cfg.x0 if cfg.x0 is not None else np.zeros(inst.dim)
    if sys_tag == "ifb_avd":
        return run_ifb_avd(inst, p, x0, cfg.y0)
    if sys_tag == "fista":
        return run_fista(inst, p, x0)
    return run_forward_backward(inst, p, x0)


def _min_value(inst: CompositeProblem) -> Optional[float]:
    if inst.known_opt_value is not None:
        return inst.known_opt_value
    return inst.smooth.min_value if inst.nonsmooth is None else None


def _solver_diagnostics_rows(hist: IterateHistory, fstar: Optional[float]) -> np.ndarray:
    n = hist.ks.size
    nan = np.full(n, np.nan)
    t2gap = (hist.ts**2 * (hist.objectives - fstar)) if fstar is not None else nan
    return np.column_stack([hist.ts, nan, nan, nan, nan, t2gap, nan])


def run_experiment(cfg: ExperimentConfig) -> dict[str, str]:
    """Execute one configured run; returns the artifact paths."""
    try:
        inst = make_instance(cfg.problem_id, cfg.seed)
    except ValueError as e:
        raise HarnessError("build", str(e)) from e

    try:
        result = _run_system(cfg, inst)
    except (ValueError, RuntimeError) as e:
        raise HarnessError("run", str(e)) from e

    os.makedirs(cfg.output_dir, exist_ok=True)
    paths: dict[str, str] = {}
    diag_path = os.path.join(cfg.output_dir, "diagnostics.csv")

    try:
        if isinstance(result, Trajectory):
            traj_path = os.path.join(cfg.output_dir, "trajectory.csv")
            write_trajectory_csv(traj_path, result)
            paths["trajectory"] = traj_path
            spec = cfg.diagnostics
            lo = None
            if spec.little_o_head and spec.little_o_tail:
                lo = (spec.little_o_head, spec.little_o_tail)
            report = diag.diagnose(result, inst.smooth, lam=spec.lam,
                                   audit_tol=spec.audit_tol,
                                   rate_window=spec.rate_window,
                                   little_o_windows=lo)
            write_csv(diag_path, diag.DiagnosticsReport.CSV_HEADER, report.to_rows())
        else:
            it_path = os.path.join(cfg.output_dir, "iterates.csv")
            write_iterates_csv(it_path, result)
            paths["iterates"] = it_path
            write_csv(diag_path, diag.DiagnosticsReport.CSV_HEADER,
                      _solver_diagnostics_rows(result, _min_value(inst)))
        paths["diagnostics"] = diag_path
    except (ValueError, RuntimeError) as e:
        if isinstance(e, HarnessError):
            raise
        raise HarnessError("diagnostics", str(e)) from e

    try:
        summary_path = os.path.join(cfg.output_dir, "summary.txt")
        write_summary(summary_path, cfg, inst)
        paths["summary"] = summary_path
    except (ValueError, RuntimeError) as e:
        if isinstance(e, HarnessError):
            raise
        raise HarnessError("summary", str(e)) from e
    return paths


def write_summary(path: str, cfg: ExperimentConfig, inst: CompositeProblem):
    """Summary recomputed purely from the emitted CSVs."""
    lines = [
        f"schema = {SCHEMA_VERSION}",
        f"problem = {cfg.problem_id} (seed {cfg.seed})",
        f"system = {cfg.system}",
    ]
    fstar = _min_value(inst)
    out = cfg.output_dir
    traj_csv = os.path.join(out, "trajectory.csv")
    it_csv = os.path.join(out, "iterates.csv")
    diag_csv = os.path.join(out, "diagnostics.csv")

    if os.path.exists(traj_csv):
        p: DynamicsParams = cfg.params
        lines.append(f"alpha = {_fmt(p.alpha)}, beta = {_fmt(p.beta)}, t0 = {_fmt(p.t0)}, "
                     f"t_end = {_fmt(p.t_end)}, step = {_fmt(p.step)}")
        header, data = read_csv(traj_csv)
        t = data[:, 0]
        phi = data[:, -2]
        lines.append(f"samples = {t.size}, t_final = {_fmt(t[-1])}")
        if fstar is not None:
            lines.append(f"final_gap = {_fmt(phi[-1] - fstar)}")
        dheader, ddata = read_csv(diag_csv)
        cols = {name: ddata[:, i] for i, name in enumerate(dheader)}
        tol = cfg.diagnostics.audit_tol
        if tol is None:
            tol = diag.default_audit_tol(p.step, float(cols["W0"][0]))
        audits = {"W0": p.t0, "Wbeta": max(p.t0, p.alpha * p.beta / 2.0),
                  "E_scaled": max(p.t0, 2.0 * p.beta)}
        for name, tmin in audits.items():
            series = cols[name]
            if not np.any(np.isfinite(series)):
                lines.append(f"violations[{name}] = n/a")
                continue
            mask = np.isfinite(series) & (cols["t"] >= tmin - 1e-12)
            v = diag.audit_monotone(series[mask], tol)
            lines.append(f"violations[{name}] = {len(v)} (tol {_fmt(tol)}, t >= {_fmt(tmin)})")
        if fstar is not None and np.any(np.isfinite(cols["t2_gap"])):
            gap = cols["t2_gap"] / cols["t"] ** 2
            win = cfg.diagnostics.rate_window or (t[-1] / 10.0, t[-1])
            try:
                fit = diag.fit_rate(cols["t"], gap, win)
                lines.append(f"slope[gap] = {_fmt(fit.slope)} over [{_fmt(win[0])}, "
                             f"{_fmt(win[1])}], r2 = {_fmt(fit.r2)}")
            except ValueError as e:
                lines.append(f"slope[gap] = n/a ({e})")
            spec = cfg.diagnostics
            if spec.little_o_head and spec.little_o_tail:
                try:
                    ratio = diag.windowed_sup_ratio(cols["t"], cols["t2_gap"],
                                                    spec.little_o_head,
                                                    spec.little_o_tail)
                    lines.append(f"little_o_ratio = {_fmt(ratio)} "
                                 f"(head [{_fmt(spec.little_o_head[0])}, "
                                 f"{_fmt(spec.little_o_head[1])}], tail "
                                 f"[{_fmt(spec.little_o_tail[0])}, "
                                 f"{_fmt(spec.little_o_tail[1])}])")
                except ValueError as e:
                    lines.append(f"little_o_ratio = n/a ({e})")
    elif os.path.exists(it_csv):
        p: AlgoParams = cfg.params
        lines.append(f"alpha = {_fmt(p.alpha)}, beta = {_fmt(p.beta)}, h = {_fmt(p.h)}, "
                     f"iterations = {p.iterations}")
        header, data = read_csv(it_csv)
        best = data[:, 3]
        lines.append(f"rows = {data.shape[0]}, final_obj = {_fmt(data[-1, 2])}, "
                     f"final_best = {_fmt(best[-1])}")
        if fstar is not None:
            lines.append(f"opt_value = {_fmt(fstar)}")
            lines.append(f"final_gap = {_fmt(best[-1] - fstar)}")
        lines.append(f"max_prox_resid_norm = {_fmt(float(np.max(data[:, 4])))}")

    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# presets

def reproduce_illustrations(out_dir: str = "out/illustrations") -> dict[str, str]:
    """The two quadratic showcase runs on [1, 20]: the 1-d well-conditioned
    case (x(1)=1, xd(1)=-3) and the ill-conditioned 2-d case ((1,1), zero
    velocity), each under both damping regimes.  Emits one trajectory CSV per
    (illustration, system) pair; the x-trace, value-trace, and overlay panels
    are column selections of these files.
    """
    runs = {
        "i1_avd": ("quad1d", "avd", [1.0], [-3.0]),
        "i1_dinavd": ("quad1d", "dinavd2", [1.0], [-3.0]),
        "i2_avd": ("illcond2d", "avd", [1.0, 1.0], [0.0, 0.0]),
        "i2_dinavd": ("illcond2d", "dinavd2", [1.0, 1.0], [0.0, 0.0]),
    }
    paths = {}
    for name, (pid, system, x0, v0) in runs.items():
        params = DynamicsParams(alpha=3.1, beta=1.0, t0=1.0, x0=np.array(x0),
                                v0=np.array(v0), t_end=20.0, step=1e-3)
        cfg = ExperimentConfig(problem_id=pid, seed=0, system=system, params=params,
                               output_dir=os.path.join(out_dir, name))
        arts = run_experiment(cfg)
        paths[name] = arts["trajectory"]
    return paths


def compare_solvers(cfgs: list[ExperimentConfig], out_path: str) -> dict[str, str]:
    """Aligned gap-vs-iteration / gap-vs-time table across solver configs
    sharing one problem; written as comparison.csv.
    """
    if not cfgs:
        raise HarnessError("compare", "no configs given")
    key = (cfgs[0].problem_id, cfgs[0].seed)
    for c in cfgs[1:]:
        if (c.problem_id, c.seed) != key:
            raise HarnessError("compare", "configs must share one problem (id and seed)")
    inst = make_instance(*key)
    fstar = _min_value(inst)
    if fstar is None:
        raise HarnessError("compare", "problem has no reference optimum value")
    hists = []
    for c in cfgs:
        if c.system not in DISCRETE_SYSTEMS:
            raise HarnessError("compare", f"system {c.system!r} is not a solver")
        hists.append((c.system, _run_system(c, inst)))
    n = min(h.ks.size for _, h in hists)
    cols = [np.arange(n, dtype=np.float64)]
    names = ["k"]
    for tag, h in hists:
        cols.append(h.ts[:n])
        cols.append(h.best_so_far[:n] - fstar)
        names.append(f"t_{tag}")
        names.append(f"gap_{tag}")
    os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
    write_csv(out_path, ",".join(names), np.column_stack(cols), int_cols=(0,))
    return {"comparison": out_path}
