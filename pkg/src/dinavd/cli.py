"""Command-line entry point.

Subcommands: simulate, solve, diagnose, reproduce, compare.  Flags given on
the command line override config-file values.  Exit code 0 on success,
nonzero with a stage-tagged message otherwise.
"""

from __future__ import annotations

import argparse
import os
import sys


from . import diagnostics as diag
from .harness import (CONTINUOUS_SYSTEMS, DISCRETE_SYSTEMS, ConfigError,
                      ExperimentConfig, HarnessError, compare_solvers,
                      load_config, read_trajectory_csv, reproduce_illustrations,
                      run_experiment, write_csv, write_summary)
from .dynamics import TrajectoryMeta
from .problems import make_instance


def _add_common(p: argparse.ArgumentParser, config_required=True):
    p.add_argument("--config", required=config_required, help="TOML experiment config")
    p.add_argument("--out", help="output directory override")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--seed", type=int)


def _overrides(args) -> dict:
    ov = {}
    for key in ("alpha", "beta", "t_end", "step", "seed", "out"):
        v = getattr(args, key, None)
        if v is not None:
            ov[key] = v
    return ov


def _load(args) -> ExperimentConfig:
    return load_config(args.config, _overrides(args))


def _cmd_simulate(args) -> int:
    cfg = _load(args)
    if cfg.system not in CONTINUOUS_SYSTEMS:
        raise ConfigError(f"[system] simulate runs continuous systems "
                          f"({', '.join(CONTINUOUS_SYSTEMS)}); got {cfg.system!r}")
    paths = run_experiment(cfg)
    for k, v in sorted(paths.items()):
        print(f"{k}: {v}")
    return 0


def _cmd_solve(args) -> int:
    cfg = _load(args)
    if cfg.system not in DISCRETE_SYSTEMS:
        raise ConfigError(f"[system] solve runs discrete solvers "
                          f"({', '.join(DISCRETE_SYSTEMS)}); got {cfg.system!r}")
    paths = run_experiment(cfg)
    for k, v in sorted(paths.items()):
        print(f"{k}: {v}")
    return 0


def _cmd_diagnose(args) -> int:
    cfg = _load(args)
    if cfg.system not in CONTINUOUS_SYSTEMS:
        raise ConfigError("[system] diagnose needs a continuous-system config")
    traj_path = os.path.join(cfg.output_dir, "trajectory.csv")
    if not os.path.exists(traj_path):
        raise HarnessError("diagnose", f"missing {traj_path}; run simulate first")
    inst = make_instance(cfg.problem_id, cfg.seed)
    meta = TrajectoryMeta(system=cfg.system, params=cfg.params, problem_label=inst.label)
    traj = read_trajectory_csv(traj_path, meta)
    spec = cfg.diagnostics
    lo = None
    if spec.little_o_head and spec.little_o_tail:
        lo = (spec.little_o_head, spec.little_o_tail)
    report = diag.diagnose(traj, inst.smooth, lam=spec.lam, audit_tol=spec.audit_tol,
                           rate_window=spec.rate_window, little_o_windows=lo)
    diag_path = os.path.join(cfg.output_dir, "diagnostics.csv")
    write_csv(diag_path, diag.DiagnosticsReport.CSV_HEADER, report.to_rows())
    write_summary(os.path.join(cfg.output_dir, "summary.txt"), cfg, inst)
    print(f"diagnostics: {diag_path}")
    return 0


def _cmd_reproduce(args) -> int:
    out = args.out or "out/illustrations"
    paths = reproduce_illustrations(out)
    for k, v in sorted(paths.items()):
        print(f"{k}: {v}")
    return 0


def _cmd_compare(args) -> int:
    cfgs = [load_config(p, _overrides(args)) for p in args.configs]
    out = args.out or "out/comparison.csv"
    paths = compare_solvers(cfgs, out)
    for k, v in sorted(paths.items()):
        print(f"{k}: {v}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dinavd",
                                 description="Inertial dynamics with Hessian-driven "
                                             "damping: integrators, diagnostics, solvers")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate a continuous system from a config")
    _add_common(p)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("solve", help="run a discrete solver from a config")
    _add_common(p)
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("diagnose", help="recompute diagnostics from an emitted trajectory")
    _add_common(p)
    p.set_defaults(fn=_cmd_diagnose)

    p = sub.add_parser("reproduce", help="run the illustration presets")
    p.add_argument("--out", help="output directory (default out/illustrations)")
    p.set_defaults(fn=_cmd_reproduce)

    p = sub.add_parser("compare", help="aligned solver comparison on one problem")
    p.add_argument("configs", nargs="+", help="solver config files")
    p.add_argument("--out", help="comparison.csv path")
    p.add_argument("--seed", type=int)
    p.set_defaults(fn=_cmd_compare)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"error[config] {e}", file=sys.stderr)
        return 2
    except HarnessError as e:
        print(f"error{e}", file=sys.stderr)
        return 1
    except (ValueError, RuntimeError) as e:
        print(f"error[run] {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
