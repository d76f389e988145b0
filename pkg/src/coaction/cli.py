"""Command line interface.

Subcommands: train, eval, infer, export, compare, serve. The report
paths (eval, export) also render per-task front figures next to their
output files; pass --no-plots to skip. Exit codes: 2 for config or
validation problems, 1 for runtime failures.
"""

import argparse
import json
import os
import sys

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .config import ConfigError, build_configs, load_run_config
from .stats import wilcoxon_exact
from .trainer import evaluate_quality, infer_point, solutions_on_grid, train

METRIC_ORIENTATION = {"hv": +1, "range": +1, "sparsity": -1}  # +1: higher wins


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as err:
        print(f"validation error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # noqa: BLE001 - CLI boundary
        print(f"error: {err}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coaction")
    sub = parser.add_subparsers(required=True)

    p = sub.add_parser("train", help="train a model from a run config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="write a metrics report for a checkpoint")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--reference", type=float, default=3.5)
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("infer", help="one preference -> one solution (JSON)")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--task", required=True)
    p.add_argument("--theta", required=True, help="v1[,v2] in [0, pi/2]")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("export", help="write the front grid as csv or json")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--format", required=True, choices=["csv", "json"])
    p.add_argument("--out", required=True)
    p.add_argument("--task", default=None, help="restrict to one task id")
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("compare", help="Wilcoxon comparison of two report files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--alpha", type=float, default=0.10)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("serve", help="serve the inference API and explorer UI")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", default=None, help="directory with the built UI")
    p.set_defaults(func=cmd_serve)
    return parser


# ---------------------------------------------------------------------------

def cmd_train(args) -> int:
    resolved = load_run_config(args.config)
    model_cfg, train_cfg = build_configs(resolved)
    checkpoint, trace = train(model_cfg, train_cfg)
    save_checkpoint(checkpoint, args.out)

    trace_doc = {
        "config": resolved,
        "loss": trace.loss.tolist(),
        "task_schedule": trace.task_schedule.tolist(),
        "wall_seconds": trace.wall_seconds,
        "objective_evals": trace.objective_evals,
        "Q": {tid: rep.to_dict() for tid, rep in trace.Q.items()},
        "training_meta": checkpoint.training_meta,
    }
    trace_path = args.out + ".trace.json"
    with open(trace_path, "w") as fh:
        json.dump(trace_doc, fh, indent=1)
    if not args.no_plots:
        from .plots import save_loss_figure
        save_loss_figure(trace.loss, _sibling(args.out, "loss.png"))
    print(f"checkpoint: {args.out}")
    print(f"trace: {trace_path}")
    for tid, rep in trace.Q.items():
        print(f"  {tid}: hv={rep.hv:.4f} range={rep.range:.4f} "
              f"sparsity={rep.sparsity:.4f}")
    return 0


def cmd_eval(args) -> int:
    checkpoint = load_checkpoint(args.ckpt)
    evals = evaluate_quality(checkpoint, eval_points=args.points,
                             reference_scalar=args.reference)
    doc = {"checkpoint": args.ckpt, "eval_points": args.points,
           "reference_scalar": args.reference,
           "tasks": [ev.report.to_dict() for ev in evals.values()]}
    with open(args.report, "w") as fh:
        json.dump(doc, fh, indent=1)
    if not args.no_plots:
        from .plots import save_front_figure
        for tid, ev in evals.items():
            save_front_figure(ev.solutions, ev.report,
                              _sibling(args.report, f"{tid}.png"))
    for ev in evals.values():
        rep = ev.report
        print(f"{rep.task_id}: hv={rep.hv:.4f} range={rep.range:.4f} "
              f"sparsity={rep.sparsity:.4f} points={rep.count_after_filter}")
    return 0


def cmd_infer(args) -> int:
    checkpoint = load_checkpoint(args.ckpt)
    theta = [float(v) for v in args.theta.split(",")]
    print(json.dumps(infer_point(checkpoint, args.task, theta)))
    return 0


def cmd_export(args) -> int:
    checkpoint = load_checkpoint(args.ckpt)
    task_ids = [t.id for t in checkpoint.config.tasks]
    if args.task is not None:
        if args.task not in task_ids:
            raise ConfigError(f"field 'task': '{args.task}' not in checkpoint")
        task_ids = [args.task]

    evals = {tid: solutions_on_grid(checkpoint, tid, args.points)
             for tid in task_ids}
    if args.format == "json":
        doc = [{"task": tid,
                "points": [{"theta": sol.thetas[i].tolist(),
                            "x": sol.xs[i].tolist(),
                            "f_norm": sol.fs[i].tolist()}
                           for i in range(len(sol.fs))]}
               for tid, sol in evals.items()]
        with open(args.out, "w") as fh:
            json.dump(doc, fh)
    else:
        _write_front_csv(evals, checkpoint, args.out)
    if not args.no_plots:
        from .metrics import (MetricsReport, hypervolume, nondominated_filter,
                              range_metric, sparsity_metric)
        from .plots import save_front_figure
        for tid, sol in evals.items():
            front = nondominated_filter(sol.fs)
            m = sol.fs.shape[1]
            rep = MetricsReport(task_id=tid, hv=hypervolume(front, np.full(m, 3.5)),
                                range=range_metric(front),
                                sparsity=sparsity_metric(front),
                                count_after_filter=len(front),
                                r_used=[3.5] * m)
            save_front_figure(sol, rep, _sibling(args.out, f"{tid}.png"))
    print(f"exported {sum(len(s.fs) for s in evals.values())} rows to {args.out}")
    return 0


def _write_front_csv(evals: dict, checkpoint, path: str):
    n_max = max(checkpoint.config.task(tid).n for tid in evals)
    m_max = max(checkpoint.config.task(tid).m for tid in evals)
    theta_cols = ["theta1"] + (["theta2"] if m_max == 3 else [])
    header = (["task"] + theta_cols
              + [f"x{i + 1}" for i in range(n_max)]
              + [f"f{j + 1}" for j in range(m_max)])
    lines = [",".join(header)]
    for tid, sol in evals.items():
        for i in range(len(sol.fs)):
            row = [tid]
            thetas = [f"{v:.10g}" for v in sol.thetas[i]]
            row += thetas + [""] * (len(theta_cols) - len(thetas))
            xs = [f"{v:.10g}" for v in sol.xs[i]]
            row += xs + [""] * (n_max - len(xs))
            fs = [f"{v:.10g}" for v in sol.fs[i]]
            row += fs + [""] * (m_max - len(fs))
            lines.append(",".join(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _load_report_runs(path: str) -> list[dict]:
    """Normalize a report file into a list of {task_id: metrics} runs."""
    with open(path) as fh:
        doc = json.load(fh)
    if isinstance(doc, dict) and "runs" in doc:
        runs = doc["runs"]
    elif isinstance(doc, list):
        runs = doc
    else:
        runs = [doc]
    out = []
    for run in runs:
        tasks = run["tasks"] if isinstance(run, dict) and "tasks" in run else run
        out.append({t["task_id"]: t for t in tasks})
    return out


def cmd_compare(args) -> int:
    runs_a = _load_report_runs(args.a)
    runs_b = _load_report_runs(args.b)
    if len(runs_a) != len(runs_b):
        raise ConfigError(f"run counts differ: {len(runs_a)} vs {len(runs_b)}")

    print(f"{'task':<12} {'metric':<9} {'p':>8}  dir  (n={len(runs_a)}, "
          f"alpha={args.alpha})")
    for tid in runs_a[0]:
        if tid not in runs_b[0]:
            raise ConfigError(f"task '{tid}' missing from --b report")
        for metric in ("hv", "range", "sparsity"):
            a_vals = [run[tid][metric] for run in runs_a]
            b_vals = [run[tid][metric] for run in runs_b]
            res = wilcoxon_exact(a_vals, b_vals, alpha=args.alpha)
            if res.direction == "equal":
                symbol = "="
            else:
                better_a = (res.direction == "plus") \
                    == (METRIC_ORIENTATION[metric] > 0)
                symbol = "+" if better_a else "-"
            mark = " *" if res.p_two_sided <= args.alpha else ""
            print(f"{tid:<12} {metric:<9} {res.p_two_sided:>8.4f}  {symbol}{mark}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    checkpoint = load_checkpoint(args.ckpt)
    app = create_app(checkpoint, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _sibling(path: str, name: str) -> str:
    stem = os.path.splitext(os.path.basename(path))[0]
    return os.path.join(os.path.dirname(path) or ".", f"{stem}_{name}")


if __name__ == "__main__":
    sys.exit(main())
