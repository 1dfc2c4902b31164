"""Command-line entry point: ``fusion-eval <command> ...``.

Every command prints JSON on stdout. Validation problems go to stderr and exit
with status 1; usage errors exit with 2.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .core import EvalError, TaskKind, overall, to_unit_scale
from .detection_metrics import MATCHING_MODES
from .harness.scoring import ScoreOptions, score_overall, score_task
from .text_metrics import NormalizationPolicy

log = logging.getLogger("fusion_eval")


def _emit(obj, out: str | None = None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=False, ensure_ascii=False)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    print(text)


def _options(args) -> ScoreOptions:
    kw = {"iou_threshold": args.iou_thr, "matching_mode": args.matching}
    if args.policy is not None:
        pol = NormalizationPolicy.parse(args.policy)
        kw["htr_policy"] = pol
        kw["vqa_policy"] = pol
    return ScoreOptions(**kw)


def cmd_score(args) -> int:
    report = score_task(args.task, args.gt, args.pred, _options(args))
    out = report.to_dict(args.digits)
    if not args.per_sample:
        out.pop("per_sample", None)
    if report.task is TaskKind.C2C and not args.components:
        out.get("details", {}).pop("components", None)
    _emit(out, args.out)
    return 0


def cmd_overall(args) -> int:
    score, reports = score_overall(args.gt_dir, args.pred_dir, _options(args))
    out = score.to_dict(args.digits)
    out["warnings"] = {t.value: list(r.warnings) for t, r in reports.items() if r.warnings}
    _emit(out, args.out)
    return 0


def cmd_sum(args) -> int:
    c2c = to_unit_scale(args.c2c) if args.c2c_percent else args.c2c
    _emit(overall(c2c, args.htr, args.zsod, args.vqa).to_dict(args.digits))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .harness.service import create_app

    host, _, port = args.addr.rpartition(":")
    app = create_app(args.store, args.gt_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def cmd_sampler(args) -> int:
    from .sampler import TaskWeights, derive_weights, load_budgets, sample_stream, STREAM_VERSION

    if args.action == "derive":
        w = derive_weights(load_budgets(args.budgets))
        _emit({"weights": w.to_dict(), "rounded": w.rounded(args.round)})
    else:
        data = json.loads(Path(args.weights).read_text("utf-8"))
        weights = TaskWeights(data.get("weights", data))
        seq = sample_stream(weights, args.seed, args.n)
        _emit({"stream": STREAM_VERSION, "seed": args.seed, "tasks": [t.value for t in seq]})
    return 0


def cmd_co2(args) -> int:
    from .emissions import HardwareProfile, default_profile, estimate_co2, fit_coefficient, load_runs

    if args.action == "estimate":
        profile = HardwareProfile.load(args.profile) if args.profile else default_profile()
        _emit({"hours": args.hours, "kg_co2eq": estimate_co2(args.hours, profile),
               "kg_per_hour": profile.kg_per_hour})
    else:
        fit = fit_coefficient(load_runs(args.runs))
        _emit({"kg_per_hour": fit.coefficient, "max_relative_residual": fit.max_relative_residual,
               "residuals": list(fit.residuals)})
    return 0


def cmd_leaderboard(args) -> int:
    from .harness.leaderboard import LOG_NAME, replay

    rows = replay(Path(args.store) / LOG_NAME, best_per_team=not args.all)
    _emit([dict(e.to_dict(args.digits), rank=i + 1) for i, e in enumerate(rows)])
    return 0


def cmd_kernels(args) -> int:
    from .selfcheck import run_checks

    results = run_checks(seed=args.seed, trials=args.trials)
    _emit(results)
    return 0 if all(r["ok"] for r in results.values()) else 1


def _add_score_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--iou-thr", type=float, default=0.5, help="ZsOD IoU threshold (strictly greater)")
    p.add_argument("--matching", choices=[m.replace("_", "-") for m in MATCHING_MODES] + list(MATCHING_MODES),
                   default="one_to_one")
    p.add_argument("--policy", help="text normalisation flags, e.g. 'lowercase,collapse_whitespace' or 'none'")
    p.add_argument("--digits", type=int, default=3, help="display rounding")
    p.add_argument("--out", help="also write the JSON report here")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fusion-eval", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score one task")
    p.add_argument("--task", required=True, choices=[t.value for t in TaskKind])
    p.add_argument("--gt", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--components", action="store_true", help="include the CodeBLEU component breakdown")
    p.add_argument("--per-sample", action="store_true")
    _add_score_options(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("overall", help="score all four tasks and sum")
    p.add_argument("--gt-dir", required=True)
    p.add_argument("--pred-dir", required=True)
    _add_score_options(p)
    p.set_defaults(func=cmd_overall)

    p = sub.add_parser("sum", help="sum four task scores")
    for name in ("c2c", "htr", "zsod", "vqa"):
        p.add_argument(name, type=float)
    p.add_argument("--c2c-percent", action="store_true", help="C2C is given on the 0-100 scale")
    p.add_argument("--digits", type=int, default=3)
    p.set_defaults(func=cmd_sum)

    p = sub.add_parser("serve", help="run the leaderboard service")
    p.add_argument("--addr", default="127.0.0.1:8000")
    p.add_argument("--store", required=True)
    p.add_argument("--gt-dir", required=True)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("leaderboard", help="rank a store by replaying its log")
    p.add_argument("action", choices=["rank"])
    p.add_argument("--store", required=True)
    p.add_argument("--all", action="store_true", help="list every submission, not only each team's best")
    p.add_argument("--digits", type=int, default=3)
    p.set_defaults(func=cmd_leaderboard)

    p = sub.add_parser("sampler", help="task-sampler weights and streams")
    p.add_argument("action", choices=["derive", "stream"])
    p.add_argument("--budgets")
    p.add_argument("--round", type=int, default=2)
    p.add_argument("--weights")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=16)
    p.set_defaults(func=cmd_sampler)

    p = sub.add_parser("co2", help="training-emission estimates")
    p.add_argument("action", choices=["estimate", "fit"])
    p.add_argument("--hours", type=float)
    p.add_argument("--profile")
    p.add_argument("--runs")
    p.set_defaults(func=cmd_co2)

    p = sub.add_parser("kernels", help="check the numerical kernels against brute-force oracles")
    p.add_argument("action", choices=["check"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=50)
    p.set_defaults(func=cmd_kernels)
    return ap


def _require(ap, args) -> None:
    need = {("sampler", "derive"): ["budgets"], ("sampler", "stream"): ["weights"],
            ("co2", "estimate"): ["hours"], ("co2", "fit"): ["runs"]}
    for name in need.get((args.command, getattr(args, "action", None)), []):
        if getattr(args, name) is None:
            ap.error(f"{args.command} {args.action} requires --{name}")


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    _require(ap, args)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (EvalError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
