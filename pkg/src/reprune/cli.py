"""Command-line front end.

Subcommands:
  inspect   print a container's layer table and cost totals
  prune     decide kept filters, slice the weights, emit plan + report
  compare   cosine-similarity and cost report between two containers
  sweep     rerun the election across several minimum cluster rates

Exit codes: 0 all requested artifacts written, 2 bad input or engine error,
3 compare called with mismatched shapes.
"""

from __future__ import annotations

import argparse
import json
import sys

from .analysis import lambda_sweep, similarity_report
from .compression import (
    PruningPlan,
    apply_plan,
    build_plan,
    compression_report,
    count_flops,
    plan_from_counts,
)
from .container import read_snapshot, write_snapshot
from .criteria import Criterion
from .election import ElectionConfig, elect_model
from .errors import RepruneError, ShapeMismatchError, UnknownLayerError
from .jsonio import canonical_dumps, dump_canonical, write_csv

CRITERION_KINDS = {
    "reprune": "reprune",
    "l1": "l1",
    "l2": "l2",
    "gm": "geometric_median",
}


def _lambda_arg(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0.0 < value <= 1.0:
        raise argparse.ArgumentTypeError("lambda must be in (0, 1]")
    return value


def _lambda_list(text: str) -> list[float]:
    return [_lambda_arg(tok) for tok in text.split(",") if tok.strip()]


def _name_list(text: str) -> list[str]:
    return [tok.strip() for tok in text.split(",") if tok.strip()]


def _protected_names(snapshot, protect) -> tuple[str, ...]:
    conv_names = [s.name for s in snapshot.conv_layers()]
    if protect == ["all"]:
        return tuple(conv_names)
    unknown = sorted(set(protect) - set(conv_names))
    if unknown:
        raise UnknownLayerError(
            "cannot protect non-conv or missing layer(s): " + ", ".join(unknown)
        )
    return tuple(protect)


def _load_plan(path) -> PruningPlan:
    with open(path, "r", encoding="utf-8") as fh:
        return PruningPlan.from_dict(json.load(fh))


def cmd_inspect(args) -> int:
    snapshot = read_snapshot(args.input, args.format)
    cost = count_flops(snapshot)
    if args.json:
        doc = {
            "n_layers": len(snapshot.layers),
            "layers": [spec.to_dict() for spec in snapshot.layers],
            "total_flops": cost.total_flops,
            "total_params": cost.total_params,
            "metadata": dict(snapshot.metadata),
        }
        print(canonical_dumps(doc))
        return 0
    print(f"{len(snapshot.layers)} layers")
    for spec in snapshot.layers:
        cells = [f"{spec.name:<28} {spec.kind:<9}"]
        if spec.kind in ("conv", "linear", "batchnorm"):
            cells.append(f"{spec.n_in:>5} -> {spec.n_out:<5}")
        if spec.kind == "conv":
            cells.append(f"k={spec.kernel_h}x{spec.kernel_w}")
            cells.append(f"out={spec.out_h}x{spec.out_w}")
        print("  " + " ".join(cells))
    print(f"total FLOPs  {cost.total_flops}")
    print(f"total params {cost.total_params}")
    return 0


def cmd_prune(args) -> int:
    before = read_snapshot(args.input, args.format)
    protected = _protected_names(before, args.protect)
    lam = args.lam
    kind = CRITERION_KINDS[args.criterion]

    if kind == "reprune":
        elections = elect_model(before, ElectionConfig(lam=lam), protected=protected)
        plan = build_plan(
            before, elections, protected=protected, add_mode=args.add_mode, lam=lam
        )
    else:
        if args.match_plan:
            counts = {
                name: len(entry["kept_out"])
                for name, entry in _load_plan(args.match_plan).per_layer.items()
            }
        else:
            elections = elect_model(
                before, ElectionConfig(lam=lam), protected=protected
            )
            base = build_plan(
                before, elections, protected=protected, add_mode=args.add_mode, lam=lam
            )
            counts = {
                name: len(entry["kept_out"]) for name, entry in base.per_layer.items()
            }
        counts = {
            spec.name: counts[spec.name]
            for spec in before.conv_layers()
            if spec.name in counts
        }
        plan = plan_from_counts(
            before,
            counts,
            Criterion(kind=kind),
            protected=protected,
            add_mode=args.add_mode,
            lam=lam,
        )

    pruned = apply_plan(before, plan)
    write_snapshot(pruned, args.output, args.format)

    plan_path = args.plan or args.output + ".plan.json"
    dump_canonical(plan.to_dict(), plan_path)

    report = compression_report(before, pruned)
    report_path = args.report or args.output + ".report.json"
    doc = {
        "criterion": args.criterion,
        "lambda": lam,
        "add_mode": args.add_mode,
        "protected": sorted(protected),
    }
    doc.update(report.to_dict())
    dump_canonical(doc, report_path)

    print(
        f"wrote {args.output} (FLOPs -{report.reduction['flops']:.2%}, "
        f"params -{report.reduction['params']:.2%})"
    )
    print(f"plan   {plan_path}")
    print(f"report {report_path}")
    return 0


def cmd_compare(args) -> int:
    before = read_snapshot(args.input, args.format)
    after = read_snapshot(args.after, args.format)
    plan = _load_plan(args.plan)
    try:
        sim = similarity_report(before, after, plan)
    except ShapeMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    doc = {"similarity": sim.to_dict()}
    if [(s.name, s.kind) for s in before.layers] == [
        (s.name, s.kind) for s in after.layers
    ]:
        doc["compression"] = compression_report(before, after).to_dict()
    if args.output:
        dump_canonical(doc, args.output)
        print(f"wrote {args.output}")
    elif args.json:
        print(canonical_dumps(doc))
    else:
        print(f"kept filters compared  {sim.values.size}")
        print(f"mean cosine            {sim.mean:.6f}")
        print(f"fraction in [-0.1,0.1] {sim.summary['fraction_near_zero']:.4f}")
        print(f"fraction in [0.2,0.6]  {sim.summary['fraction_mid']:.4f}")
    return 0


def cmd_sweep(args) -> int:
    snapshot = read_snapshot(args.input, args.format)
    protected = _protected_names(snapshot, args.protect)
    result = lambda_sweep(
        snapshot, args.lambdas, protected=protected, add_mode=args.add_mode
    )
    if args.output and args.output.endswith(".csv"):
        write_csv(
            args.output,
            ["lambda", "layer", "n_out", "kept", "remaining_ratio"],
            result["rows"],
        )
        print(f"wrote {args.output}")
    elif args.output:
        dump_canonical(result, args.output)
        print(f"wrote {args.output}")
    elif args.json:
        print(canonical_dumps(result))
    else:
        for row in result["totals"]:
            print(
                f"lambda={row['lambda']:<6g} FLOPs -{row['flops_reduction']:.2%} "
                f"params -{row['params_reduction']:.2%}"
            )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reprune",
        description="Channel-pruning decision engine for FPWT weight containers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--input", required=True, help="input container path")
        p.add_argument(
            "--format",
            choices=("fpwt", "json"),
            default="fpwt",
            help="container format for reads and writes (default fpwt)",
        )

    p_inspect = sub.add_parser("inspect", help="list layers and cost totals")
    common(p_inspect)
    p_inspect.add_argument("--json", action="store_true", help="emit JSON to stdout")
    p_inspect.set_defaults(func=cmd_inspect)

    p_prune = sub.add_parser("prune", help="prune a container, write plan + report")
    common(p_prune)
    p_prune.add_argument("--output", required=True, help="pruned container path")
    p_prune.add_argument(
        "--criterion",
        choices=sorted(CRITERION_KINDS),
        default="reprune",
        help="filter selection rule (default reprune)",
    )
    p_prune.add_argument(
        "--lambda",
        dest="lam",
        type=_lambda_arg,
        default=0.1,
        metavar="RATE",
        help="minimum cluster rate in (0, 1] (default 0.1)",
    )
    p_prune.add_argument(
        "--protect",
        type=_name_list,
        default=[],
        metavar="LAYERS",
        help="comma-separated conv layers to keep at full width, or 'all'",
    )
    p_prune.add_argument(
        "--add-mode",
        choices=("protect", "union"),
        default="protect",
        help="how residual-add inputs are reconciled (default protect)",
    )
    p_prune.add_argument(
        "--match-plan",
        metavar="PLAN_JSON",
        help="copy per-layer keep counts from an existing plan",
    )
    p_prune.add_argument("--plan", help="plan JSON path (default OUTPUT.plan.json)")
    p_prune.add_argument(
        "--report", help="report JSON path (default OUTPUT.report.json)"
    )
    p_prune.set_defaults(func=cmd_prune)

    p_compare = sub.add_parser(
        "compare", help="cosine similarity between kept and fine-tuned filters"
    )
    common(p_compare)
    p_compare.add_argument("--after", required=True, help="fine-tuned container path")
    p_compare.add_argument("--plan", required=True, help="plan JSON from the prune run")
    p_compare.add_argument("--output", help="write the JSON report here")
    p_compare.add_argument("--json", action="store_true", help="emit JSON to stdout")
    p_compare.set_defaults(func=cmd_compare)

    p_sweep = sub.add_parser("sweep", help="election outcomes across cluster rates")
    common(p_sweep)
    p_sweep.add_argument(
        "--lambdas",
        type=_lambda_list,
        required=True,
        metavar="R1,R2,...",
        help="comma-separated minimum cluster rates",
    )
    p_sweep.add_argument(
        "--protect", type=_name_list, default=[], metavar="LAYERS",
        help="comma-separated conv layers to keep at full width, or 'all'",
    )
    p_sweep.add_argument(
        "--add-mode", choices=("protect", "union"), default="protect"
    )
    p_sweep.add_argument("--output", help="write results here (.json or .csv)")
    p_sweep.add_argument("--json", action="store_true", help="emit JSON to stdout")
    p_sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (RepruneError, OSError, json.JSONDecodeError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
