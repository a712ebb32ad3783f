"""Command-line entry points: `bridge export` and `bridge import`."""

from __future__ import annotations

import argparse
import sys

from .convert import export, import_pruned_file
from .errors import BridgeError
from .templates import make_template


def _int_list(text):
    return [int(tok) for tok in text.split(",") if tok]


def _template_from_args(args):
    return make_template(
        args.template,
        resolution=args.resolution,
        num_classes=args.classes,
        hidden=args.hidden,
    )


def cmd_export(args):
    container = export(args.checkpoint, _template_from_args(args), args.output)
    n_tensors = len(container.tensors)
    n_layers = len(container.layers)
    print(f"wrote {args.output} ({n_layers} layers, {n_tensors} tensors)")
    return 0


def cmd_import(args):
    import_pruned_file(args.container, _template_from_args(args), args.output)
    print(f"wrote {args.output}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bridge",
        description="Convert framework checkpoints to FPWT containers and back.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument(
            "--template", required=True,
            help="architecture: vggN, resnetN, or chain:8,M,16",
        )
        p.add_argument("--resolution", type=int, help="input image size")
        p.add_argument("--classes", type=int, help="classifier output count")
        p.add_argument(
            "--hidden", type=_int_list,
            help="comma-separated classifier hidden sizes (chain/vgg templates)",
        )
        p.add_argument("--output", required=True, help="file to write")

    p_export = sub.add_parser("export", help="checkpoint file -> FPWT container")
    p_export.add_argument("--checkpoint", required=True, help="checkpoint to read")
    common(p_export)
    p_export.set_defaults(func=cmd_export)

    p_import = sub.add_parser("import", help="FPWT container -> checkpoint file")
    p_import.add_argument("--container", required=True, help="container to read")
    common(p_import)
    p_import.set_defaults(func=cmd_import)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (BridgeError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
