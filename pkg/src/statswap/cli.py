"""Command-line front end over TSSF files.

Subcommands: ``transform`` (run the two-stage transform), ``loss``
(evaluate the loss suite over feature bundles, JSON to stdout), ``attn``
(export an attention map), ``bench`` (patch-size timing table, TSV to
stdout, optional figure).

Exit codes: 0 success, 1 I/O failure, 2 validation failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bench import run_benchmark
from .errors import EngineError
from .losses import (
    LossWeights,
    attention_content_loss,
    attention_map,
    content_loss,
    identity_loss,
    patch_style_loss,
    style_loss,
    total_loss,
)
from .transform import MATCHERS, TssatConfig, tssat
from .tssf import read_bundle, read_tssf, write_tssf, write_tssf_array

__all__ = ["main", "build_parser"]


def _add_transform_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--patch-size", type=int, default=5, help="swap patch size k (default 5)")
    p.add_argument(
        "--content-stride",
        type=int,
        default=None,
        help="content patch stride (default: patch size)",
    )
    p.add_argument("--style-stride", type=int, default=1, help="style patch stride (default 1)")
    p.add_argument("--epsilon", type=float, default=1e-5, help="variance stabiliser (default 1e-5)")
    p.add_argument("--matcher", choices=MATCHERS, default="gemm", help="patch matcher backend")


def _add_weight_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda1", type=float, default=5.0, help="content loss weight")
    p.add_argument("--lambda2", type=float, default=50000.0, help="attention content loss weight")
    p.add_argument("--lambda3", type=float, default=6.0, help="style loss weight")
    p.add_argument("--lambda4", type=float, default=0.5, help="patch style loss weight")
    p.add_argument("--lambda5", type=float, default=1.0, help="identity loss weight")
    p.add_argument("--lambda-id1", type=float, default=50.0, help="identity pixel-term weight")
    p.add_argument("--lambda-id2", type=float, default=1.0, help="identity feature-term weight")
    p.add_argument("--tau", type=float, default=100.0, help="attention temperature (default 100)")


def _config(args) -> TssatConfig:
    return TssatConfig(
        patch_size=args.patch_size,
        content_stride=args.content_stride,
        style_stride=args.style_stride,
        epsilon=args.epsilon,
        matcher=args.matcher,
    )


def cmd_transform(args) -> int:
    content = read_tssf(args.content)
    style = read_tssf(args.style)
    out, match = tssat(content, style, _config(args))
    write_tssf(out, args.out)
    if args.matches:
        with open(args.matches, "w") as fh:
            for i in range(match.content_patch_count):
                fh.write(f"{i}\t{int(match.assignment[i])}\t{float(match.score[i])!r}\n")
    return 0


def cmd_loss(args) -> int:
    content = read_bundle(args.content)
    style = read_bundle(args.style)
    stylized = read_bundle(args.stylized)
    weights = LossWeights(
        lambda1=args.lambda1,
        lambda2=args.lambda2,
        lambda3=args.lambda3,
        lambda4=args.lambda4,
        lambda5=args.lambda5,
        lambda_id1=args.lambda_id1,
        lambda_id2=args.lambda_id2,
        tau=args.tau,
    )
    cfg = _config(args)
    l_c = content_loss(content, stylized)
    l_ac = attention_content_loss(content, stylized, tau=weights.tau)
    l_s = style_loss(style, stylized)
    l_ps = patch_style_loss(stylized.get("relu4_1"), style.get("relu4_1"), cfg)
    identity_inputs = (
        args.content_image, args.cc_image, args.style_image, args.ss_image,
        args.cc, args.ss,
    )
    if all(v is not None for v in identity_inputs):
        l_id = identity_loss(
            read_tssf(args.content_image),
            read_tssf(args.cc_image),
            read_tssf(args.style_image),
            read_tssf(args.ss_image),
            content,
            read_bundle(args.cc),
            style,
            read_bundle(args.ss),
            weights,
        )
    elif any(v is not None for v in identity_inputs):
        raise EngineError(
            "identity evaluation needs --content-image, --cc-image, "
            "--style-image, --ss-image, --cc and --ss together"
        )
    else:
        l_id = 0.0
    report = total_loss(l_c, l_ac, l_s, l_ps, l_id, weights)
    print(json.dumps(report.as_dict()))
    return 0


def cmd_attn(args) -> int:
    fmap = read_tssf(args.content)
    amap = attention_map(fmap, tau=args.tau)
    write_tssf_array(amap.matrix, args.out)
    return 0


def cmd_bench(args) -> int:
    content = read_tssf(args.content)
    style = read_tssf(args.style)
    try:
        ks = [int(v) for v in args.k_list.split(",") if v.strip()]
    except ValueError:
        raise EngineError(f"--k-list must be comma-separated integers, got {args.k_list!r}")
    results = run_benchmark(
        content,
        style,
        ks,
        repeat=args.repeat,
        content_stride=args.content_stride,
        style_stride=args.style_stride,
        epsilon=args.epsilon,
        matcher=args.matcher,
    )
    print("k\tmedian_seconds\tmin\tmax")
    for r in results:
        print(f"{r.k}\t{r.median_seconds:.6f}\t{r.min_seconds:.6f}\t{r.max_seconds:.6f}")
    if args.plot:
        from .plots import save_bench_figure

        save_bench_figure(results, args.plot)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="statswap",
        description="Feature-statistics style transfer engine over TSSF tensor files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="two-stage statistics transform of a content/style pair")
    p.add_argument("--content", required=True, help="content feature map (TSSF)")
    p.add_argument("--style", required=True, help="style feature map (TSSF)")
    p.add_argument("--out", required=True, help="output feature map (TSSF)")
    p.add_argument("--matches", default=None, help="optional patch match table (i<TAB>j<TAB>score)")
    _add_transform_options(p)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("loss", help="evaluate the loss suite over feature bundles")
    p.add_argument("--content", required=True, help="content bundle manifest")
    p.add_argument("--style", required=True, help="style bundle manifest")
    p.add_argument("--stylized", required=True, help="stylized bundle manifest")
    p.add_argument("--cc", default=None, help="bundle for the content reconstruction")
    p.add_argument("--ss", default=None, help="bundle for the style reconstruction")
    p.add_argument("--content-image", default=None, help="content image tensor (TSSF)")
    p.add_argument("--style-image", default=None, help="style image tensor (TSSF)")
    p.add_argument("--cc-image", default=None, help="content reconstruction image (TSSF)")
    p.add_argument("--ss-image", default=None, help="style reconstruction image (TSSF)")
    _add_transform_options(p)
    _add_weight_options(p)
    p.set_defaults(func=cmd_loss)

    p = sub.add_parser("attn", help="export the attention map of a feature map")
    p.add_argument("--content", required=True, help="input feature map (TSSF)")
    p.add_argument("--out", required=True, help="output attention matrix (2-d TSSF)")
    p.add_argument("--tau", type=float, default=100.0, help="attention temperature (default 100)")
    p.set_defaults(func=cmd_attn)

    p = sub.add_parser("bench", help="patch-size timing table for the transform")
    p.add_argument("--content", required=True, help="content feature map (TSSF)")
    p.add_argument("--style", required=True, help="style feature map (TSSF)")
    p.add_argument("--k-list", default="3,5,7", help="comma-separated patch sizes (default 3,5,7)")
    p.add_argument("--repeat", type=int, default=9, help="timed runs per k (default 9)")
    p.add_argument("--plot", default=None, help="also render a timing figure to this path")
    _add_transform_options(p)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
