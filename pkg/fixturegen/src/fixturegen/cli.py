"""Command-line front end: one image in, one TSSF bundle out."""

from __future__ import annotations

import argparse
import sys

from .extract import CANONICAL_LAYERS, ExtractionSpec, extract_features


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fixture-gen",
        description="Extract VGG-19 relu*_1 feature maps from an image as a TSSF bundle.",
    )
    parser.add_argument("--image", required=True, help="input image path")
    parser.add_argument("--out", required=True, help="output bundle directory")
    parser.add_argument(
        "--layers",
        default=",".join(CANONICAL_LAYERS),
        help="comma-separated layer names (default: all five relu*_1)",
    )
    parser.add_argument(
        "--weights",
        default=None,
        help="local VGG-19 state dict; defaults to the torchvision pretrained weights",
    )
    parser.add_argument("--resize", type=int, default=512, help="smallest-side resize (default 512)")
    parser.add_argument("--crop", type=int, default=256, help="centre-crop size (default 256)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    layers = tuple(name.strip() for name in args.layers.split(",") if name.strip())
    try:
        spec = ExtractionSpec(
            image_path=args.image,
            out_dir=args.out,
            layers=layers,
            resize_to=args.resize,
            crop_to=args.crop,
            weights_path=args.weights,
        )
        manifest = extract_features(spec)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1
    print(manifest)
    return 0


if __name__ == "__main__":
    sys.exit(main())
