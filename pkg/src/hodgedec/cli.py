"""Command-line entry point.

Subcommands: decompose, betti, spectra, export-plot, inspect.  Every flag
mirrors a PipelineConfig field; --config loads a key = value file first and
explicit flags override it.  Exit codes: 0 success, 1 partial (some images
skipped), 2 fatal.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import HodgeDecError
from .pipeline import (
    PipelineConfig,
    inspect_archive,
    run_betti,
    run_decompose,
    run_export_plot,
    run_spectra,
)


def _add_config_flags(p: argparse.ArgumentParser, need_output: bool = False) -> None:
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--input", dest="input_path", help="input NPZ archive")
    if need_output:
        p.add_argument("--output", dest="output_path", help="output NPZ archive")
    p.add_argument("--split", help="MedMNIST-style split prefix (train/val/test)")
    p.add_argument("--threshold", help="segmentation threshold, or 'auto'")
    p.add_argument("--field-method", dest="field_method",
                   choices=("gradient", "flow", "channel-pair", "patch"))
    p.add_argument("--s", type=int, help="gradient forward step")
    p.add_argument("--t", type=int, help="gradient backward step")
    p.add_argument("--direction", choices=("descend", "ascend"))
    p.add_argument("--patch-edge", dest="patch_edge", type=int)
    p.add_argument("--variant", choices=("big", "hodge"))
    p.add_argument("--solver-tol", dest="solver_tol", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--degree", type=int, help="Laplacian degree for betti/spectra")
    p.add_argument("--condition", choices=("normal", "tangential"))
    p.add_argument("--count", type=int, help="eigenvalues per image (spectra)")
    p.add_argument("--plot-dir", dest="plot_dir", help="raster output directory")
    p.add_argument("--angle-encoding", dest="angle_encoding", action="store_const",
                   const=True, default=None, help="also export HSV angle rasters")


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    if args.config:
        cfg = PipelineConfig.from_file(args.config)
        base = {f: getattr(cfg, f) for f in cfg.__dataclass_fields__}
    else:
        base = {}
    for key in PipelineConfig.__dataclass_fields__:
        value = getattr(args, key, None)
        if value is not None:
            base[key] = value
    if isinstance(base.get("threshold"), str):
        t = base["threshold"]
        base["threshold"] = None if t in ("auto", "none", "") else float(t)
    return PipelineConfig(**base)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="hodgedec",
        description="Decompose grid images into curl-free, divergence-free, "
                    "and harmonic channel blocks; report spectra and Betti numbers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="decompose an archive of images")
    _add_config_flags(p, need_output=True)

    p = sub.add_parser("betti", help="per-image Betti numbers")
    _add_config_flags(p)
    p.add_argument("--report", help="write the JSON report here (default stdout)")

    p = sub.add_parser("spectra", help="per-image leading eigenvalues")
    _add_config_flags(p)
    p.add_argument("--report", help="write the JSON report here (default stdout)")

    p = sub.add_parser("export-plot", help="write per-component rasters")
    _add_config_flags(p)

    p = sub.add_parser("inspect", help="list archive keys, shapes, dtypes")
    p.add_argument("--input", dest="input_path", required=True)

    args = parser.parse_args(argv)
    try:
        if args.command == "inspect":
            print(json.dumps(inspect_archive(args.input_path), indent=1, sort_keys=True))
            return 0
        cfg = _build_config(args)
        if args.command == "decompose":
            if not cfg.input_path or not cfg.output_path:
                parser.error("decompose needs --input and --output")
            return run_decompose(cfg)
        if args.command == "betti":
            report = run_betti(cfg)
        elif args.command == "spectra":
            report = run_spectra(cfg)
        elif args.command == "export-plot":
            written = run_export_plot(cfg)
            report = {"written": written}
        text = json.dumps(report, indent=1, sort_keys=True)
        if getattr(args, "report", None):
            with open(args.report, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        else:
            print(text)
        return 0
    except (HodgeDecError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
