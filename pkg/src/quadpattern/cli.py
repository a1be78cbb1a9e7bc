"""Command line harness: ``extract``, ``benchmark``, ``analyze`` and ``export``.

Exit codes: 0 success, 1 runtime or data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import analysis
from .baselines import DESCRIPTORS, REFERENCE_ONLY, get_descriptor
from .benchmark import BenchmarkConfig, run_benchmark
from .dataset import (
    CacheError,
    DatasetError,
    extract_all,
    load_cache,
    save_cache,
    scan_dataset,
    scan_feret,
)
from .imaging import DimensionError, ImageDecodeError, load_image
from .metrics import K_RULES, PUBLISHED_CSQP, REFERENCE_BAND, reference_comparison

log = logging.getLogger("quadpattern")


class UsageError(Exception):
    pass


def _crop(text: str) -> tuple[int, int, int, int]:
    try:
        x, y, w, h = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"crop must be x,y,w,h integers, got {text!r}")
    if w <= 0 or h <= 0 or x < 0 or y < 0:
        raise argparse.ArgumentTypeError(f"invalid crop rectangle {text!r}")
    return x, y, w, h


def _k_rule(text: str):
    if text in K_RULES:
        return text
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"K rule must be one of {K_RULES} or an integer")
    if k < 1:
        raise argparse.ArgumentTypeError("K must be positive")
    return k


def _non_negative(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _add_dataset_args(p: argparse.ArgumentParser, required: bool = True):
    p.add_argument("--dataset", type=Path, required=required, help="root/<class>/<image> tree")
    p.add_argument(
        "--layout",
        choices=("dirs", "feret"),
        default="dirs",
        help="class from subdirectory (default) or from Color FERET file names",
    )
    p.add_argument("--poses", help="FERET pose codes to keep, comma separated (default all)")


def _scan(args):
    if args.layout == "feret":
        poses = args.poses.split(",") if args.poses else None
        return scan_feret(args.dataset, poses)
    return scan_dataset(args.dataset)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quadpattern", description="CSQP and baseline local pattern descriptors"
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    names = sorted(DESCRIPTORS)

    p = sub.add_parser("extract", help="describe every image of a dataset into a cache file")
    p.add_argument("--descriptor", choices=names, default="csqp")
    _add_dataset_args(p)
    p.add_argument("--out", type=Path, required=True, help="cache file to write")
    p.add_argument("--csltp-threshold", type=_non_negative, default=5)
    p.add_argument("--raw", action="store_true", help="record raw-count matching mode")
    p.add_argument("--jobs", type=_positive, default=1)
    p.add_argument("--skip-report", type=Path, help="JSON file listing skipped images")

    p = sub.add_parser("benchmark", help="leave-one-out retrieval and recognition")
    p.add_argument("--descriptor", choices=names, default="csqp")
    _add_dataset_args(p, required=False)
    p.add_argument("--cache", type=Path, help="feature cache to read, or to create if missing")
    p.add_argument("--refresh", action="store_true", help="rebuild the cache even if present")
    p.add_argument("--out-dir", type=Path, default=Path("."), help="where reports are written")
    p.add_argument("--n-max", type=_positive, default=10, help="largest retrieval cutoff")
    p.add_argument("--r-max", type=_positive, help="largest CMC rank (default: gallery size)")
    p.add_argument("--k-rule", type=_k_rule, default="max_class", help="ANMRR K policy")
    p.add_argument("--raw", action="store_true", help="chi-square on raw counts")
    p.add_argument("--csltp-threshold", type=_non_negative, default=5)
    p.add_argument("--jobs", type=_positive, default=1)
    p.add_argument(
        "--reference",
        choices=sorted(PUBLISHED_CSQP),
        help="add published CSQP figures for this database to the summary",
    )

    p = sub.add_parser("analyze", help="average feature entropy per descriptor")
    _add_dataset_args(p)
    p.add_argument("--descriptors", default="csqp,lbp,cslbp", help="comma separated names")
    p.add_argument("--csltp-threshold", type=_non_negative, default=5)
    p.add_argument("--out", type=Path, help="CSV file (default stdout)")

    p = sub.add_parser("export", help="write a feature image and/or a left/right difference histogram")
    p.add_argument("--image", type=Path, required=True)
    p.add_argument("--descriptor", choices=names, default="csqp")
    p.add_argument("--out", type=Path, help="feature image file (.pgm or .png)")
    p.add_argument("--crop", type=_crop, action="append", default=[], help="x,y,w,h")
    p.add_argument("--diff", action="store_true", help="difference histogram of two crops")
    p.add_argument("--no-mirror", action="store_true", help="do not mirror the second crop")
    p.add_argument("--csltp-threshold", type=_non_negative, default=5)
    return parser


def cmd_extract(args) -> int:
    ds = _scan(args)
    spec = get_descriptor(args.descriptor, args.csltp_threshold)
    cache = extract_all(ds, spec, jobs=args.jobs, normalized=not args.raw)
    save_cache(cache, args.out)
    if args.skip_report:
        args.skip_report.write_text(json.dumps(cache.skipped, indent=2, sort_keys=True) + "\n")
    print(f"items: {len(ds)}  encoded: {len(cache)}  skipped: {len(cache.skipped)}")
    print(f"wrote {args.out}")
    return 0


def _obtain_cache(args, spec):
    if args.dataset is None and args.cache is None:
        raise UsageError("benchmark needs --dataset or --cache")
    ds = _scan(args) if args.dataset is not None else None
    cache_path = args.cache
    if cache_path is None:
        cache_path = args.out_dir / f"{spec.tag}.qpfc"
    if cache_path.exists() and not args.refresh:
        return load_cache(
            cache_path,
            descriptor_id=spec.tag,
            bins=spec.bins,
            fingerprint=None if ds is None else ds.fingerprint(),
        )
    if ds is None:
        raise DatasetError(f"cache {cache_path} does not exist and no --dataset given")
    cache = extract_all(ds, spec, jobs=args.jobs, normalized=not args.raw)
    cache_path.parent.mkdir(parents=True, exist_ok=True)
    save_cache(cache, cache_path)
    return cache


def _summary_text(config: dict, result, reference: Optional[dict]) -> str:
    ret, rec = result.retrieval, result.recognition
    lines = ["# run configuration"]
    lines += [f"{k}: {v}" for k, v in config.items()]
    lines += [
        "",
        "# results",
        f"items: {result.n_items}",
        f"probes evaluated: {rec.total_probes}  excluded (singleton class): {len(rec.excluded)}",
        f"recognition rate: {rec.recognition_rate:.4f}%  ({rec.matches}/{rec.total_probes})",
        f"ANMRR ({ret.k_rule}): {ret.anmrr:.6f}",
        f"max ARP: {100 * max(ret.arp):.4f}%  max ARR: {100 * max(ret.arr):.4f}%",
        f"F-score (class averaged) at n={ret.n_max}: {100 * ret.fscore[-1]:.4f}%",
        f"F-score (from ARP/ARR) at n={ret.n_max}: {100 * ret.fscore_global[-1]:.4f}%",
    ]
    if reference:
        lines += ["", f"# published CSQP figures, advisory band +/-{REFERENCE_BAND}%"]
        for key, row in reference.items():
            flag = "within" if row["within_band"] else "outside"
            lines.append(f"{key}: run {row['run']:.4f}  reference {row['reference']}  ({flag})")
    return "\n".join(lines) + "\n"


def cmd_benchmark(args) -> int:
    spec = get_descriptor(args.descriptor, args.csltp_threshold)
    config = BenchmarkConfig(
        descriptor=spec.tag,
        normalize=not args.raw,
        k_rule=args.k_rule,
        n_max=args.n_max,
        csltp_threshold=args.csltp_threshold,
        r_max=args.r_max,
    )
    cache = _obtain_cache(args, spec)
    result = run_benchmark(cache, config, jobs=args.jobs)
    echo = {
        "descriptor": spec.tag,
        "dataset": None if args.dataset is None else str(args.dataset),
        "dataset_fingerprint": cache.fingerprint,
        "normalization": "l1" if config.normalize else "raw",
        "anmrr_k_rule": str(config.k_rule),
        "n_max": result.n_max_used,
        "csltp_threshold": config.csltp_threshold,
        "protocol": "leave-one-out",
    }
    reference = None
    if args.reference:
        reference = reference_comparison(result.retrieval, args.reference)
    ret, rec = result.retrieval, result.recognition
    payload = {
        "config": echo,
        "anmrr": ret.anmrr,
        "recognition_rate": rec.recognition_rate,
        "matches": rec.matches,
        "total_probes": rec.total_probes,
        "cmc": rec.cmc,
        "fscore_global": ret.fscore_global,
        "excluded_probes": rec.excluded,
        "skipped_images": cache.skipped,
    }
    if reference:
        payload["reference"] = {"database": args.reference, "band": REFERENCE_BAND, **reference}
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "retrieval.csv").write_text(ret.to_csv())
    (out / "recognition.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    summary = _summary_text(echo, result, reference)
    (out / "summary.txt").write_text(summary)
    print(summary, end="")
    return 0


def cmd_analyze(args) -> int:
    names = [n.strip().lower() for n in args.descriptors.split(",") if n.strip()]
    for n in names:
        if n not in DESCRIPTORS and n not in REFERENCE_ONLY:
            raise UsageError(f"unknown descriptor {n!r}")
    specs = [
        n if n in REFERENCE_ONLY else get_descriptor(n, args.csltp_threshold) for n in names
    ]
    ds = _scan(args)
    report = analysis.average_entropy(ds.paths, specs)
    text = report.to_csv()
    if args.out:
        args.out.write_text(text)
    else:
        print(text, end="")
    return 0


def cmd_export(args) -> int:
    if args.out is None and not args.diff:
        raise UsageError("export needs --out, --diff, or both")
    if args.diff and len(args.crop) != 2:
        raise UsageError("--diff needs exactly two --crop rectangles")
    spec = get_descriptor(args.descriptor, args.csltp_threshold)
    img = load_image(args.image)
    if args.out is not None:
        source = img.crop(*args.crop[0]) if len(args.crop) == 1 else img
        analysis.export_feature_image(source, spec, args.out)
        fi = spec.feature_image(source)
        print(f"wrote {args.out} ({fi.height}x{fi.width} {spec.tag} feature image)")
    if args.diff:
        left, right = (img.crop(*c) for c in args.crop)
        mirror = not args.no_mirror
        for normalize in (False, True):
            dh = analysis.symmetry_variance(left, right, spec, mirror=mirror, normalize=normalize)
            mode = "normalized" if normalize else "raw"
            print(f"{spec.tag} difference histogram variance ({mode}): {dh.variance:.6g}")
    return 0


COMMANDS = {
    "extract": cmd_extract,
    "benchmark": cmd_benchmark,
    "analyze": cmd_analyze,
    "export": cmd_export,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except (
        DatasetError,
        CacheError,
        ImageDecodeError,
        DimensionError,
        FileNotFoundError,
        NotImplementedError,
        OSError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
