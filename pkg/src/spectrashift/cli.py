"""Command-line surface: analyze -> generate -> overlap / eval.

Exit codes are a stable scripting contract: 0 ok, 2 input or config
error, 3 infeasible generation, 4 bridge failure. Every invocation that
writes outputs also drops a run manifest next to them (run_manifest.json
inside output directories, <out>.run.json beside output files) recording
the command, config, input hashes, and timing.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

from . import __version__
from .dataio import load_corpus, load_probe_dataset, save_probe_dataset
from .encoders import ExternalEncoder, make_encoder
from .errors import BridgeError, InfeasibleShiftError, SpectralShiftError
from .overlap import (
    overlap_svg,
    spectral_overlap,
    summarize_corpus,
    summary_document,
    summary_from_document,
)
from .probegen import ProbeConfig, generate_probe_pair
from .probing import TrainConfig, run_probe_experiment
from .spectral import band_from_document


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_json(path: Path, doc: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(doc, sort_keys=True, indent=2))
        fh.write("\n")


def _write_run_manifest(anchor: Path, args, inputs, outputs, started: float):
    """anchor: the primary output path; directories get run_manifest.json inside."""
    config = {
        k: (str(v) if isinstance(v, Path) else v)
        for k, v in vars(args).items()
        if k != "func"
    }
    doc = {
        "version": 1,
        "command": sys.argv,
        "config": config,
        "input_hashes": {str(p): _sha256(Path(p)) for p in inputs if Path(p).is_file()},
        "outputs": [str(p) for p in outputs],
        "tool_version": __version__,
        "duration_seconds": time.perf_counter() - started,
    }
    if anchor.is_dir():
        path = anchor / "run_manifest.json"
    else:
        path = anchor.with_name(anchor.name + ".run.json")
    _write_json(path, doc)


def cmd_analyze(args) -> int:
    started = time.perf_counter()
    corpus = load_corpus(args.input, args.format, sample_rate=args.sample_rate)
    summary = summarize_corpus(
        corpus, top_k=args.top_k, bins=args.bins, band_mode=args.band
    )
    out = Path(args.out)
    _write_json(out, summary_document(summary))
    _write_run_manifest(out, args, [args.input], [out], started)
    print(
        f"analyzed {len(corpus)} series (L={corpus.length}): band "
        f"[{summary.band.low:.6g}, {summary.band.high:.6g}] -> {out}"
    )
    return 0


def cmd_generate(args) -> int:
    started = time.perf_counter()
    profile_doc = json.loads(Path(args.profile).read_text(encoding="utf-8"))
    band = band_from_document(profile_doc)
    config = ProbeConfig(
        band=band,
        n_samples=args.n,
        length=args.len,
        sinusoids=args.m,
        amplitude_range=(args.amp_min, args.amp_max),
        noise_sigma=args.noise,
        delta=args.delta,
        seed=args.seed,
        classification_mode=(
            "band-membership" if args.cls_mode == "membership" else "median-bin"
        ),
        snap_to_bins=args.snap_bins,
    )
    seen, unseen = generate_probe_pair(config)
    out = Path(args.out)
    outputs = []
    for dataset in (seen, unseen):
        manifest = save_probe_dataset(dataset, out / dataset.variant)
        outputs.append(manifest.parent)
    out.mkdir(parents=True, exist_ok=True)
    _write_run_manifest(out, args, [args.profile], outputs, started)
    delta = seen.metadata["delta"]
    print(
        f"generated {args.n} samples/variant (L={args.len}, m={args.m}, "
        f"delta={delta:.6g}) under {out}"
    )
    return 0


def cmd_overlap(args) -> int:
    started = time.perf_counter()
    summary_a = summary_from_document(json.loads(Path(args.a).read_text(encoding="utf-8")))
    summary_b = summary_from_document(json.loads(Path(args.b).read_text(encoding="utf-8")))
    report = spectral_overlap(summary_a, summary_b)
    out = Path(args.out)
    _write_json(out, report.to_json())
    outputs = [out]
    if args.plot:
        plot_path = Path(args.plot)
        plot_path.parent.mkdir(parents=True, exist_ok=True)
        svg = overlap_svg(summary_a, summary_b, Path(args.a).stem, Path(args.b).stem)
        plot_path.write_text(svg, encoding="utf-8")
        outputs.append(plot_path)
    _write_run_manifest(out, args, [args.a, args.b], outputs, started)
    print(
        f"band_iou={report.band_iou:.6g} histogram_overlap={report.histogram_overlap:.6g} "
        f"verdict={report.verdict} -> {out}"
    )
    return 0


def cmd_eval(args) -> int:
    started = time.perf_counter()
    data_dir = Path(args.data)
    seen = load_probe_dataset(data_dir / "seen")
    unseen = load_probe_dataset(data_dir / "unseen")
    encoder = make_encoder(args.encoder, seen.length, bridge_timeout_ms=args.bridge_timeout_ms)
    try:
        config = TrainConfig(
            learning_rate=args.lr,
            epochs=args.epochs,
            batch_size=args.batch_size,
            seed=args.seed,
        )
        report = run_probe_experiment(
            seen, unseen, encoder, args.task, config, repeats=args.repeats
        )
    finally:
        if isinstance(encoder, ExternalEncoder):
            encoder.close()
    out = Path(args.out)
    _write_json(out, report.to_json())
    inputs = [
        data_dir / variant / name
        for variant in ("seen", "unseen")
        for name in ("manifest.json", "train.ndjson", "val.ndjson", "test.ndjson")
    ]
    _write_run_manifest(out, args, inputs, [out], started)
    print(report.render_table())
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectrashift",
        description="Audit and stress-test frozen time-series encoders under spectral shift.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="extract a corpus spectral profile")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--format", required=True, choices=["csv-rows", "ucr-tsv", "ndjson"])
    p.add_argument("--top-k", type=int, default=5, dest="top_k")
    p.add_argument("--band", choices=["minmax", "quantile"], default="quantile")
    p.add_argument("--bins", type=int, default=64)
    p.add_argument("--sample-rate", type=float, default=None, dest="sample_rate")
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("generate", help="generate a seen/unseen probe dataset pair")
    p.add_argument("--profile", required=True, type=Path)
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--len", type=int, default=512)
    p.add_argument("--m", type=int, default=5)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--amp-min", type=float, default=0.5, dest="amp_min")
    p.add_argument("--amp-max", type=float, default=1.5, dest="amp_max")
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument(
        "--cls-mode",
        choices=["membership", "median-bin"],
        default="membership",
        dest="cls_mode",
    )
    p.add_argument("--snap-bins", action="store_true", dest="snap_bins")
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("overlap", help="compare two corpus spectral profiles")
    p.add_argument("--a", required=True, type=Path)
    p.add_argument("--b", required=True, type=Path)
    p.add_argument("--plot", type=Path, default=None)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_overlap)

    p = sub.add_parser("eval", help="linear-probe a frozen encoder on a probe pair")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--encoder", required=True)
    p.add_argument("--task", required=True, choices=["regression", "classification"])
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=64, dest="batch_size")
    p.add_argument(
        "--bridge-timeout-ms", type=int, default=30000, dest="bridge_timeout_ms"
    )
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleShiftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except BridgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (SpectralShiftError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
