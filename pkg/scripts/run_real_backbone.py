#!/usr/bin/env python3
"""Seen-vs-unseen trend check against a real external backbone.

For each UCR-style dataset found under --data-dir (FordA, FordB,
ElectricDevices, SmallKitchenAppliances, FaultDetectionA, FaultDetectionB),
estimates the dominant band, generates a probe pair, and linear-probes the
adapter-served encoder on both variants. Passes (exit 0) when seen test
MSE < unseen test MSE on at least --min-datasets datasets. Absolute values
depend on the exact checkpoint and are not checked.

Long-running and optional: needs a served pretrained model, e.g.
  --adapter-cmd "adapter serve --model moment:AutonLab/MOMENT-1-small --device cpu"
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from spectrashift import (
    ExternalEncoder,
    BridgeEndpoint,
    ProbeConfig,
    TrainConfig,
    estimate_band,
    extract_dominant,
    generate_probe_pair,
    load_corpus,
    run_probe_experiment,
)

DATASETS = (
    "FordA",
    "FordB",
    "ElectricDevices",
    "SmallKitchenAppliances",
    "FaultDetectionA",
    "FaultDetectionB",
)


def find_dataset_file(data_dir: Path, name: str) -> Path | None:
    for pattern in (f"{name}/{name}_TRAIN.tsv", f"{name}_TRAIN.tsv", f"{name}.tsv"):
        path = data_dir / pattern
        if path.exists():
            return path
    return None


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data-dir", type=Path, required=True)
    parser.add_argument("--adapter-cmd", required=True)
    parser.add_argument("--n-probe", type=int, default=1000)
    parser.add_argument("--length", type=int, default=512)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--min-datasets", type=int, default=4)
    args = parser.parse_args()

    results = {}
    for name in DATASETS:
        path = find_dataset_file(args.data_dir, name)
        if path is None:
            print(f"{name}: not found under {args.data_dir}, skipping")
            continue
        corpus = load_corpus(path, "ucr-tsv", name=name)
        profiles = [extract_dominant(s, top_k=5) for s in corpus.series]
        band = estimate_band(profiles)
        config = ProbeConfig(
            band=band, n_samples=args.n_probe, length=args.length, seed=args.seed
        )
        seen, unseen = generate_probe_pair(config)

        encoder = ExternalEncoder(BridgeEndpoint.stdio(args.adapter_cmd, timeout_ms=300000))
        try:
            report = run_probe_experiment(
                seen,
                unseen,
                encoder,
                "regression",
                TrainConfig(seed=args.seed),
                repeats=args.repeats,
            )
        finally:
            encoder.close()
        seen_mse, _ = report.summary("seen", "mse")
        unseen_mse, _ = report.summary("unseen", "mse")
        results[name] = (seen_mse, unseen_mse)
        print(
            f"{name}: seen MSE {seen_mse:.3f}  unseen MSE {unseen_mse:.3f}  "
            f"{'OK' if seen_mse < unseen_mse else 'REVERSED'}"
        )

    holding = sum(1 for s, u in results.values() if s < u)
    print(f"trend holds on {holding}/{len(results)} datasets")
    if len(results) < args.min_datasets:
        print(f"need at least {args.min_datasets} datasets, found {len(results)}")
        return 2
    return 0 if holding >= args.min_datasets else 1


if __name__ == "__main__":
    sys.exit(main())
