#!/usr/bin/env python3
"""Desk-scale mode comparison: synthesize a corpus, run all three
substitution modes over it, and print the privacy/consistency and
distinctness tables side by side.

    python3 scripts/run_modes.py --n 120 --seed 7 --out results/modes
"""

from __future__ import annotations

import argparse
from pathlib import Path

from piisub import Mode, RunConfig, compute_metrics, persist_run, run_corpus, synth_corpus
from piisub.report import distinctness_table, primary_table


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=120)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", default="results/modes")
    ap.add_argument("--ppl", action="store_true", help="include char-ngram perplexity")
    args = ap.parse_args()

    records = synth_corpus(args.n, args.seed)
    metrics_by_mode: dict[str, dict] = {}
    for mode in (Mode.REDACT, Mode.FAKER, Mode.HYBRID):
        results = run_corpus(records, RunConfig(mode=mode))
        metrics = compute_metrics(results, with_perplexity=args.ppl)
        run_dir = persist_run(results, args.out, metrics=metrics, with_perplexity=args.ppl)
        metrics_by_mode[mode.value] = metrics.to_json_dict()
        print(f"{mode.value}: run {results.run_id} -> {run_dir}")

    print()
    print(primary_table(metrics_by_mode))
    print()
    print(distinctness_table(metrics_by_mode))
    print(f"\nartifacts under {Path(args.out).resolve()}")


if __name__ == "__main__":
    main()
