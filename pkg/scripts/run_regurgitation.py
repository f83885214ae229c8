#!/usr/bin/env python3
"""Demonstration-copy study on a multilingual corpus.

Runs the hybrid pipeline twice over the same documents:

  1. fixed three demonstrations + a backend that always echoes the first
     demo's fake side (the degenerate copying setup), and
  2. rotating per-locale demonstrations + a backend that answers with one
     of the demos it was actually shown.

The second setup should show zero cross-pool copies and zero validation
failures; the first should show near-total output copying for the
non-English person pools.
"""

from __future__ import annotations

import argparse

from piisub import DemoStrategy, Mode, RunConfig, run_corpus, synth_corpus
from piisub.pipeline import regurgitation_for_results
from piisub.report import regurgitation_table


def run_one(records, strategy: DemoStrategy, backend: str) -> None:
    config = RunConfig(
        mode=Mode.HYBRID, backend_kind=backend, demo_strategy=strategy
    )
    results = run_corpus(records, config)
    report = regurgitation_for_results(results)
    print(f"=== {strategy.value} + {backend} ===")
    print(regurgitation_table(report.to_json_dict()))
    print()


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--seed", type=int, default=3)
    args = ap.parse_args()

    records = synth_corpus(args.n, args.seed)
    run_one(records, DemoStrategy.FIXED_THREE, "mock-echo-demo")
    run_one(records, DemoStrategy.ROTATING_LOCALE, "mock-pool")


if __name__ == "__main__":
    main()
