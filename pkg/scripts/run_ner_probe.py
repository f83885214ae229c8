#!/usr/bin/env python3
"""Downstream-utility probe.

Transforms one synthetic corpus under each substitution mode, trains the
span tagger on each variant across several seeds, and evaluates every model
on the same held-out original documents. Prints the per-variant table and
all pairwise Welch comparisons.

    python3 scripts/run_ner_probe.py --n 200 --train 160 --test 40
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from piisub import CorpusRecord, Label, Mode, RunConfig, run_corpus, synth_corpus
from piisub.ner import run_ner_experiment
from piisub.report import ner_table


def transformed(records, results) -> list[CorpusRecord]:
    out = []
    for rec, doc in zip(records, results.documents):
        if doc.error is not None or doc.output is None:
            raise SystemExit(f"document {rec.id} failed: {doc.error}")
        gt: dict[Label, list[str]] = {}
        for g in doc.groups:
            values = gt.setdefault(g.group.label, [])
            if g.decision.surrogate not in values:
                values.append(g.decision.surrogate)
        out.append(
            CorpusRecord(
                id=rec.id,
                text=doc.output,
                locale=rec.locale,
                template=rec.template,
                pii_gt=gt,
            )
        )
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--train", type=int, default=160)
    ap.add_argument("--test", type=int, default=40)
    ap.add_argument("--seeds", default="11,12,13,14,15")
    ap.add_argument("--iterations", type=int, default=30)
    ap.add_argument("--out", default="results/ner.json")
    args = ap.parse_args()

    records = synth_corpus(args.n, args.seed)
    variants: dict[str, list[CorpusRecord]] = {"original": list(records)}
    for mode in (Mode.REDACT, Mode.FAKER, Mode.HYBRID):
        results = run_corpus(records, RunConfig(mode=mode))
        variants[mode.value] = transformed(records, results)

    report = run_ner_experiment(
        variants,
        train_size=args.train,
        test_size=args.test,
        seeds=[int(s) for s in args.seeds.split(",")],
        iterations=args.iterations,
    )
    payload = report.to_json_dict()
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(
        json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
    print(ner_table(payload))
    print(f"\nwrote {out}")


if __name__ == "__main__":
    main()
