"""Downstream utility probe: a small averaged-perceptron NER tagger.

The experiment trains the same tagger on differently-transformed variants of
one corpus and always evaluates on held-out original documents, so the score
measures how much task-relevant signal each transformation keeps.

Everything is label-agnostic: entities collapse to one binary PII class for
training, and span matching at evaluation ignores the original label too.

Training annotation is weak: BIO tags are projected from the ground-truth
values (possibly surrogates) by string matching. Prediction decoding is
strict BIO: an I- tag without a matching open span is dropped rather than
repaired, so a model that never learned natural entities yields no spans at
all instead of noise spans.
"""

from __future__ import annotations

import math
import random
import re
import warnings
from dataclasses import dataclass, field
from itertools import combinations
from statistics import fmean, pstdev, stdev
from typing import Iterable, Sequence

from .detection import detect_oracle
from .metrics import DegenerateVariance, WelchResult, welch_from_samples
from .model import CorpusRecord, ci_contains

_TOKEN_RE = re.compile(r"\S+")

Span = tuple[int, int]


class UntrainableCorpus(UserWarning):
    """A training variant carries no entity tags at all."""


@dataclass(frozen=True, slots=True)
class Token:
    text: str
    start: int
    end: int


def tokenize(text: str) -> list[Token]:
    return [Token(m.group(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def annotate_from_gt(record: CorpusRecord) -> tuple[list[Token], list[str], int]:
    """Project ground-truth values onto tokens as binary-PII BIO tags.

    Values are located by case-insensitive substring search (overlaps kept
    longest-first), then collapsed to one PII class. Returns (tokens, tags,
    gaps) where gaps counts values that never occur in the text and therefore
    could not be annotated; the document is kept with its remaining spans.
    """
    gaps = sum(
        1
        for values in record.pii_gt.values()
        for value in values
        if not ci_contains(value, record.text)
    )
    spans = detect_oracle(record)
    tokens = tokenize(record.text)
    tags = ["O"] * len(tokens)
    span_idx = 0
    last_span_for: int | None = None
    for i, tok in enumerate(tokens):
        while span_idx < len(spans) and spans[span_idx].end <= tok.start:
            span_idx += 1
        if span_idx >= len(spans) or spans[span_idx].start >= tok.end:
            continue
        tags[i] = "I-PII" if last_span_for == span_idx else "B-PII"
        last_span_for = span_idx
    return tokens, tags, gaps


def _shape(word: str) -> str:
    # uncased scripts map to 'c' so CJK tokens still generalize by length
    return "".join(
        "X" if c.isupper()
        else "x" if c.islower()
        else "c" if c.isalpha()
        else "d" if c.isdigit()
        else c
        for c in word
    )


def features(words: Sequence[str], i: int, prev_tag: str) -> list[str]:
    """Token-internal features plus the previous predicted tag.

    Deliberately no neighbouring-word features: a tagger trained on redacted
    text would otherwise learn the scaffold words around placeholders and
    transfer that onto natural entities it has never seen.
    """
    w = words[i]
    lower = w.lower()
    feats = [
        "bias",
        f"w={lower}",
        f"shape={_shape(w)}",
        f"pre={lower[:3]}",
        f"suf={lower[-3:]}",
        f"prevtag={prev_tag}",
    ]
    if any(c.isdigit() for c in w):
        feats.append("hasdigit")
    if not any(c.isalnum() for c in w):
        feats.append("punctonly")
    return feats


class AveragedPerceptron:
    """Multiclass perceptron with weight averaging (lazy-update form)."""

    def __init__(self, classes: Iterable[str]) -> None:
        self.classes = sorted(set(classes))
        self._weights: dict[str, dict[str, float]] = {}
        self._totals: dict[tuple[str, str], float] = {}
        self._tstamps: dict[tuple[str, str], int] = {}
        self._updates = 0

    def predict(self, feats: Sequence[str]) -> str:
        scores = dict.fromkeys(self.classes, 0.0)
        for f in feats:
            bucket = self._weights.get(f)
            if not bucket:
                continue
            for cls, weight in bucket.items():
                scores[cls] += weight
        # iterate sorted classes: name breaks score ties deterministically
        return max(self.classes, key=lambda c: scores[c])

    def _bump(self, feature: str, cls: str, delta: float) -> None:
        key = (feature, cls)
        weight = self._weights.setdefault(feature, {}).get(cls, 0.0)
        self._totals[key] = (
            self._totals.get(key, 0.0)
            + (self._updates - self._tstamps.get(key, 0)) * weight
        )
        self._tstamps[key] = self._updates
        self._weights[feature][cls] = weight + delta

    def update(self, truth: str, guess: str, feats: Sequence[str]) -> None:
        self._updates += 1
        if truth == guess:
            return
        for f in feats:
            self._bump(f, truth, 1.0)
            self._bump(f, guess, -1.0)

    def average_weights(self) -> None:
        for feature, bucket in self._weights.items():
            for cls, weight in bucket.items():
                key = (feature, cls)
                total = self._totals.get(key, 0.0)
                total += (self._updates - self._tstamps.get(key, 0)) * weight
                bucket[cls] = total / self._updates if self._updates else 0.0


def train_tagger(
    sentences: Sequence[tuple[list[Token], list[str]]],
    *,
    iterations: int = 30,
    seed: int = 0,
) -> AveragedPerceptron:
    classes = {"O"}
    for _, tags in sentences:
        classes.update(tags)
    model = AveragedPerceptron(classes)
    rng = random.Random(seed)
    data = list(sentences)
    for _ in range(iterations):
        rng.shuffle(data)
        for tokens, tags in data:
            words = [t.text for t in tokens]
            prev = "<s>"
            for i, gold in enumerate(tags):
                feats = features(words, i, prev)
                guess = model.predict(feats)
                model.update(gold, guess, feats)
                prev = guess
    model.average_weights()
    return model


def predict_tags(model: AveragedPerceptron, tokens: Sequence[Token]) -> list[str]:
    words = [t.text for t in tokens]
    prev = "<s>"
    out: list[str] = []
    for i in range(len(words)):
        tag = model.predict(features(words, i, prev))
        out.append(tag)
        prev = tag
    return out


def decode_bio_strict(tokens: Sequence[Token], tags: Sequence[str]) -> list[Span]:
    """Char spans from binary BIO tags; orphan continuations are dropped."""
    spans: list[Span] = []
    open_span: list[int] | None = None
    for tok, tag in zip(tokens, tags):
        if tag.startswith("B-"):
            if open_span is not None:
                spans.append((open_span[0], open_span[1]))
            open_span = [tok.start, tok.end]
        elif tag.startswith("I-") and open_span is not None:
            open_span[1] = tok.end
        else:
            if open_span is not None:
                spans.append((open_span[0], open_span[1]))
            open_span = None
    if open_span is not None:
        spans.append((open_span[0], open_span[1]))
    return spans


@dataclass(frozen=True)
class SpanCounts:
    tp: int = 0
    n_pred: int = 0
    n_gold: int = 0

    def __add__(self, other: "SpanCounts") -> "SpanCounts":
        return SpanCounts(
            self.tp + other.tp,
            self.n_pred + other.n_pred,
            self.n_gold + other.n_gold,
        )

    @property
    def precision(self) -> float:
        return self.tp / self.n_pred if self.n_pred else 0.0

    @property
    def recall(self) -> float:
        return self.tp / self.n_gold if self.n_gold else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


def match_spans(gold: Sequence[Span], pred: Sequence[Span]) -> SpanCounts:
    """Greedy one-to-one label-agnostic matching, largest char overlap first."""
    pairs: list[tuple[int, int, int]] = []
    for pi, (ps, pe) in enumerate(pred):
        for gi, (gs, ge) in enumerate(gold):
            overlap = min(pe, ge) - max(ps, gs)
            if overlap > 0:
                pairs.append((-overlap, pi, gi))
    pairs.sort()
    used_pred: set[int] = set()
    used_gold: set[int] = set()
    for _, pi, gi in pairs:
        if pi in used_pred or gi in used_gold:
            continue
        used_pred.add(pi)
        used_gold.add(gi)
    return SpanCounts(tp=len(used_pred), n_pred=len(pred), n_gold=len(gold))


@dataclass
class VariantScores:
    precision_by_seed: list[float] = field(default_factory=list)
    recall_by_seed: list[float] = field(default_factory=list)
    f1_by_seed: list[float] = field(default_factory=list)
    train_spans_by_seed: list[int] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return fmean(self.f1_by_seed)

    @property
    def sd_population(self) -> float:
        return pstdev(self.f1_by_seed)

    @property
    def sd_sample(self) -> float:
        return stdev(self.f1_by_seed) if len(self.f1_by_seed) > 1 else math.nan

    def to_json_dict(self) -> dict:
        return {
            "precision_by_seed": self.precision_by_seed,
            "recall_by_seed": self.recall_by_seed,
            "f1_by_seed": self.f1_by_seed,
            "train_spans_by_seed": self.train_spans_by_seed,
            "precision_mean": fmean(self.precision_by_seed),
            "recall_mean": fmean(self.recall_by_seed),
            "mean": self.mean,
            "sd_population": self.sd_population,
            "sd_sample": self.sd_sample,
        }


@dataclass
class NerReport:
    variant_order: list[str]
    scores: dict[str, VariantScores]
    comparisons: dict[str, WelchResult | None]
    annotation_gaps: int
    train_size: int
    test_size: int
    seeds: list[int]

    def to_json_dict(self) -> dict:
        return {
            "variant_order": self.variant_order,
            "scores": {k: v.to_json_dict() for k, v in self.scores.items()},
            "comparisons": {
                k: (v.to_json_dict() if v is not None else None)
                for k, v in sorted(self.comparisons.items())
            },
            "annotation_gaps": self.annotation_gaps,
            "train_size": self.train_size,
            "test_size": self.test_size,
            "seeds": self.seeds,
        }


def stratified_split(
    records: Sequence[CorpusRecord], train_size: int, test_size: int, seed: int
) -> tuple[list[int], list[int]]:
    """Locale-stratified test selection; remainder shuffled into the train cut."""
    if train_size + test_size > len(records):
        raise ValueError(
            f"need {train_size + test_size} records, corpus has {len(records)}"
        )
    rng = random.Random(seed)
    by_locale: dict[str, list[int]] = {}
    for idx, rec in enumerate(records):
        by_locale.setdefault(rec.locale, []).append(idx)
    locales = sorted(by_locale)
    shares = {
        loc: test_size * len(by_locale[loc]) / len(records) for loc in locales
    }
    take = {loc: int(shares[loc]) for loc in locales}
    shortfall = test_size - sum(take.values())
    by_remainder = sorted(locales, key=lambda loc: (-(shares[loc] - take[loc]), loc))
    for loc in by_remainder[:shortfall]:
        take[loc] += 1
    test_idx: list[int] = []
    rest: list[int] = []
    for loc in locales:
        idxs = list(by_locale[loc])
        rng.shuffle(idxs)
        k = min(take[loc], len(idxs))
        test_idx.extend(idxs[:k])
        rest.extend(idxs[k:])
    rng.shuffle(rest)
    return sorted(rest[:train_size]), sorted(test_idx)


def run_ner_experiment(
    variants: dict[str, list[CorpusRecord]],
    *,
    original: str = "original",
    train_size: int = 160,
    test_size: int = 40,
    seeds: Sequence[int] = (11, 12, 13, 14, 15),
    iterations: int = 30,
) -> NerReport:
    """Train on each variant, test on held-out original documents, per seed."""
    if original not in variants:
        raise ValueError(f"variants must include the {original!r} corpus")
    base = variants[original]
    for name, records in variants.items():
        if len(records) != len(base) or any(
            a.id != b.id for a, b in zip(records, base)
        ):
            raise ValueError(f"variant {name!r} is not parallel to {original!r}")
    order = list(variants)
    scores = {name: VariantScores() for name in order}
    gaps = 0
    for seed in seeds:
        train_idx, test_idx = stratified_split(base, train_size, test_size, seed)
        test_records = [base[i] for i in test_idx]
        gold_by_doc = [
            [(s.start, s.end) for s in detect_oracle(rec)] for rec in test_records
        ]
        test_tokens = [tokenize(rec.text) for rec in test_records]
        for name in order:
            sentences = []
            train_spans = 0
            for i in train_idx:
                tokens, tags, rec_gaps = annotate_from_gt(variants[name][i])
                gaps += rec_gaps
                train_spans += sum(1 for t in tags if t.startswith("B-"))
                sentences.append((tokens, tags))
            if train_spans == 0:
                warnings.warn(
                    f"variant {name!r} has no entity tags in its training cut",
                    UntrainableCorpus,
                    stacklevel=2,
                )
            model = train_tagger(sentences, iterations=iterations, seed=seed)
            counts = SpanCounts()
            for tokens, gold in zip(test_tokens, gold_by_doc):
                pred = decode_bio_strict(tokens, predict_tags(model, tokens))
                counts = counts + match_spans(gold, pred)
            scores[name].precision_by_seed.append(counts.precision)
            scores[name].recall_by_seed.append(counts.recall)
            scores[name].f1_by_seed.append(counts.f1)
            scores[name].train_spans_by_seed.append(train_spans)
    comparisons: dict[str, WelchResult | None] = {}
    for a, b in combinations(order, 2):
        try:
            comparisons[f"{a}_vs_{b}"] = welch_from_samples(
                scores[a].f1_by_seed, scores[b].f1_by_seed
            )
        except DegenerateVariance:
            comparisons[f"{a}_vs_{b}"] = None
    return NerReport(
        variant_order=order,
        scores=scores,
        comparisons=comparisons,
        annotation_gaps=gaps,
        train_size=train_size,
        test_size=test_size,
        seeds=list(seeds),
    )
