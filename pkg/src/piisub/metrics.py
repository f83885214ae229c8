"""Evaluation metrics for substitution runs.

Leak detection reuses the same case-insensitive substring primitive as the
oracle detector, so "the detector found it" and "it leaked" can never
disagree about what counts as an occurrence.

Welch's test reports the usual statistic, standard error and
Welch-Satterthwaite degrees of freedom; the two-sided p-value uses the
normal approximation of the t statistic (erfc), adequate at the sample
sizes involved and dependency-free.
"""

from __future__ import annotations

import math
import statistics
import subprocess
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Sequence

from .model import Label, ci_contains, ci_occurrences


def agg_mean(values: Iterable[float | None]) -> float | None:
    """Unweighted mean over the defined values; None if nothing is defined."""
    defined = [v for v in values if v is not None]
    if not defined:
        return None
    return sum(defined) / len(defined)


@dataclass(frozen=True)
class LeakReport:
    leaked: int
    total: int
    leaked_values: tuple[str, ...] = ()

    @property
    def rate(self) -> float | None:
        if self.total == 0:
            return None
        return self.leaked / self.total

    def to_json_dict(self) -> dict:
        return {
            "leaked": self.leaked,
            "total": self.total,
            "rate": self.rate,
            "leaked_values": list(self.leaked_values),
        }


def leak_report(items: Iterable[tuple[Sequence[str], str]]) -> LeakReport:
    """Fraction of ground-truth values still present in their output text.

    `items` pairs each record's ground-truth values with its output. A value
    counts as leaked if it occurs case-insensitively anywhere in the output.
    """
    leaked = 0
    total = 0
    examples: list[str] = []
    for gt_values, output in items:
        for value in gt_values:
            total += 1
            if ci_contains(value, output):
                leaked += 1
                if len(examples) < 20:
                    examples.append(value)
    return LeakReport(leaked=leaked, total=total, leaked_values=tuple(examples))


@dataclass(frozen=True)
class ConsistencyReport:
    multi_mention_groups: int
    consistent_groups: int
    occurrence_discrepancies: int

    @property
    def rate(self) -> float | None:
        if self.multi_mention_groups == 0:
            return None
        return self.consistent_groups / self.multi_mention_groups

    def to_json_dict(self) -> dict:
        return {
            "multi_mention_groups": self.multi_mention_groups,
            "consistent_groups": self.consistent_groups,
            "occurrence_discrepancies": self.occurrence_discrepancies,
            "rate": self.rate,
        }


def consistency_report(
    items: Iterable[tuple[str, Sequence[tuple[int, Sequence[str]]]]],
) -> ConsistencyReport:
    """Same-surrogate check for entities mentioned more than once.

    `items` pairs each output text with its groups as (mention_count,
    per-mention surrogates). A multi-mention group is consistent when every
    mention received the same surrogate. As a cross-check, the surrogate must
    occur in the output at least as often as the mention count; shortfalls
    are counted as discrepancies without affecting the rate.
    """
    groups = 0
    consistent = 0
    discrepancies = 0
    for output, group_rows in items:
        for mention_count, surrogates in group_rows:
            if mention_count < 2:
                continue
            groups += 1
            distinct = set(surrogates)
            if len(distinct) == 1:
                consistent += 1
                surrogate = next(iter(distinct))
                occurrences = sum(1 for _ in ci_occurrences(surrogate, output))
                if occurrences < mention_count:
                    discrepancies += 1
    return ConsistencyReport(
        multi_mention_groups=groups,
        consistent_groups=consistent,
        occurrence_discrepancies=discrepancies,
    )


def length_preservation(input_text: str, output_text: str) -> float | None:
    """1 minus the relative length change; None for empty input."""
    if not input_text:
        return None
    return 1.0 - abs(len(output_text) - len(input_text)) / len(input_text)


def round_display(x: float) -> float:
    """Two-stage presentation rounding: 3 significant figures, then 3 decimals.

    Both stages round half up. Matches how the reference tables were
    produced; plain 3-decimal rounding disagrees on values like 10/274.
    """
    if x == 0:
        return 0.0
    d = Decimal(str(x))
    exponent = d.adjusted()
    sig = d.quantize(Decimal(1).scaleb(exponent - 2), rounding=ROUND_HALF_UP)
    return float(sig.quantize(Decimal("0.001"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class DistinctnessRow:
    label: Label
    mentions: int
    unique_surrogates: int

    @property
    def ttr(self) -> float | None:
        if self.mentions == 0:
            return None
        return self.unique_surrogates / self.mentions

    @property
    def ttr_display(self) -> float | None:
        ttr = self.ttr
        return None if ttr is None else round_display(ttr)

    def to_json_dict(self) -> dict:
        return {
            "label": self.label.name,
            "mentions": self.mentions,
            "unique_surrogates": self.unique_surrogates,
            "ttr": self.ttr,
            "ttr_display": self.ttr_display,
        }


def distinctness_rows(
    entities: Iterable[tuple[Label, str, int]],
) -> list[DistinctnessRow]:
    """Per-label mention counts, distinct surrogates and type-token ratio.

    `entities` supplies (label, surrogate, mention_count) per entity group.
    """
    mentions: dict[Label, int] = {}
    uniques: dict[Label, set[str]] = {}
    for label, surrogate, count in entities:
        mentions[label] = mentions.get(label, 0) + count
        uniques.setdefault(label, set()).add(surrogate)
    return [
        DistinctnessRow(
            label=label,
            mentions=mentions[label],
            unique_surrogates=len(uniques[label]),
        )
        for label in sorted(mentions, key=lambda lb: lb.name)
    ]


class DegenerateVariance(ValueError):
    """Both samples have zero variance; the statistic is undefined."""


@dataclass(frozen=True)
class WelchResult:
    mean_diff: float
    se: float
    t: float
    dof: float
    p: float

    def to_json_dict(self) -> dict:
        return {
            "mean_diff": self.mean_diff,
            "se": self.se,
            "t": self.t,
            "dof": self.dof,
            "p": self.p,
        }


def sample_sd_from_population(pop_sd: float, n: int) -> float:
    """Convert a population SD to the sample (n-1) convention."""
    if n < 2:
        raise ValueError("need n >= 2 to form a sample SD")
    return pop_sd * math.sqrt(n / (n - 1))


def welch_from_stats(
    mean_a: float, sd_a: float, n_a: int, mean_b: float, sd_b: float, n_b: int
) -> WelchResult:
    """Welch's unequal-variance test from summary statistics.

    SDs are taken as given (no ddof adjustment); feed sample SDs for the
    textbook test, or population SDs to reproduce tables computed that way.
    """
    if n_a < 2 or n_b < 2:
        raise ValueError("need n >= 2 in both groups")
    va = sd_a * sd_a / n_a
    vb = sd_b * sd_b / n_b
    se = math.sqrt(va + vb)
    if se == 0.0:
        raise DegenerateVariance("zero variance in both groups")
    t = (mean_a - mean_b) / se
    dof = (va + vb) ** 2 / (va * va / (n_a - 1) + vb * vb / (n_b - 1))
    p = math.erfc(abs(t) / math.sqrt(2))
    return WelchResult(mean_diff=mean_a - mean_b, se=se, t=t, dof=dof, p=p)


def welch_from_samples(xs: Sequence[float], ys: Sequence[float]) -> WelchResult:
    """Welch's test from raw samples, using sample (n-1) SDs."""
    if len(xs) < 2 or len(ys) < 2:
        raise ValueError("need at least 2 observations per group")
    return welch_from_stats(
        statistics.fmean(xs),
        statistics.stdev(xs),
        len(xs),
        statistics.fmean(ys),
        statistics.stdev(ys),
        len(ys),
    )


class ExternalScorerError(RuntimeError):
    """External perplexity command failed or returned a non-number."""


class CharNgramScorer:
    """Character n-gram perplexity with add-one smoothing.

    Contexts reset at chunk boundaries; texts are scored in fixed-size
    chunks so pathological lengths cannot skew a single context chain.
    """

    def __init__(self, order: int = 5, chunk_size: int = 1024) -> None:
        if order < 1:
            raise ValueError("order must be >= 1")
        self.order = order
        self.chunk_size = chunk_size
        self._counts: dict[str, dict[str, int]] = {}
        self._context_totals: dict[str, int] = {}
        self._vocab: set[str] = set()

    def train(self, texts: Iterable[str]) -> None:
        ctx_len = self.order - 1
        for text in texts:
            for chunk in self._chunks(text):
                for i, ch in enumerate(chunk):
                    self._vocab.add(ch)
                    ctx = chunk[max(0, i - ctx_len) : i]
                    bucket = self._counts.setdefault(ctx, {})
                    bucket[ch] = bucket.get(ch, 0) + 1
                    self._context_totals[ctx] = self._context_totals.get(ctx, 0) + 1

    def _chunks(self, text: str) -> Iterable[str]:
        for i in range(0, len(text), self.chunk_size):
            yield text[i : i + self.chunk_size]

    def _nll_and_chars(self, text: str) -> tuple[float, int]:
        if not self._vocab:
            raise ValueError("scorer has not been trained")
        ctx_len = self.order - 1
        vocab_size = len(self._vocab)
        total = 0.0
        chars = 0
        for chunk in self._chunks(text):
            for i, ch in enumerate(chunk):
                ctx = chunk[max(0, i - ctx_len) : i]
                count = self._counts.get(ctx, {}).get(ch, 0)
                denom = self._context_totals.get(ctx, 0) + vocab_size
                total += -math.log((count + 1) / denom)
                chars += 1
        return total, chars

    def perplexity(self, text: str) -> float | None:
        """exp of the mean per-character negative log likelihood."""
        nll, chars = self._nll_and_chars(text)
        if chars == 0:
            return None
        return math.exp(nll / chars)

    def corpus_perplexity(self, texts: Iterable[str]) -> float | None:
        total = 0.0
        chars = 0
        for text in texts:
            nll, n = self._nll_and_chars(text)
            total += nll
            chars += n
        if chars == 0:
            return None
        return math.exp(total / chars)


class ExternalScorer:
    """Scores text by piping it to a command that prints one number."""

    def __init__(self, command: Sequence[str], timeout: float = 60.0) -> None:
        if not command:
            raise ValueError("empty scorer command")
        self._command = list(command)
        self._timeout = timeout

    def perplexity(self, text: str) -> float:
        try:
            proc = subprocess.run(
                self._command,
                input=text,
                capture_output=True,
                text=True,
                timeout=self._timeout,
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise ExternalScorerError(str(exc)) from exc
        if proc.returncode != 0:
            raise ExternalScorerError(f"scorer exit {proc.returncode}")
        try:
            return float(proc.stdout.strip().splitlines()[0])
        except (IndexError, ValueError) as exc:
            raise ExternalScorerError(
                f"scorer output not a number: {proc.stdout!r}"
            ) from exc
