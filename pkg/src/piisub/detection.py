"""Detectors producing non-overlapping PII spans from documents.

Three backends share one output contract (sorted, non-overlapping, in-bounds,
surface-consistent spans): a ground-truth oracle, a pattern-rule detector for
high-regularity labels, and an adapter for an external detector process or
endpoint.
"""

from __future__ import annotations

import json
import re
import shlex
import subprocess
import threading
import urllib.error
import urllib.request
from dataclasses import dataclass, field

from .model import CorpusRecord, Label, PiiSpan, ci_occurrences


class DetectorUnavailable(RuntimeError):
    """The external detector process or endpoint failed to respond."""


class DetectorProtocolError(ValueError):
    """The external detector responded outside the span protocol."""


@dataclass(frozen=True, slots=True)
class TaggedToken:
    """A tokenizer output token carrying a BIOES tag ("O" or "{B|I|E|S}-{LABEL}")."""

    text: str
    start: int
    end: int
    tag: str


def _parse_tag(tag: str) -> tuple[str, Label | None]:
    if tag == "O":
        return "O", None
    prefix, _, name = tag.partition("-")
    if prefix not in ("B", "I", "E", "S") or not name:
        raise ValueError(f"malformed BIOES tag {tag!r}")
    return prefix, Label.from_name(name)


def _span_from_tokens(tokens: list[TaggedToken], label: Label) -> PiiSpan:
    # Inter-token gaps are reconstructed as spaces; tokenizers split on
    # whitespace, so this matches the source text wherever it matters.
    parts: list[str] = []
    for i, tok in enumerate(tokens):
        if i:
            parts.append(" " * (tok.start - tokens[i - 1].end))
        parts.append(tok.text)
    return PiiSpan(tokens[0].start, tokens[-1].end, label, "".join(parts))


def decode_bioes(tokens: list[TaggedToken]) -> list[PiiSpan]:
    """Decode BIOES token tags into character spans.

    Malformed sequences are repaired rather than rejected: an orphan I starts
    a new span, an orphan E emits a single-token span, and a span left open
    at a boundary is closed at the last token seen. Detectors are noisy; the
    decoder must accept whatever they emit.
    """
    spans: list[PiiSpan] = []
    open_label: Label | None = None
    open_tokens: list[TaggedToken] = []
    last_end = -1

    def close() -> None:
        nonlocal open_label
        if open_label is not None:
            spans.append(_span_from_tokens(open_tokens, open_label))
        open_label = None
        open_tokens.clear()

    for tok in tokens:
        if tok.start < last_end:
            raise ValueError("tokens must be ordered with increasing offsets")
        last_end = tok.end
        prefix, label = _parse_tag(tok.tag)
        if prefix == "O" or label is None:
            close()
        elif prefix == "B":
            close()
            open_label = label
            open_tokens.append(tok)
        elif prefix == "S":
            close()
            spans.append(_span_from_tokens([tok], label))
        elif prefix == "I":
            if open_label is label:
                open_tokens.append(tok)
            else:
                close()
                open_label = label
                open_tokens.append(tok)
        else:  # "E"
            if open_label is label:
                open_tokens.append(tok)
                close()
            else:
                close()
                spans.append(_span_from_tokens([tok], label))
    close()
    return spans


def encode_bioes(text: str, spans: list[PiiSpan]) -> list[TaggedToken]:
    """Tag the whitespace tokens of text with BIOES for the given spans.

    Inverse of decode_bioes for spans that align with token boundaries;
    raises ValueError when a span boundary falls inside a token.
    """
    ordered = sorted(spans, key=lambda s: s.start)
    tokens = [(m.group(), m.start(), m.end()) for m in re.finditer(r"\S+", text)]
    tagged: list[TaggedToken] = []
    for word, start, end in tokens:
        covering = [s for s in ordered if s.start < end and start < s.end]
        if not covering:
            tagged.append(TaggedToken(word, start, end, "O"))
            continue
        span = covering[0]
        if len(covering) > 1 or start < span.start or end > span.end:
            raise ValueError("span boundaries must align with token boundaries")
        first = start == span.start or not text[span.start:start].strip()
        last = end == span.end or not text[end:span.end].strip()
        if first and last:
            prefix = "S"
        elif first:
            prefix = "B"
        elif last:
            prefix = "E"
        else:
            prefix = "I"
        tagged.append(TaggedToken(word, start, end, f"{prefix}-{span.label.name}"))
    return tagged


def validate_spans(text: str, spans: list[PiiSpan]) -> list[PiiSpan]:
    """Assert the shared detector post-condition; returns the spans unchanged."""
    prev_end = 0
    for span in spans:
        if span.start < prev_end:
            raise ValueError(f"spans overlap or are unsorted at {span.start}")
        if span.end > len(text):
            raise ValueError(f"span [{span.start}, {span.end}) exceeds document length")
        if text[span.start:span.end] != span.surface:
            raise ValueError(f"span surface mismatch at [{span.start}, {span.end})")
        prev_end = span.end
    return spans


def resolve_overlaps(candidates: list[PiiSpan]) -> list[PiiSpan]:
    """Greedy non-overlap selection: longest first, then leftmost, then label order."""
    order = {label: i for i, label in enumerate(Label)}
    unique = {(s.start, s.end, s.label): s for s in candidates}
    kept: list[PiiSpan] = []
    for span in sorted(
        unique.values(),
        key=lambda s: (s.start - s.end, s.start, order[s.label]),
    ):
        if all(span.end <= k.start or k.end <= span.start for k in kept):
            kept.append(span)
    kept.sort(key=lambda s: s.start)
    return kept


def detect_oracle(record: CorpusRecord) -> list[PiiSpan]:
    """Detect every case-insensitive occurrence of every ground-truth value."""
    candidates: list[PiiSpan] = []
    for label in Label:
        for value in record.pii_gt.get(label, ()):
            for start, end in ci_occurrences(value, record.text):
                candidates.append(PiiSpan(start, end, label, record.text[start:end]))
    return validate_spans(record.text, resolve_overlaps(candidates))


_RULES: list[tuple[Label, re.Pattern[str]]] = [
    (Label.EMAIL, re.compile(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}")),
    (Label.URL, re.compile(r"https?://\S+")),
    (Label.DATE, re.compile(r"(?<!\d)\d{1,2}-[A-Za-z]{3}-\d{4}(?!\d)")),
    (Label.DATE, re.compile(r"(?<!\d)\d{4}-\d{1,2}-\d{1,2}(?!\d)")),
    (Label.DATE, re.compile(r"(?<!\d)\d{1,2}/\d{1,2}/\d{4}(?!\d)")),
    (
        Label.PHONE,
        re.compile(r"(?<!\d)\+?\(?\d{1,4}\)?(?:[-.\s]\(?\d{1,4}\)?){1,5}(?!\d)"),
    ),
    (Label.ACCOUNT, re.compile(r"(?<!\d)\d{8,}(?!\d)")),
]

_URL_TRAIL = ".,;:!?)'\""


def detect_rules(text: str) -> list[PiiSpan]:
    """Pattern detector for the high-regularity labels.

    Covers EMAIL, URL, DATE (four surface formats), PHONE (7+ digits with
    separators), and ACCOUNT (8+ digit runs). Name-like labels need the
    oracle or an external detector.
    """
    candidates: list[PiiSpan] = []
    for label, pattern in _RULES:
        for m in pattern.finditer(text):
            start, end = m.span()
            if label is Label.URL:
                while end > start and text[end - 1] in _URL_TRAIL:
                    end -= 1
            if label is Label.PHONE:
                digits = sum(c.isdigit() for c in m.group())
                if not 7 <= digits <= 15:
                    continue
            if end > start:
                candidates.append(PiiSpan(start, end, label, text[start:end]))
    return validate_spans(text, resolve_overlaps(candidates))


@dataclass
class ExternalDetector:
    """Adapter for an out-of-process detector.

    The document text is sent as UTF-8, either on stdin of ``command`` or as
    the POST body to ``url``. The response is line-delimited: one JSON object
    per line with integer ``start``/``end`` character offsets and a ``label``
    name. Transport failures raise DetectorUnavailable; anything unparseable,
    out of bounds, or mislabeled raises DetectorProtocolError. A detector
    that finds nothing must still answer (with no span lines); silence is an
    error, never an empty result.
    """

    command: str | None = None
    url: str | None = None
    timeout: float = 30.0
    max_inflight: int = 1
    _gate: threading.Semaphore = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if bool(self.command) == bool(self.url):
            raise ValueError("configure exactly one of command or url")
        self._gate = threading.Semaphore(max(1, self.max_inflight))

    def _transport(self, text: str) -> str:
        if self.command:
            try:
                proc = subprocess.run(
                    shlex.split(self.command),
                    input=text.encode("utf-8"),
                    capture_output=True,
                    timeout=self.timeout,
                )
            except (OSError, subprocess.TimeoutExpired) as exc:
                raise DetectorUnavailable(f"detector command failed: {exc}") from exc
            if proc.returncode != 0:
                raise DetectorUnavailable(
                    f"detector command exited {proc.returncode}"
                )
            return proc.stdout.decode("utf-8")
        assert self.url is not None
        req = urllib.request.Request(
            self.url, data=text.encode("utf-8"), method="POST"
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                return resp.read().decode("utf-8")
        except (urllib.error.URLError, OSError, TimeoutError) as exc:
            raise DetectorUnavailable(f"detector endpoint failed: {exc}") from exc

    def detect(self, text: str) -> list[PiiSpan]:
        with self._gate:
            body = self._transport(text)
        candidates: list[PiiSpan] = []
        for line_no, line in enumerate(body.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                entry = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DetectorProtocolError(
                    f"line {line_no}: not valid JSON: {exc}"
                ) from exc
            if not isinstance(entry, dict):
                raise DetectorProtocolError(f"line {line_no}: expected an object")
            try:
                start, end = entry["start"], entry["end"]
                label = Label.from_name(entry["label"])
            except (KeyError, TypeError, ValueError) as exc:
                raise DetectorProtocolError(f"line {line_no}: {exc}") from exc
            if not (isinstance(start, int) and isinstance(end, int)):
                raise DetectorProtocolError(f"line {line_no}: offsets must be integers")
            if not (0 <= start < end <= len(text)):
                raise DetectorProtocolError(
                    f"line {line_no}: span [{start}, {end}) out of bounds"
                )
            candidates.append(PiiSpan(start, end, label, text[start:end]))
        return validate_spans(text, resolve_overlaps(candidates))


def detect_external(text: str, adapter: ExternalDetector) -> list[PiiSpan]:
    """Run the configured external detector on one document."""
    return adapter.detect(text)
