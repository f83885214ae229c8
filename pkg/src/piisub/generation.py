"""Surrogate generation: mode routing, model proposals, text splicing.

`dispatch` is the single entry point: given one entity surface and the run
mode it produces a SurrogateDecision, calling the model only for the labels
that need semantic substitutes. Model rejections and per-call backend
failures degrade to the fake generator (recorded on the decision); only an
unhealthy backend propagates.

`blocked` carries the run-level leak guard: a set of canonicalized strings
(the corpus ground-truth values) that no surrogate may contain. Fake draws
redraw past them; an accepted model output that hits one is treated like an
identity rejection.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .backends import BackendInvocationError, SlmBackend
from .fakegen import FakeGenState, fake_value
from .locales import DateFormat, Locale, classify_date_format, classify_locale
from .model import (
    SLM_LABELS,
    Label,
    Mode,
    PiiSpan,
    RejectionReason,
    Source,
    SurrogateDecision,
    canonicalize,
    ci_contains,
)
from .pools import PoolCatalog
from .prompting import (
    DemoStrategy,
    InvalidInput,
    PoolTooSmall,
    build_prompt,
    sample_demos,
    validate_response,
)

_MAX_FAKE_REDRAWS = 64


class SpliceOverlap(ValueError):
    """Two replacement spans overlap; the splice would be ambiguous."""


def redact_placeholder(label: Label, prefix: str = "") -> str:
    return f"[{prefix}{label.name}]"


def _is_blocked(value: str, blocked: frozenset[str]) -> bool:
    return any(ci_contains(b, value) for b in blocked)


def _clean_fake_draw(
    surface: str,
    label: Label,
    locale: Locale,
    state: FakeGenState,
    blocked: frozenset[str],
    date_format: DateFormat | None,
) -> str:
    """Draw a fake value that neither echoes the input nor hits the guard."""
    for _ in range(_MAX_FAKE_REDRAWS):
        value = fake_value(label, locale, state, date_format=date_format)
        if canonicalize(value) == canonicalize(surface):
            continue
        if _is_blocked(value, blocked):
            continue
        return value
    raise RuntimeError(
        f"no clean fake value for {label.name} after {_MAX_FAKE_REDRAWS} draws"
    )


def slm_propose(
    surface: str,
    label: Label,
    *,
    backend: SlmBackend,
    catalog: PoolCatalog,
    state: FakeGenState,
    strategy: DemoStrategy = DemoStrategy.ROTATING_LOCALE,
    blocked: frozenset[str] = frozenset(),
) -> SurrogateDecision:
    """Ask the model for a surrogate, falling back to a fake value on rejection.

    The fallback reason list explains what went wrong; a pool too small to
    sample from or a failed backend call both surface as `empty` (no usable
    completion existed), a guard hit as `identity`.
    """
    locale = classify_locale(surface)
    date_format = classify_date_format(surface) if label is Label.DATE else None

    def fallback(*reasons: RejectionReason) -> SurrogateDecision:
        value = _clean_fake_draw(surface, label, locale, state, blocked, date_format)
        return SurrogateDecision(
            surrogate=value,
            source=Source.FALLBACK_FAKE,
            rejection_reasons=tuple(reasons),
        )

    try:
        if strategy is DemoStrategy.FIXED_THREE:
            demos = catalog.pilot_demos(label)
        else:
            pool = catalog.pool_for(label, surface)
            demos = sample_demos(pool.demos, surface, pool_name=pool.name)
        prompt = build_prompt(demos, surface)
    except (PoolTooSmall, InvalidInput):
        return fallback(RejectionReason.EMPTY)
    try:
        completion = backend.propose(prompt)
    except BackendInvocationError:
        return fallback(RejectionReason.EMPTY)
    value, reason = validate_response(completion, surface)
    if reason is not None:
        return fallback(reason)
    assert value is not None
    if _is_blocked(value, blocked):
        return fallback(RejectionReason.IDENTITY)
    return SurrogateDecision(
        surrogate=value,
        source=Source.SLM,
        demos_used=tuple(d.id for d in demos),
    )


def dispatch(
    surface: str,
    label: Label,
    mode: Mode,
    *,
    state: FakeGenState,
    backend: SlmBackend | None = None,
    catalog: PoolCatalog | None = None,
    strategy: DemoStrategy = DemoStrategy.ROTATING_LOCALE,
    placeholder_prefix: str = "",
    blocked: frozenset[str] = frozenset(),
) -> SurrogateDecision:
    """Produce the surrogate decision for one entity under the given mode."""
    if mode is Mode.REDACT:
        return SurrogateDecision(
            surrogate=redact_placeholder(label, placeholder_prefix),
            source=Source.REDACT,
        )
    if mode is Mode.HYBRID and label in SLM_LABELS:
        if backend is None or catalog is None:
            raise ValueError("hybrid mode needs a backend and a pool catalog")
        return slm_propose(
            surface,
            label,
            backend=backend,
            catalog=catalog,
            state=state,
            strategy=strategy,
            blocked=blocked,
        )
    locale = classify_locale(surface)
    date_format = classify_date_format(surface) if label is Label.DATE else None
    value = _clean_fake_draw(surface, label, locale, state, blocked, date_format)
    return SurrogateDecision(surrogate=value, source=Source.FAKE)


def _with_surface_whitespace(surface: str, replacement: str) -> str:
    """Re-attach the surface's own leading/trailing whitespace to the new value.

    Detectors sometimes hand back spans that swallow adjacent spaces; keeping
    those bytes outside the surrogate means the surrounding text never shifts.
    """
    stripped = surface.strip()
    if stripped == surface:
        return replacement
    if not stripped:
        return surface
    lead = surface[: len(surface) - len(surface.lstrip())]
    trail = surface[len(surface.rstrip()) :]
    return lead + replacement + trail


def splice(text: str, replacements: Iterable[tuple[PiiSpan, str]]) -> str:
    """Apply span replacements right to left, leaving all other bytes alone."""
    ordered: Sequence[tuple[PiiSpan, str]] = sorted(
        replacements, key=lambda item: (item[0].start, item[0].end)
    )
    previous_end = -1
    for span, _ in ordered:
        if span.end > len(text):
            raise ValueError(f"span {span.start}:{span.end} beyond text end")
        if text[span.start : span.end] != span.surface:
            raise ValueError(
                f"span {span.start}:{span.end} surface does not match text"
            )
        if span.start < previous_end:
            raise SpliceOverlap(f"span at {span.start} overlaps previous span")
        previous_end = span.end
    out = text
    for span, new_value in reversed(ordered):
        patched = _with_surface_whitespace(span.surface, new_value)
        out = out[: span.start] + patched + out[span.end :]
    return out
