"""End-to-end corpus runs: detect, resolve, substitute, splice, measure.

A run is identified by a short hash over its configuration and the corpus
fingerprint, so rerunning the same setup lands in the same directory with
byte-identical result files. Wall-clock timings are written to their own
file and never into the compared artifacts.

The leak guard is corpus-level: every ground-truth value in the input corpus
is blocked as a substring for every surrogate, no matter which document it
came from. Entity substitution itself cannot reintroduce someone else's PII.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .backends import (
    DEFAULT_FAILURE_THRESHOLD,
    DEFAULT_TIMEOUT,
    BackendUnhealthy,
    SlmBackend,
    make_backend,
)
from .cache import SurrogateCache, decision_to_json_dict, resolve_entities
from .detection import (
    DetectorProtocolError,
    DetectorUnavailable,
    ExternalDetector,
    detect_external,
    detect_oracle,
    detect_rules,
)
from .fakegen import FakeGenState, StreamPolicy
from .generation import dispatch, splice
from .metrics import (
    ConsistencyReport,
    LeakReport,
    agg_mean,
    consistency_report,
    distinctness_rows,
    leak_report,
    length_preservation,
)
from .model import CacheKey, CorpusRecord, EntityGroup, Mode, SurrogateDecision
from .pools import PoolCatalog, builtin_catalog, load_pool_file
from .prompting import DemoStrategy, analyze_regurgitation

RESULTS_VERSION = 1


@dataclass(frozen=True)
class RunConfig:
    mode: Mode
    backend_kind: str = "mock-pool"
    backend_command: str | None = None
    prompt_via: str = "arg"
    backend_timeout: float = DEFAULT_TIMEOUT
    failure_threshold: int = DEFAULT_FAILURE_THRESHOLD
    max_inflight: int = 1
    demo_strategy: DemoStrategy = DemoStrategy.ROTATING_LOCALE
    placeholder_prefix: str = ""
    stream_policy: StreamPolicy = StreamPolicy.PER_DOCUMENT
    detector: str = "oracle"
    detector_command: str | None = None
    detector_url: str | None = None
    detector_timeout: float = 30.0
    pool_file: str | None = None
    leak_guard: bool = True
    parallelism: int = 1
    run_id: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "backend_kind": self.backend_kind,
            "backend_command": self.backend_command,
            "prompt_via": self.prompt_via,
            "backend_timeout": self.backend_timeout,
            "failure_threshold": self.failure_threshold,
            "max_inflight": self.max_inflight,
            "demo_strategy": self.demo_strategy.value,
            "placeholder_prefix": self.placeholder_prefix,
            "stream_policy": self.stream_policy.value,
            "detector": self.detector,
            "detector_command": self.detector_command,
            "detector_url": self.detector_url,
            "detector_timeout": self.detector_timeout,
            "pool_file": self.pool_file,
            "leak_guard": self.leak_guard,
            "parallelism": self.parallelism,
        }


def corpus_fingerprint(records: Sequence[CorpusRecord]) -> str:
    digest = hashlib.sha256()
    for rec in records:
        digest.update(rec.id.encode("utf-8"))
        digest.update(b"\x00")
        digest.update(rec.text.encode("utf-8"))
        digest.update(b"\x01")
    return digest.hexdigest()


def derive_run_id(config: RunConfig, records: Sequence[CorpusRecord]) -> str:
    if config.run_id:
        return config.run_id
    payload = json.dumps(
        {"config": config.to_json_dict(), "corpus": corpus_fingerprint(records)},
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


@dataclass
class GroupResult:
    group: EntityGroup
    decision: SurrogateDecision

    def to_json_dict(self) -> dict:
        return {
            "label": self.group.label.name,
            "canonical": self.group.canonical,
            "surface": self.group.members[0].surface,
            "mentions": len(self.group.members),
            "spans": [[s.start, s.end] for s in self.group.members],
            "decision": decision_to_json_dict(self.decision),
        }


@dataclass
class DocumentResult:
    record: CorpusRecord
    output: str | None
    groups: list[GroupResult] = field(default_factory=list)
    error: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "id": self.record.id,
            "locale": self.record.locale,
            "template": self.record.template,
            "output": self.output,
            "error": self.error,
            "groups": [g.to_json_dict() for g in self.groups],
        }


@dataclass
class RunResults:
    run_id: str
    config: RunConfig
    documents: list[DocumentResult]
    proposals_made: int
    cache_hits: int
    timings: dict[str, float]

    @property
    def failed_documents(self) -> list[DocumentResult]:
        return [d for d in self.documents if d.error is not None]

    def to_json_dict(self) -> dict:
        return {
            "version": RESULTS_VERSION,
            "run_id": self.run_id,
            "config": self.config.to_json_dict(),
            "proposals_made": self.proposals_made,
            "cache_hits": self.cache_hits,
            "documents": [d.to_json_dict() for d in self.documents],
        }


def _build_detector(
    config: RunConfig,
) -> Callable[[CorpusRecord], list]:
    if config.detector == "oracle":
        return detect_oracle
    if config.detector == "rules":
        return lambda rec: detect_rules(rec.text)
    if config.detector == "external":
        adapter = ExternalDetector(
            command=config.detector_command,
            url=config.detector_url,
            timeout=config.detector_timeout,
        )
        return lambda rec: detect_external(rec.text, adapter)
    raise ValueError(f"unknown detector {config.detector!r}")


def _decision_family(config: RunConfig, backend: SlmBackend | None) -> str:
    if backend is not None:
        return backend.id
    return config.mode.value


def run_corpus(
    records: Sequence[CorpusRecord],
    config: RunConfig,
    *,
    catalog: PoolCatalog | None = None,
    cache: SurrogateCache | None = None,
) -> RunResults:
    """Transform every record under the config; per-document errors are
    recorded on the result instead of aborting the run. Only an unhealthy
    backend or an unavailable external detector stops everything."""
    if catalog is None:
        catalog = (
            load_pool_file(config.pool_file) if config.pool_file else builtin_catalog()
        )
    if cache is None:
        cache = SurrogateCache()
    backend: SlmBackend | None = None
    if config.mode is Mode.HYBRID:
        backend = make_backend(
            config.backend_kind,
            command=config.backend_command,
            prompt_via=config.prompt_via,
            timeout=config.backend_timeout,
            max_inflight=config.max_inflight,
            failure_threshold=config.failure_threshold,
        )
    detector = _build_detector(config)
    family = _decision_family(config, backend)
    blocked = (
        frozenset(
            v.strip()
            for rec in records
            for v in rec.gt_values()
            if v.strip()
        )
        if config.leak_guard
        else frozenset()
    )
    timings = {"detect": 0.0, "surrogate": 0.0, "splice": 0.0}

    def process(record: CorpusRecord) -> tuple[DocumentResult, dict[str, float]]:
        spent = {"detect": 0.0, "surrogate": 0.0, "splice": 0.0}
        state = FakeGenState.for_record(record.id, config.stream_policy)
        try:
            t0 = time.perf_counter()
            spans = detector(record)
            groups = resolve_entities(spans)
            t1 = time.perf_counter()
            group_results: list[GroupResult] = []
            replacements = []
            for group in groups:
                surface = group.members[0].surface
                key = CacheKey(
                    mode=config.mode,
                    family=family,
                    canonical=group.canonical,
                    label=group.label,
                )
                decision = cache.get_or_propose(
                    key,
                    lambda s=surface, lb=group.label: dispatch(
                        s,
                        lb,
                        config.mode,
                        state=state,
                        backend=backend,
                        catalog=catalog,
                        strategy=config.demo_strategy,
                        placeholder_prefix=config.placeholder_prefix,
                        blocked=blocked,
                    ),
                )
                group_results.append(GroupResult(group=group, decision=decision))
                replacements.extend(
                    (span, decision.surrogate) for span in group.members
                )
            t2 = time.perf_counter()
            output = splice(record.text, replacements)
            t3 = time.perf_counter()
            spent["detect"] = t1 - t0
            spent["surrogate"] = t2 - t1
            spent["splice"] = t3 - t2
            return DocumentResult(record, output, group_results), spent
        except (BackendUnhealthy, DetectorUnavailable):
            raise
        except DetectorProtocolError as exc:
            return DocumentResult(record, None, error=f"detector: {exc}"), spent
        except (ValueError, RuntimeError) as exc:
            return DocumentResult(record, None, error=str(exc)), spent

    if config.parallelism > 1:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            outcomes = list(pool.map(process, records))
    else:
        outcomes = [process(rec) for rec in records]
    documents = []
    for doc, spent in outcomes:
        documents.append(doc)
        for stage, seconds in spent.items():
            timings[stage] += seconds
    return RunResults(
        run_id=derive_run_id(config, records),
        config=config,
        documents=documents,
        proposals_made=cache.proposals_made,
        cache_hits=cache.cache_hits,
        timings=timings,
    )


@dataclass
class MetricsReport:
    leak: LeakReport
    consistency: ConsistencyReport
    length_preservation_mean: float | None
    distinctness: list
    perplexity_original: float | None
    perplexity_transformed: float | None
    documents_failed: int

    @property
    def aggregate(self) -> float | None:
        return agg_mean(
            [self.leak.rate, self.consistency.rate, self.length_preservation_mean]
        )

    def to_json_dict(self) -> dict:
        return {
            "leak": self.leak.to_json_dict(),
            "consistency": self.consistency.to_json_dict(),
            "length_preservation_mean": self.length_preservation_mean,
            "distinctness": [row.to_json_dict() for row in self.distinctness],
            "perplexity_original": self.perplexity_original,
            "perplexity_transformed": self.perplexity_transformed,
            "documents_failed": self.documents_failed,
            "aggregate": self.aggregate,
        }


def _non_pii_portions(record: CorpusRecord) -> list[str]:
    spans = detect_oracle(record)
    pieces = []
    cursor = 0
    for span in spans:
        pieces.append(record.text[cursor : span.start])
        cursor = span.end
    pieces.append(record.text[cursor:])
    return [p for p in pieces if p]


def compute_metrics(results: RunResults, *, with_perplexity: bool = True) -> MetricsReport:
    ok_docs = [d for d in results.documents if d.error is None and d.output is not None]
    leak = leak_report((d.record.gt_values(), d.output) for d in ok_docs)
    consistency = consistency_report(
        (
            d.output,
            [
                (
                    len(g.group.members),
                    [g.decision.surrogate] * len(g.group.members),
                )
                for g in d.groups
            ],
        )
        for d in ok_docs
    )
    lengths = agg_mean(
        length_preservation(d.record.text, d.output) for d in ok_docs
    )
    distinct = distinctness_rows(
        (g.group.label, g.decision.surrogate, len(g.group.members))
        for d in ok_docs
        for g in d.groups
    )
    ppl_orig: float | None = None
    ppl_out: float | None = None
    if with_perplexity and ok_docs:
        from .metrics import CharNgramScorer

        scorer = CharNgramScorer()
        scorer.train(
            portion for d in ok_docs for portion in _non_pii_portions(d.record)
        )
        ppl_orig = scorer.corpus_perplexity(d.record.text for d in ok_docs)
        ppl_out = scorer.corpus_perplexity(d.output for d in ok_docs)
    return MetricsReport(
        leak=leak,
        consistency=consistency,
        length_preservation_mean=lengths,
        distinctness=distinct,
        perplexity_original=ppl_orig,
        perplexity_transformed=ppl_out,
        documents_failed=len(results.failed_documents),
    )


def regurgitation_for_results(
    results: RunResults, catalog: PoolCatalog | None = None
):
    if catalog is None:
        catalog = (
            load_pool_file(results.config.pool_file)
            if results.config.pool_file
            else builtin_catalog()
        )
    samples = (
        (g.group.members[0].surface, g.group.label, g.decision)
        for d in results.documents
        if d.error is None
        for g in d.groups
    )
    return analyze_regurgitation(samples, catalog)


def _dump_json(path: Path, payload: dict) -> None:
    path.write_text(
        json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )


def persist_run(
    results: RunResults,
    out_dir: str | Path,
    *,
    metrics: MetricsReport | None = None,
    with_perplexity: bool = True,
) -> Path:
    """Write results, metrics, regurgitation and timings under the run id."""
    from .report import distinctness_table, primary_table, regurgitation_table

    run_dir = Path(out_dir) / results.run_id
    run_dir.mkdir(parents=True, exist_ok=True)
    _dump_json(run_dir / "results.json", results.to_json_dict())
    if metrics is None:
        metrics = compute_metrics(results, with_perplexity=with_perplexity)
    metrics_dict = metrics.to_json_dict()
    _dump_json(run_dir / "metrics.json", metrics_dict)
    mode_name = results.config.mode.value
    sections = [
        primary_table({mode_name: metrics_dict}),
        distinctness_table({mode_name: metrics_dict}),
    ]
    # Regurgitation only makes sense when a model produced the surrogates.
    if results.config.mode is Mode.HYBRID:
        regurg_dict = regurgitation_for_results(results).to_json_dict()
        _dump_json(run_dir / "regurgitation.json", regurg_dict)
        sections.append(regurgitation_table(regurg_dict))
    _dump_json(run_dir / "timings.json", {"seconds": results.timings})
    (run_dir / "report.txt").write_text(
        "\n\n".join(sections) + "\n", encoding="utf-8"
    )
    return run_dir
