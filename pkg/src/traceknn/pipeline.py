"""End-to-end run: ingest -> encode -> score -> statistics -> detect -> report."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from statistics import median

from .detector import (DetectionReport, DetectorConfig, anomaly_entries, detect,
                       render_report)
from .encoding import SequenceCorpus, bpi2014_table, build_corpus, read_alphabet_table, variant_histogram
from .kernel import KernelBackend
from .knn_scorer import KnnConfig, ScoredCase, score_corpus
from .log_ingest import IngestConfig, IngestSummary, RawCase, case_length_histogram, parse_log
from .stats import describe, histogram, kde, skewness


class PipelineError(Exception):
    def __init__(self, phase: str, message: str):
        super().__init__(f"[{phase}] {message}")
        self.phase = phase


@dataclass
class RunConfig:
    input: str
    knn: KnnConfig
    ingest: IngestConfig = field(default_factory=IngestConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    backend: KernelBackend = KernelBackend.BIT_PARALLEL
    alphabet: str | None = None  # None, "bpi2014", or a path to a label<TAB>id table
    bandwidth: float | None = None
    bins: str = "fd"  # "fd" or a comma-separated list of edges
    # execution-only knobs; they never change the report
    threads: int = 1
    prune: bool = True
    output: str | None = None
    emit_plots: str | None = None
    fmt: str = "json"

    def recorded(self, bandwidth: float) -> dict:
        """Every option that affects the report, with defaults resolved."""
        ing = self.ingest
        return {
            "input": os.path.basename(self.input),
            "delimiter": ing.delimiter,
            "case_col": ing.case_col,
            "activity_col": ing.activity_col,
            "timestamp_col": ing.timestamp_col,
            "timestamp_formats": list(ing.timestamp_formats),
            "tiebreak_col": ing.tiebreak_col,
            "alphabet": self.alphabet or "first-appearance",
            "backend": KernelBackend(self.backend).value,
            "kde_bandwidth": bandwidth,
            "kde_bandwidth_rule": "fixed" if self.bandwidth is not None else "silverman",
            "histogram_bins": self.bins,
        }


def load_table(alphabet: str | None):
    if alphabet is None:
        return None
    if alphabet == "bpi2014":
        return bpi2014_table()
    return read_alphabet_table(alphabet)


def ingest(config: RunConfig) -> tuple[list[RawCase], IngestSummary, SequenceCorpus]:
    try:
        with open(config.input, "rb") as fh:
            cases, summary = parse_log(fh, config.ingest)
    except (OSError, ValueError) as exc:
        raise PipelineError("ingest", str(exc)) from exc
    try:
        corpus = build_corpus(cases, load_table(config.alphabet))
    except (OSError, ValueError) as exc:
        raise PipelineError("encode", str(exc)) from exc
    return cases, summary, corpus


def corpus_summary(cases: list[RawCase], corpus: SequenceCorpus) -> dict:
    lengths = case_length_histogram(cases)
    per_case = [len(s) for s in corpus.sequences]
    variants = variant_histogram(corpus)
    freq: dict[int, int] = {}
    for c in variants.values():
        freq[c] = freq.get(c, 0) + 1
    occ = list(variants.values())
    return {
        "case_count": corpus.n,
        "event_count": sum(per_case),
        "excluded_cases": corpus.excluded,
        "alphabet_size": len(corpus.alphabet),
        "alphabet_sha256": corpus.alphabet.digest(),
        "alphabet": list(corpus.alphabet.labels),
        "events_per_case": {
            "mean": sum(per_case) / len(per_case),
            "median": float(median(per_case)),
            "skewness": skewness(per_case),
            "histogram": [[k, v] for k, v in lengths.items()],
        },
        "variant_count": len(variants),
        "variant_occurrences": {
            "mean": sum(occ) / len(occ),
            "median": float(median(occ)),
            "skewness": skewness(occ),
            "histogram": [[k, freq[k]] for k in sorted(freq)],
        },
    }


def score(config: RunConfig, corpus: SequenceCorpus, progress=None) -> list[ScoredCase]:
    try:
        return score_corpus(corpus, config.knn, config.backend, threads=config.threads,
                            prune=config.prune, progress=progress)
    except ValueError as exc:
        raise PipelineError("score", str(exc)) from exc


def build_report(config: RunConfig, cases, summary, corpus, scored: list[ScoredCase]) -> DetectionReport:
    if [s.case_id for s in scored] != [s.case_id for s in corpus.sequences]:
        raise PipelineError("detect", "scores do not match the corpus case order")
    values = [s.anomaly_score for s in scored]
    try:
        stats = describe(values, [s.case_id for s in scored])
        detection = detect(scored, stats, config.detector)
    except ValueError as exc:
        raise PipelineError("stats", str(exc)) from exc
    edges = None if config.bins == "fd" else [float(x) for x in config.bins.split(",")]
    hist = histogram(values, edges)
    density = kde(values, config.bandwidth)
    return DetectionReport(
        ingest_summary=summary.to_dict(),
        corpus_summary=corpus_summary(cases, corpus),
        knn_config=config.knn.to_dict(),
        detector_config={"theta": config.detector.theta, "top_m": config.detector.top_m,
                         "side": "right"},
        run_config=config.recorded(density.bandwidth),
        score_stats=stats,
        histogram=hist,
        kde=density,
        anomalies=anomaly_entries(detection, corpus, config.detector.theta),
        outlier_count=detection.outlier_count,
    )


def write_plots(report: DetectionReport, directory: str) -> None:
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "histogram.csv"), "w", encoding="utf-8") as fh:
        fh.write("x;y\n")
        for x, y in zip(report.histogram.centers(), report.histogram.counts):
            fh.write(f"{x!r};{y}\n")
    with open(os.path.join(directory, "kde.csv"), "w", encoding="utf-8") as fh:
        fh.write("x;y\n")
        for x, y in zip(report.kde.grid, report.kde.density):
            fh.write(f"{x!r};{y!r}\n")


def summary_lines(report: DetectionReport) -> list[str]:
    st = report.score_stats
    top = sorted((a["anomaly_score"] for a in report.anomalies), reverse=True)[:5]
    return [
        f"n={st.n} k={report.knn_config['k']} mean={st.mean:.4f} std={st.std_dev:.4f} "
        f"outliers={report.outlier_count} (z > {report.detector_config['theta']})",
        "top-5 scores: " + ", ".join(f"{x:.3f}" for x in top),
    ]


def run_pipeline(config: RunConfig, scored: list[ScoredCase] | None = None,
                 progress=None) -> tuple[DetectionReport, bytes]:
    """Run every phase (or reuse precomputed `scored`) and render the report."""
    cases, summary, corpus = ingest(config)
    if scored is None:
        scored = score(config, corpus, progress)
    report = build_report(config, cases, summary, corpus, scored)
    return report, render_report(report, config.fmt)

