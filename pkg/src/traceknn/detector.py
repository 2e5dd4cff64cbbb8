"""Z-score thresholding and the detection report."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from typing import Sequence

from .encoding import SequenceCorpus
from .knn_scorer import KnnConfig, ScoredCase
from .stats import HistogramSeries, KdeSeries, ScoreStatistics, z_scores


@dataclass(frozen=True)
class DetectorConfig:
    theta: float = 5.0
    top_m: int = 10

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        if self.top_m < 1:
            raise ValueError("top_m must be >= 1")


@dataclass(frozen=True)
class Detection:
    anomalies: list[ScoredCase]  # ranked by z descending
    outlier_count: int
    flagged: frozenset[str]


@dataclass
class DetectionReport:
    ingest_summary: dict
    corpus_summary: dict
    knn_config: dict
    detector_config: dict
    run_config: dict
    score_stats: ScoreStatistics
    histogram: HistogramSeries
    kde: KdeSeries
    anomalies: list[dict] = field(default_factory=list)
    outlier_count: int = 0


def with_z_scores(scored: Sequence[ScoredCase], stats: ScoreStatistics) -> list[ScoredCase]:
    zs = z_scores([s.anomaly_score for s in scored], stats)
    return [dataclasses.replace(s, z_score=z) for s, z in zip(scored, zs)]


def detect(scored: Sequence[ScoredCase], stats: ScoreStatistics,
           config: DetectorConfig = DetectorConfig()) -> Detection:
    """Flag cases with z > theta (right tail only) and rank by z.

    The returned list holds every flagged case, and at least the top_m
    ranked cases even if fewer are flagged.
    """
    scored = with_z_scores(scored, stats)
    order = sorted(range(len(scored)),
                   key=lambda i: (-scored[i].z_score, scored[i].index if scored[i].index >= 0 else i))
    flagged = [scored[i] for i in order if scored[i].z_score > config.theta]
    keep = max(len(flagged), min(config.top_m, len(scored)))
    return Detection([scored[i] for i in order[:keep]], len(flagged),
                     frozenset(s.case_id for s in flagged))


def format_symbols(symbols: Sequence[int]) -> str:
    return " ".join(f"{s};" for s in symbols)


def anomaly_entries(detection: Detection, corpus: SequenceCorpus, theta: float) -> list[dict]:
    by_id = {s.case_id: s for s in corpus.sequences}
    entries = []
    for rank, s in enumerate(detection.anomalies, 1):
        symbols = by_id[s.case_id].symbols
        entries.append({
            "rank": rank,
            "case_id": s.case_id,
            "anomaly_score": s.anomaly_score,
            "z_score": s.z_score,
            "kth_similarity": s.kth_similarity,
            "kth_neighbor_id": s.kth_neighbor_id,
            "flagged": s.z_score > theta,
            "similarity_floor_hit": s.similarity_floor_hit,
            "length": len(symbols),
            "symbols": format_symbols(symbols),
            "activities": "; ".join(corpus.alphabet.decode(symbols)),
        })
    return entries


def report_dict(report: DetectionReport) -> dict:
    return {
        "run_config": report.run_config,
        "knn_config": report.knn_config,
        "detector_config": report.detector_config,
        "ingest_summary": report.ingest_summary,
        "corpus_summary": report.corpus_summary,
        "score_stats": report.score_stats.to_dict(),
        "outlier_count": report.outlier_count,
        "anomalies": report.anomalies,
        "histogram": {"bin_edges": list(report.histogram.bin_edges),
                      "counts": list(report.histogram.counts)},
        "kde": {"bandwidth": report.kde.bandwidth, "grid": list(report.kde.grid),
                "density": list(report.kde.density)},
    }


def render_report(report: DetectionReport, fmt: str = "json") -> bytes:
    if fmt == "json":
        return (json.dumps(report_dict(report), indent=2) + "\n").encode("utf-8")
    if fmt == "text":
        return render_text(report).encode("utf-8")
    raise ValueError(f"unknown report format {fmt!r}")


def render_text(report: DetectionReport) -> str:
    st = report.score_stats
    cs = report.corpus_summary
    lines = [
        f"cases: {cs['case_count']}  events: {cs['event_count']}  "
        f"variants: {cs['variant_count']}  alphabet: {cs['alphabet_size']}",
        f"k={report.knn_config['k']}  theta={report.detector_config['theta']}  "
        f"exclude_self={report.knn_config['exclude_self']}",
        f"score: mean={st.mean:.4f}  var={st.variance:.4f}  std={st.std_dev:.4f}  "
        f"min={st.min:.4f}  max={st.max:.4f}",
        f"outliers (z > {report.detector_config['theta']}): {report.outlier_count}",
        "",
        f"{'rank':>4}  {'case':<16} {'score':>9} {'z':>9}  {'k-th nbr':<16} sequence",
    ]
    for a in report.anomalies:
        mark = "*" if a["flagged"] else " "
        lines.append(f"{a['rank']:>4}{mark} {a['case_id']:<16} {a['anomaly_score']:>9.4f} "
                     f"{a['z_score']:>9.3f}  {a['kth_neighbor_id']:<16} {a['symbols']}")
        lines.append(f"{'':>49}{a['activities']}")
    return "\n".join(lines) + "\n"
