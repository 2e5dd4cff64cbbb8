import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from traceknn.detector import (DetectionReport, DetectorConfig, anomaly_entries, detect, render_report)
from traceknn.encoding import Alphabet, Sequence, SequenceCorpus, bpi2014_table
from traceknn.knn_scorer import ScoredCase
from traceknn.stats import ScoreStatistics, describe, histogram, kde


def scored_from(scores):
    return [ScoredCase(f"c{i}", 1 / s if s else 0.0, s, "c0", index=i) for i, s in enumerate(scores)]


def fixed_stats(mu=0.0, sd=1.0):
    return ScoreStatistics(3, mu, sd * sd, sd, 0, 0)


def test_one_sided_strict():
    det = detect(scored_from([6.0, 4.9, -7.0]), fixed_stats(), DetectorConfig(5.0, top_m=2))
    assert det.outlier_count == 1
    assert det.flagged == {"c0"}
    assert [s.case_id for s in det.anomalies] == ["c0", "c1"]
    det = detect(scored_from([5.0, 1.0]), fixed_stats(), DetectorConfig(5.0))
    assert det.outlier_count == 0


def test_nothing_flagged_still_lists_top():
    det = detect(scored_from([1.0, 2.0, 3.0]), fixed_stats(0, 10), DetectorConfig(5.0, top_m=2))
    assert det.outlier_count == 0
    assert [s.anomaly_score for s in det.anomalies] == [3.0, 2.0]


def test_all_flagged_cases_listed_beyond_top_m():
    det = detect(scored_from([9, 8, 7, 6, 0]), fixed_stats(), DetectorConfig(5.0, top_m=2))
    assert det.outlier_count == 4 and len(det.anomalies) == 4


def test_degenerate_sigma():
    with pytest.raises(ValueError):
        detect(scored_from([1.0, 1.0]), fixed_stats(1.0, 0.0))


def test_config_validation():
    with pytest.raises(ValueError):
        DetectorConfig(theta=0)
    with pytest.raises(ValueError):
        DetectorConfig(top_m=0)


@given(st.lists(st.floats(1, 10), min_size=3, max_size=50), st.floats(0.5, 6), st.floats(0.5, 6))
def test_threshold_monotone_and_equivalent(xs, t1, t2):
    s = describe(xs)
    if s.std_dev < 1e-9:
        return
    scored = scored_from(xs)
    lo, hi = sorted((t1, t2))
    a = detect(scored, s, DetectorConfig(lo))
    b = detect(scored, s, DetectorConfig(hi))
    assert b.outlier_count <= a.outlier_count
    direct = {c.case_id for c in scored if c.anomaly_score > s.mean + lo * s.std_dev}
    # exact ties at the boundary can round either way; away from them the sets agree
    near = {c.case_id for c in scored if abs(c.anomaly_score - (s.mean + lo * s.std_dev)) < 1e-9}
    assert a.flagged - near == direct - near


def _report(anomaly_symbols):
    table = bpi2014_table()
    alpha = Alphabet.from_table(table)
    seqs = (Sequence("IM1", tuple(anomaly_symbols)), Sequence("IM2", (18, 25, 27)), Sequence("IM3", (18, 25, 27)))
    corpus = SequenceCorpus(alpha, seqs)
    scored = [ScoredCase("IM1", 0.25, 4.0, "IM2", index=0), ScoredCase("IM2", 1.0, 1.0, "IM3", index=1),
              ScoredCase("IM3", 1.0, 1.0, "IM2", index=2)]
    stats = describe([s.anomaly_score for s in scored])
    det = detect(scored, stats, DetectorConfig(1.0, top_m=1))
    values = [s.anomaly_score for s in scored]
    return DetectionReport(
        ingest_summary={}, corpus_summary={"case_count": 3, "event_count": 8, "variant_count": 2,
                                           "alphabet_size": 39},
        knn_config={"k": 1, "exclude_self": True, "similarity_floor": 1e-9},
        detector_config={"theta": 1.0, "top_m": 1, "side": "right"}, run_config={},
        score_stats=stats, histogram=histogram(values), kde=kde(values, 0.15),
        anomalies=anomaly_entries(det, corpus, 1.0), outlier_count=det.outlier_count)


def test_text_rendering_shows_ids_and_labels():
    text = render_report(_report([0, 27]), "text").decode()
    assert "0; 27;" in text
    assert "Caused By CI; Closed" in text
    assert "IM2" in text  # k-th neighbour for audit


def test_json_rendering_is_deterministic():
    r = _report([20, 27, 0, 35, 32, 25, 18, 3, 20])
    a, b = render_report(r), render_report(r)
    assert a == b
    doc = json.loads(a)
    assert doc["anomalies"][0]["symbols"] == "20; 27; 0; 35; 32; 25; 18; 3; 20;"
    assert doc["anomalies"][0]["flagged"] is True
    assert set(doc) >= {"ingest_summary", "corpus_summary", "knn_config", "score_stats",
                        "histogram", "kde", "anomalies", "outlier_count"}


def test_empty_anomaly_list_renders():
    r = _report([0, 27])
    r.anomalies = []
    assert json.loads(render_report(r))["anomalies"] == []
    with pytest.raises(ValueError):
        render_report(r, "xml")
