from datetime import datetime

import pytest
from hypothesis import given, strategies as st

from traceknn.encoding import (Alphabet, Sequence, SequenceCorpus, UnknownLabelError, bpi2014_table,
                               build_corpus, read_alphabet_table, variant_histogram)
from traceknn.log_ingest import EventRecord, RawCase

TS = datetime(2020, 1, 1)


def mk(cid, labels):
    return RawCase(cid, tuple(EventRecord(cid, lab, TS) for lab in labels))


def test_first_appearance():
    corpus = build_corpus([mk("a", ["Open", "Closed"]), mk("b", ["Open"])])
    assert corpus.alphabet.index == {"Open": 0, "Closed": 1}
    assert [s.symbols for s in corpus.sequences] == [(0, 1), (0,)]


def test_labels_trimmed_case_sensitive():
    corpus = build_corpus([mk("a", [" Open", "open", "Open "])])
    assert corpus.alphabet.labels == ("Open", "open")
    assert corpus.sequences[0].symbols == (0, 1, 0)


def test_bpi_table_matches_published_index():
    table = bpi2014_table()
    assert len(table) == 39
    assert sorted(table.values()) == list(range(39))
    assert table["Caused By CI"] == 0
    assert table["Reopen"] == 1
    assert table["Assignment"] == 35
    assert table["Closed"] == 27
    assert table["Status Change"] == 20
    assert table["Reassignment"] == 25
    assert table["Open"] == 18


def test_explicit_table_is_order_independent():
    table = {"Open": 0, "Work": 1, "Closed": 2}
    cases = [mk("a", ["Open", "Closed"]), mk("b", ["Work", "Open"]), mk("c", ["Closed"])]
    one = {s.case_id: s.symbols for s in build_corpus(cases, table).sequences}
    rev = {s.case_id: s.symbols for s in build_corpus(cases[::-1], table).sequences}
    assert one == rev == {"a": (0, 2), "b": (1, 0), "c": (2,)}


def test_unknown_label_with_table_is_fatal():
    with pytest.raises(UnknownLabelError, match="Mystery"):
        build_corpus([mk("a", ["Open", "Mystery"])], {"Open": 0})


def test_table_file_round_trip(tmp_path):
    p = tmp_path / "alpha.tsv"
    p.write_text("# comment\nOpen\t0\nClosed\t1\n\n")
    assert read_alphabet_table(str(p)) == {"Open": 0, "Closed": 1}
    with pytest.raises(ValueError):
        read_alphabet_table(["no tab here"])
    with pytest.raises(ValueError):
        Alphabet.from_table({"a": 0, "b": 2})


def test_variant_histogram():
    alpha = Alphabet(("x", "y"))
    corpus = SequenceCorpus(alpha, (Sequence("1", (0, 1)), Sequence("2", (0, 1)), Sequence("3", (0,))))
    assert variant_histogram(corpus) == {(0, 1): 2, (0,): 1}
    same = SequenceCorpus(alpha, tuple(Sequence(str(i), (1, 0)) for i in range(7)))
    assert variant_histogram(same) == {(1, 0): 7}


def test_corpus_rejects_out_of_range():
    with pytest.raises(ValueError):
        SequenceCorpus(Alphabet(("x",)), (Sequence("1", (0, 1)),))
    with pytest.raises(ValueError):
        Sequence("e", ())


def test_dump_and_packed():
    corpus = build_corpus([mk("a", ["Open", "Closed"]), mk("b", ["Open"])])
    assert corpus.dump() == "a: 0 1\nb: 0\n"
    flat, offsets = corpus.packed()
    assert flat.tolist() == [0, 1, 0] and offsets.tolist() == [0, 2, 3]


label_lists = st.lists(st.lists(st.sampled_from(["A", "B", "C", "D", "E"]), min_size=1, max_size=8),
                       min_size=1, max_size=20)


@given(label_lists)
def test_encode_decode_round_trip(lists):
    cases = [mk(f"c{i}", labels) for i, labels in enumerate(lists)]
    corpus = build_corpus(cases)
    assert [corpus.alphabet.decode(s.symbols) for s in corpus.sequences] == lists
    assert sum(variant_histogram(corpus).values()) == corpus.n
    assert len(corpus.alphabet) == len({x for ls in lists for x in ls})


@given(label_lists)
def test_digest_depends_only_on_labels(lists):
    cases = [mk(f"c{i}", labels) for i, labels in enumerate(lists)]
    a = build_corpus(cases).alphabet
    b = Alphabet.from_table(a.index)
    assert a.digest() == b.digest()
