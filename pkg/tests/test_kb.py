"""Knowledge-base ingestion and BM25 retrieval."""

from __future__ import annotations

import random

import pytest

import timelyhls
from timelyhls import kb
from timelyhls.errors import ConfigError, ContractError, NotFound, ValidationError
from timelyhls.kb import KnowledgeDoc, bm25_score, build_index, retrieve, tokenize

from conftest import bm25_reference, make_target

# frozen before the build from an independent hand evaluation of the BM25
# formula (3 docs of lengths 5/4/4, single query term with df=1, tf=1)
GOLDEN_BM25_SCORE = 0.9227538367149796


def _doc(doc_id, body, families=(), kind="heuristic", title=""):
    return KnowledgeDoc(
        id=doc_id, kind=kind, applicable_families=tuple(families), title=title, body=body
    )


class TestTokenize:
    def test_splits_on_non_alphanumeric(self):
        assert tokenize("ARRAY_PARTITION dim=1") == ["array", "partition", "dim", "1"]

    def test_empty(self):
        assert tokenize("") == []

    def test_plus_is_separator(self):
        assert tokenize("Zynq UltraScale+") == ["zynq", "ultrascale"]


class TestIngest:
    def test_bundled_kb(self, bundled_kb):
        targets, index = bundled_kb
        assert len(targets) == 10
        assert any(t.part == "xc7a200tfbg676-2" for t in targets)
        assert len(index.docs) > 0
        assert abs(index.avg_doc_length - sum(index.doc_lengths.values()) / len(index.docs)) < 1e-12

    def test_empty_docs_dir(self, tmp_path):
        (tmp_path / "docs").mkdir()
        (tmp_path / "targets.json").write_text("[]")
        targets, index = kb.ingest(tmp_path)
        assert targets == []
        assert index.docs == []
        assert index.avg_doc_length == 0

    def test_missing_directory(self, tmp_path):
        with pytest.raises(ConfigError):
            kb.ingest(tmp_path / "nope")

    def test_duplicate_doc_id(self, tmp_path):
        (tmp_path / "docs").mkdir()
        (tmp_path / "targets.json").write_text("[]")
        doc = "---\nid: dup\nkind: heuristic\ntitle: t\n---\nbody\n"
        (tmp_path / "docs" / "a.md").write_text(doc)
        (tmp_path / "docs" / "b.md").write_text(doc)
        with pytest.raises(ValidationError, match="dup"):
            kb.ingest(tmp_path)

    def test_duplicate_part(self, tmp_path):
        (tmp_path / "docs").mkdir()
        entry = {
            "family": "Artix-7", "part": "xc7a200tfbg676-2", "luts": 1, "ffs": 1,
            "dsps": 1, "brams": 1, "default_clock_ns": 10.0, "logic_delay_ns": 1.0,
            "tier": "low_cost",
        }
        import json

        (tmp_path / "targets.json").write_text(json.dumps([entry, entry]))
        with pytest.raises(ValidationError, match="xc7a200tfbg676-2"):
            kb.ingest(tmp_path)

    def test_malformed_front_matter_names_file(self, tmp_path):
        (tmp_path / "docs").mkdir()
        (tmp_path / "targets.json").write_text("[]")
        (tmp_path / "docs" / "broken.md").write_text("---\nid missing colon\n---\nbody\n")
        with pytest.raises(ValidationError, match="broken.md"):
            kb.ingest(tmp_path)

    def test_reingest_is_byte_identical(self, tmp_path):
        first = kb.ingest(timelyhls.data_path("kb"))[1].canonical_json()
        second = kb.ingest(timelyhls.data_path("kb"))[1].canonical_json()
        assert first == second


class TestBm25:
    def golden_corpus(self):
        return [
            _doc("d1", "pipeline improves loop initiation interval"),
            _doc("d2", "unroll duplicates loop hardware"),
            _doc("d3", "partition arrays across banks"),
        ]

    def test_golden_single_term(self):
        index = build_index(self.golden_corpus())
        score = bm25_score(index, ["pipeline"], "d1")
        assert score == pytest.approx(GOLDEN_BM25_SCORE, abs=1e-12)

    def test_absent_term_scores_zero(self):
        index = build_index(self.golden_corpus())
        assert bm25_score(index, ["dataflow"], "d1") == 0.0
        assert bm25_score(index, ["pipeline"], "d2") == 0.0

    def test_identical_docs_identical_scores(self):
        index = build_index([_doc("a", "loop pipeline loop"), _doc("b", "loop pipeline loop")])
        assert bm25_score(index, ["pipeline", "loop"], "a") == bm25_score(
            index, ["pipeline", "loop"], "b"
        )

    def test_unknown_doc_id(self):
        index = build_index(self.golden_corpus())
        with pytest.raises(NotFound):
            bm25_score(index, ["pipeline"], "nope")

    def test_matches_brute_force_reference(self):
        rng = random.Random(7)
        vocab = "pipeline unroll partition loop array bram dsp latency ii timing".split()
        for _ in range(30):
            n_docs = rng.randint(1, 20)
            docs = [
                _doc(f"d{i}", " ".join(rng.choices(vocab, k=rng.randint(1, 30))))
                for i in range(n_docs)
            ]
            index = build_index(docs)
            doc_tokens = {d.id: tokenize(d.body) for d in docs}
            query = rng.choices(vocab, k=rng.randint(1, 4))
            for d in docs:
                assert bm25_score(index, query, d.id) == pytest.approx(
                    bm25_reference(doc_tokens, query, d.id), abs=1e-9
                )

    def test_df_never_exceeds_corpus(self, bundled_kb):
        _, index = bundled_kb
        assert all(df <= len(index.docs) for df in index.term_stats.values())


class TestRetrieve:
    def corpus(self):
        return [
            _doc("artix-note", "pipeline timing artix", families=("Artix-7",)),
            _doc("versal-note", "pipeline timing pipeline pipeline", families=("Versal AI Edge",)),
            _doc("generic-a", "pipeline hints"),
            _doc("generic-b", "pipeline hints"),
        ]

    def test_family_filter_beats_score(self):
        index = build_index(self.corpus())
        got = retrieve(index, "pipeline timing", make_target(family="Artix-7"), k=10)
        ids = [d.id for d in got]
        assert "versal-note" not in ids
        assert "artix-note" in ids

    def test_tie_breaks_ascending_id(self):
        index = build_index([_doc("b", "pipeline"), _doc("a", "pipeline")])
        got = retrieve(index, "pipeline", make_target(), k=2)
        assert [d.id for d in got] == ["a", "b"]

    def test_k_clamps_to_corpus(self):
        index = build_index(self.corpus())
        got = retrieve(index, "pipeline", make_target(family="Artix-7"), k=50)
        assert len(got) == 3  # versal doc filtered out

    def test_k_must_be_positive(self):
        index = build_index(self.corpus())
        with pytest.raises(ContractError):
            retrieve(index, "pipeline", make_target(), k=0)

    def test_sorted_by_score_then_id(self):
        rng = random.Random(3)
        vocab = "pipeline unroll loop ii".split()
        docs = [
            _doc(f"d{i}", " ".join(rng.choices(vocab, k=rng.randint(1, 12))))
            for i in range(12)
        ]
        index = build_index(docs)
        target = make_target()
        got = retrieve(index, "pipeline loop", target, k=6)
        scores = [bm25_score(index, tokenize("pipeline loop"), d.id) for d in got]
        assert scores == sorted(scores, reverse=True)
        assert len(got) <= 6
        assert set(d.id for d in got) <= {d.id for d in docs}
