"""Record generation: splitting, rendering, chunking, mixing, determinism."""

import json
import os
import random

import pytest
from hypothesis import given, settings, strategies as st

from fimkit import CharSpan, SourceDocument
from fimkit.fimgen import (DEFAULT_SENTINELS, FIM, FimExample, GenStats, L2R,
                           MixConfig, PSM, SPM, SentinelSet, chunk_document,
                           document_records, generate_to_file,
                           inverse_render_psm, inverse_render_spm,
                           reconstruct_source, record_to_json_line,
                           render_psm, render_spm, split_document, transform)
from fimkit.masking import MaskConfig, RAND_CHAR
from fimkit.rng import Rng
from fimkit.synth import synth_corpus, synth_file


class TestSplitDocument:
    def test_simple(self):
        assert split_document("abcdef", CharSpan(2, 4)) == ("ab", "cd", "ef")

    def test_whole_document(self):
        assert split_document("abcdef", CharSpan(0, 6)) == ("", "abcdef", "")

    @settings(max_examples=200, deadline=None)
    @given(st.text(max_size=80), st.data())
    def test_concatenation_recovers_input(self, text, data):
        raw = text.encode("utf-8")
        if not raw:
            return
        # choose byte offsets on code-point boundaries
        bounds = [0]
        for ch in text:
            bounds.append(bounds[-1] + len(ch.encode("utf-8")))
        a = data.draw(st.sampled_from(bounds))
        b = data.draw(st.sampled_from(bounds))
        span = CharSpan(min(a, b), max(a, b))
        p, m, s = split_document(text, span)
        assert p + m + s == text


class TestRendering:
    def test_psm_format(self):
        ex = FimExample("a", "b", "c", PSM)
        assert render_psm(ex) == "[PRE]a[SUF]c[MID]b[EOT]"

    def test_psm_empty_suffix(self):
        ex = FimExample("a", "b", "", PSM)
        assert render_psm(ex) == "[PRE]a[SUF][MID]b[EOT]"

    def test_spm_format(self):
        ex = FimExample("a", "b", "c", SPM)
        assert render_spm(ex) == "[PRE][SUF]c[MID]ab[EOT]"

    def test_spm_all_empty(self):
        ex = FimExample("", "", "", SPM)
        assert render_spm(ex) == "[PRE][SUF][MID][EOT]"

    def test_custom_sentinels(self):
        s = SentinelSet("<p>", "<s>", "<m>", "<e>")
        assert render_psm(FimExample("a", "b", "c", PSM), s) == "<p>a<s>c<m>b<e>"

    def test_sentinel_validation(self):
        with pytest.raises(ValueError):
            SentinelSet("[PRE]", "[PRE]", "[MID]", "[EOT]")
        with pytest.raises(ValueError):
            SentinelSet("[P]", "[P]x", "[M]", "[E]")

    def test_inverse_fuzz(self):
        rnd = random.Random(99)
        alphabet = "abc \n(){}#'\"=+-"
        for _ in range(2000):
            parts = ["".join(rnd.choice(alphabet)
                             for _ in range(rnd.randrange(0, 20)))
                     for _ in range(3)]
            prefix, middle, suffix = parts
            psm = render_psm(FimExample(prefix, middle, suffix, PSM))
            assert inverse_render_psm(psm) == (prefix, middle, suffix)
            assert reconstruct_source(psm) == prefix + middle + suffix
            spm = render_spm(FimExample(prefix, middle, suffix, SPM))
            assert inverse_render_spm(spm) == (prefix + middle, suffix)
            assert reconstruct_source(spm) == prefix + middle + suffix


class TestChunking:
    def test_arithmetic(self):
        assert [len(c) for c in chunk_document("x" * 10, 4)] == [4, 4, 2]

    def test_short_doc(self):
        assert chunk_document("ab", 10) == ["ab"]

    def test_empty(self):
        assert chunk_document("", 8) == []

    @settings(max_examples=150, deadline=None)
    @given(st.text(max_size=200), st.integers(1, 40))
    def test_concatenation(self, text, budget):
        chunks = chunk_document(text, budget)
        assert "".join(chunks) == text
        assert all(1 <= len(c) <= budget for c in chunks)

    def test_pluggable_counter(self):
        # count non-space characters only
        counter = lambda s: sum(1 for c in s if c != " ")
        text = "a b c d e f"
        chunks = chunk_document(text, 2, counter)
        assert "".join(chunks) == text
        assert all(counter(c) <= 2 for c in chunks)


def _mk_chunk(i, content="x = 1\ny = f(2)\nz = [1, 2]\n", lang="python"):
    return SourceDocument(f"d{i}.py:0", lang, content)


class TestTransform:
    def test_zero_fim_rate_forces_l2r(self):
        cfg = MixConfig(fim_rate=0.0)
        for i in range(40):
            rec = transform(_mk_chunk(i), cfg, Rng(1, f"c{i}"))
            assert rec.kind == L2R
            assert rec.text.endswith("[EOT]")

    def test_one_fim_rate_forces_fim(self):
        cfg = MixConfig(fim_rate=1.0)
        for i in range(40):
            rec = transform(_mk_chunk(i), cfg, Rng(1, f"c{i}"))
            assert rec.kind == FIM

    def test_fim_record_reassembles_source(self):
        cfg = MixConfig(fim_rate=1.0)
        for i in range(120):
            chunk = _mk_chunk(i)
            rec = transform(chunk, cfg, Rng(3, f"c{i}"))
            assert reconstruct_source(rec.text) == chunk.content

    def test_broken_syntax_corpus_all_rand_char(self):
        cfg = MixConfig(fim_rate=1.0)
        broken = "def broken(:\n  (("
        for i in range(60):
            chunk = _mk_chunk(i, broken)
            rec = transform(chunk, cfg, Rng(5, f"b{i}"))
            assert rec.kind == FIM and rec.strategy == RAND_CHAR

    def test_natural_language_always_l2r(self):
        cfg = MixConfig(fim_rate=1.0)
        for i in range(30):
            chunk = _mk_chunk(i, "Plain prose, not code.", lang="markdown")
            rec = transform(chunk, cfg, Rng(5, f"n{i}"))
            assert rec.kind == L2R

    def test_mask_span_metadata_consistent(self):
        cfg = MixConfig(fim_rate=1.0)
        for i in range(60):
            chunk = _mk_chunk(i)
            rec = transform(chunk, cfg, Rng(11, f"m{i}"))
            p, m, s = split_document(chunk.content,
                                     CharSpan(rec.mask_start, rec.mask_end))
            assert reconstruct_source(rec.text) == p + m + s
            if rec.mode == PSM:
                assert inverse_render_psm(rec.text) == (p, m, s)

    def test_mixing_ratios(self):
        cfg = MixConfig()
        stats = GenStats()
        n = 30_000
        for i in range(n):
            transform(_mk_chunk(i), cfg, Rng(123, f"r{i}"), stats)
        assert abs(stats.fim_records / n - 0.70) < 0.015
        assert abs(stats.ast_chosen / stats.fim_records - 0.90) < 0.015
        psm = stats.by_mode[PSM]
        assert abs(psm / stats.fim_records - 0.50) < 0.015
        singles = stats.by_strategy["single_node"]
        aligned = stats.by_strategy["aligned_span"]
        assert abs(singles / (singles + aligned) - 0.50) < 0.015


class TestPipeline:
    def test_worker_parity_and_stats(self, tmp_path):
        corpus = tmp_path / "corpus"
        synth_corpus(str(corpus), 12, seed=5, langs=("python", "go", "ruby"))
        (corpus / "broken.py").write_text("def broken(:\n  ((")
        (corpus / "notes.md").write_text("# notes\nplain text\n")
        cfg = MixConfig()
        outputs = []
        for workers in (1, 3):
            out = tmp_path / f"out_w{workers}.jsonl"
            stats = generate_to_file(str(corpus), str(out), cfg,
                                     seed=11, workers=workers)
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]
        assert stats.records == 38
        assert stats.natural_language_chunks == 1

    def test_resume_alignment(self):
        # records for one document do not depend on which documents came
        # before it (stream ids are per chunk)
        doc = SourceDocument("solo.py", "python", synth_file("python", 8))
        cfg = MixConfig(context_budget=200)
        recs1 = list(document_records(doc, cfg, seed=4))
        recs2 = list(document_records(doc, cfg, seed=4, start_chunk=2))
        assert recs1[2:] == recs2

    def test_record_json_shape(self):
        rec = transform(_mk_chunk(0), MixConfig(fim_rate=1.0), Rng(0, "j"))
        row = json.loads(record_to_json_line(rec))
        assert set(row) == {"kind", "text", "lang", "strategy", "mode",
                            "source_id", "mask_start", "mask_end"}

    def test_record_length_bounded_by_budget_plus_sentinels(self):
        cfg = MixConfig(context_budget=64)
        s = cfg.sentinels
        overhead = len(s.pre) + len(s.suf) + len(s.mid) + len(s.eot)
        doc = SourceDocument("big.py", "python", synth_file("python", 31))
        for rec in document_records(doc, cfg, seed=6):
            assert len(rec.text) <= cfg.context_budget + overhead
