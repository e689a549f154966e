"""Perplexity formula, aggregation, prompts, and the n-gram scorer."""

import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from fimkit.benchgen import BenchExample
from fimkit.evalkit import (CoverageMismatch, EmptyMiddle, ScoredMiddle,
                            TokenScore, aggregate, char_ppl, evaluate_files,
                            ngram_score, render_l2r_prompt,
                            score_prompts_file, write_prompts)


def _scored(middle, logprobs_texts):
    return ScoredMiddle.from_middle(
        "t", middle, [TokenScore(t, lp) for t, lp in logprobs_texts])


class TestCharPpl:
    def test_sqrt_two(self):
        sm = _scored("ab", [("ab", math.log(0.5))])
        assert char_ppl(sm) == pytest.approx(math.sqrt(2), abs=1e-12)

    def test_perfect_prediction(self):
        sm = _scored("xyz", [("xyz", 0.0)])
        assert char_ppl(sm) == pytest.approx(1.0, abs=1e-12)

    def test_exp_half(self):
        sm = _scored("abcdef", [("abc", -1.0), ("def", -2.0)])
        assert char_ppl(sm) == pytest.approx(math.exp(0.5), abs=1e-12)

    def test_retokenization_invariance(self):
        total = -3.7
        sm1 = _scored("abcd", [("abcd", total)])
        sm2 = _scored("abcd", [("a", -1.0), ("bc", -2.0), ("d", -0.7)])
        assert char_ppl(sm1) == pytest.approx(char_ppl(sm2), abs=1e-12)

    def test_scale_check_one_over_q(self):
        q = 0.37
        sm = _scored("hello", [(c, math.log(q)) for c in "hello"])
        assert char_ppl(sm) == pytest.approx(1 / q, abs=1e-12)

    def test_monotonicity(self):
        lo = _scored("ab", [("a", -1.0), ("b", -1.0)])
        hi = _scored("ab", [("a", -1.0), ("b", -1.5)])
        assert char_ppl(hi) > char_ppl(lo)

    def test_char_count_is_code_points(self):
        sm = _scored("héllo", [("héllo", -2.0)])
        assert sm.middle_char_count == 5
        assert char_ppl(sm) == pytest.approx(math.exp(2.0 / 5), abs=1e-12)

    def test_coverage_mismatch(self):
        with pytest.raises(CoverageMismatch):
            _scored("abc", [("ab", -1.0)])

    def test_empty_middle(self):
        with pytest.raises(EmptyMiddle):
            _scored("", [])

    def test_ppl_at_least_one_for_valid_logprobs(self):
        rnd = random.Random(5)
        for _ in range(200):
            n = rnd.randint(1, 8)
            sm = _scored("x" * n, [("x", -rnd.random() * 3) for _ in range(n)])
            assert char_ppl(sm) >= 1.0


class TestAggregate:
    def test_two_example_mean(self):
        rows = [{"split": "Add", "lang": "py", "ppl": 1.2},
                {"split": "Add", "lang": "py", "ppl": 1.4}]
        agg = aggregate(rows)
        assert agg["groups"]["Add/py"]["mean_ppl"] == pytest.approx(1.3)

    def test_single_example(self):
        agg = aggregate([{"split": "Edit", "lang": "go", "ppl": 2.5}])
        assert agg["overall"]["mean_ppl"] == 2.5
        assert agg["overall"]["count"] == 1

    def test_grouping_matches_hand_table(self):
        rows = [
            {"split": "Add", "lang": "py", "ppl": 1.0},
            {"split": "Add", "lang": "py", "ppl": 2.0},
            {"split": "Add", "lang": "go", "ppl": 4.0},
            {"split": "Edit", "lang": "py", "ppl": 8.0},
        ]
        agg = aggregate(rows)
        assert agg["groups"]["Add/py"] == {
            "count": 2, "mean_ppl": 1.5, "median_ppl": 1.5}
        assert agg["groups"]["Add/go"]["mean_ppl"] == 4.0
        assert agg["groups"]["Edit/py"]["count"] == 1
        assert agg["overall"]["mean_ppl"] == pytest.approx(15 / 4)

    def test_permutation_invariance(self):
        rows = [{"split": "A", "lang": "x", "ppl": float(v)}
                for v in (3, 1, 4, 1, 5, 9, 2, 6)]
        fwd = aggregate(rows)
        rev = aggregate(list(reversed(rows)))
        assert fwd == rev

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            aggregate([])


class TestPromptRendering:
    def test_l2r_layout(self):
        ex = BenchExample("Add", prefix="a", middle="b", suffix="c")
        assert render_l2r_prompt(ex) == "c\n\na"

    def test_l2r_empty_suffix(self):
        ex = BenchExample("Add", prefix="a", middle="b", suffix="")
        assert render_l2r_prompt(ex) == "\n\na"

    def test_l2r_round_trip_newline_free_parts(self):
        rnd = random.Random(3)
        for _ in range(300):
            prefix = "".join(rnd.choice("abc ") for _ in range(rnd.randrange(8)))
            suffix = "".join(rnd.choice("xyz ") for _ in range(rnd.randrange(8)))
            ex = BenchExample("Add", prefix=prefix, middle="m", suffix=suffix)
            prompt = render_l2r_prompt(ex)
            got_suffix, got_prefix = prompt.split("\n\n", 1)
            assert (got_suffix, got_prefix) == (suffix, prefix)


class TestNgramScorer:
    def test_uniform_limit(self):
        ctx = "abcdefghij"  # alphabet of 10, middle within it
        scores = ngram_score("abc", ctx, order=1, smoothing=1e9)
        for t in scores:
            assert t.logprob == pytest.approx(math.log(1 / 10), abs=1e-6)

    def test_deterministic_context_limit(self):
        scores = ngram_score("a", "a" * 50, order=2, smoothing=1e-9)
        ppl = math.exp(-scores[0].logprob)
        assert ppl == pytest.approx(1.0, abs=1e-6)

    def test_motif_beats_random(self):
        motif = "def foo():\n    return 1\n" * 30
        like = ngram_score("def bar():\n    return 2\n", motif, order=4)
        rand = ngram_score("qz@#xw!!~~pL", motif, order=4)
        ppl = lambda ts: math.exp(-sum(t.logprob for t in ts) / len(ts))
        assert ppl(like) < ppl(rand)

    def test_logprobs_nonpositive(self):
        scores = ngram_score("anything at all", "context text", order=3)
        assert all(t.logprob <= 0 for t in scores)

    def test_one_token_per_char(self):
        scores = ngram_score("abc", "context", order=2)
        assert [t.text for t in scores] == ["a", "b", "c"]


class TestFileExchange:
    def test_end_to_end(self, tmp_path):
        examples = [
            BenchExample("Add", prefix="def f():\n", middle="    return 1\n",
                         suffix="\nprint(f())\n", repo="r", sha="s",
                         path="f.py", lang="python"),
            BenchExample("Edit", prefix="x = ", middle="2\n", suffix="y = 3\n",
                         original="1\n", repo="r", sha="s2", path="g.py",
                         lang="python"),
        ]
        prompts = tmp_path / "prompts.jsonl"
        scores = tmp_path / "scores.jsonl"
        assert write_prompts(examples, str(prompts), style="fim") == 2
        assert score_prompts_file(str(prompts), str(scores)) == 2
        per_example, summary = evaluate_files(str(prompts), str(scores))
        assert len(per_example) == 2
        assert summary["overall"]["count"] == 2
        assert {"Add/python", "Edit/python"} == set(summary["groups"])
        for row in per_example:
            assert row["ppl"] > 0

    def test_closed_form_through_files(self, tmp_path):
        import json
        prompts = tmp_path / "p.jsonl"
        scores = tmp_path / "s.jsonl"
        prompts.write_text(json.dumps(
            {"id": "e1", "prompt": "ignored", "middle": "ab",
             "split": "Add", "lang": "py"}) + "\n")
        scores.write_text(json.dumps(
            {"id": "e1",
             "tokens": [{"text": "ab", "logprob": math.log(0.5)}]}) + "\n")
        per_example, summary = evaluate_files(str(prompts), str(scores))
        assert per_example[0]["ppl"] == pytest.approx(math.sqrt(2), abs=1e-12)
