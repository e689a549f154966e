"""Command-line behavior: goldens, determinism, exit codes, sidecars."""

import json
import math
import subprocess

import pytest

from fimkit.cli import main
from fimkit.synth import synth_corpus

GOLDEN_SOURCE = "def add(a, b):\n    total = a + b\n    return total\n"


@pytest.fixture()
def golden_file(tmp_path):
    p = tmp_path / "golden.py"
    p.write_text(GOLDEN_SOURCE)
    return str(p)


class TestMask:
    def test_golden_output_fixed_seed(self, golden_file, capsys):
        # frozen from a reference run; any change is a determinism break
        assert main(["mask", golden_file, "--strategy", "single_node",
                     "--seed", "7", "--n", "3", "--json"]) == 0
        lines = [json.loads(l) for l in
                 capsys.readouterr().out.strip().splitlines()]
        assert [(r["start"], r["end"]) for r in lines] == \
            [(19, 32), (0, 49), (37, 49)]
        assert [r["kinds"] for r in lines] == \
            [["assignment"], ["function_definition"], ["return_statement"]]
        assert lines[0]["middle"] == "total = a + b"

    def test_repeat_is_identical(self, golden_file, capsys):
        main(["mask", golden_file, "--seed", "3", "--n", "5"])
        first = capsys.readouterr().out
        main(["mask", golden_file, "--seed", "3", "--n", "5"])
        assert capsys.readouterr().out == first

    def test_rand_char_on_broken_file(self, tmp_path, capsys):
        p = tmp_path / "broken.py"
        p.write_text("def broken(:\n  ((")
        assert main(["mask", str(p), "--strategy", "rand_char"]) == 0

    def test_ast_strategy_on_broken_file_errors(self, tmp_path, capsys):
        p = tmp_path / "broken.py"
        p.write_text("def broken(:\n  ((")
        assert main(["mask", str(p), "--strategy", "single_node"]) == 1

    def test_unreadable_file(self, capsys):
        assert main(["mask", "/definitely/not/here.py"]) == 1


class TestGen:
    def test_determinism_across_workers(self, tmp_path, capsys):
        corpus = tmp_path / "corpus"
        synth_corpus(str(corpus), 10, seed=2, langs=("python", "javascript"))
        outs = []
        for w in ("1", "2", "4"):
            out = tmp_path / f"o{w}.jsonl"
            assert main(["gen", str(corpus), "--out", str(out),
                         "--seed", "5", "--workers", w]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1] == outs[2]

    def test_stats_sidecar_and_manifest(self, tmp_path, capsys):
        corpus = tmp_path / "corpus"
        synth_corpus(str(corpus), 30, seed=4, langs=("python",))
        out = tmp_path / "records.jsonl"
        assert main(["gen", str(corpus), "--out", str(out),
                     "--seed", "1"]) == 0
        stats = json.loads((tmp_path / "records.jsonl.stats.json").read_text())
        assert stats["records"] == 30
        assert 0 < stats["fim_rate_realized"] < 1
        manifest = json.loads(
            (tmp_path / "records.jsonl.manifest.json").read_text())
        assert manifest["seed"] == 1
        assert manifest["config"]["fim_rate"] == 0.7
        assert manifest["inputs"][0]["sha256"]

    def test_fim_rate_zero_all_l2r(self, tmp_path, capsys):
        corpus = tmp_path / "corpus"
        synth_corpus(str(corpus), 5, seed=0, langs=("go",))
        out = tmp_path / "o.jsonl"
        assert main(["gen", str(corpus), "--out", str(out),
                     "--fim-rate", "0"]) == 0
        kinds = {json.loads(l)["kind"] for l in out.read_text().splitlines()}
        assert kinds == {"l2r"}

    def test_empty_corpus_exit_2(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        out = tmp_path / "o.jsonl"
        assert main(["gen", str(empty), "--out", str(out)]) == 2

    def test_config_file_plus_override(self, tmp_path, capsys):
        corpus = tmp_path / "corpus"
        synth_corpus(str(corpus), 4, seed=0, langs=("python",))
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"fim_rate": 0.0, "psm_fraction": 1.0}))
        out = tmp_path / "o.jsonl"
        assert main(["gen", str(corpus), "--out", str(out),
                     "--config", str(cfg), "--fim-rate", "1.0"]) == 0
        rows = [json.loads(l) for l in out.read_text().splitlines()]
        assert all(r["kind"] == "fim" for r in rows)  # override wins
        assert all(r["mode"] == "psm" for r in rows)  # file setting kept


def _make_repo(root):
    def git(*args):
        subprocess.run(["git", "-C", str(root), *args], check=True,
                       capture_output=True)
    git("init", "-q")
    git("config", "user.email", "t@example.com")
    git("config", "user.name", "t")
    (root / "calc.py").write_text("def add(a, b):\n    return a + b\n")
    git("add", "-A")
    git("commit", "-qm", "init")
    (root / "calc.py").write_text(
        "def add(a, b):\n    return a + b\n\ndef mul(a, b):\n    return a * b\n")
    git("commit", "-qam", "add mul")
    (root / "calc.py").write_text(
        "def add(a, b):\n    return a + b + 0\n\ndef mul(a, b):\n    return a * b\n")
    git("commit", "-qam", "tweak add")


class TestBenchAndEval:
    def test_full_pipeline(self, tmp_path, capsys):
        repo = tmp_path / "repo"
        repo.mkdir()
        _make_repo(repo)
        bench = tmp_path / "bench.jsonl"
        assert main(["bench", "build", "--repos", str(repo),
                     "--out", str(bench)]) == 0
        rows = [json.loads(l) for l in bench.read_text().splitlines()]
        assert sorted(r["split"] for r in rows) == ["Add", "Edit"]

        prompts = tmp_path / "prompts.jsonl"
        scores = tmp_path / "scores.jsonl"
        assert main(["eval", "prompts", "--bench", str(bench),
                     "--out", str(prompts)]) == 0
        assert main(["eval", "score", "--prompts", str(prompts),
                     "--out", str(scores)]) == 0
        report = tmp_path / "report.json"
        assert main(["eval", "ppl", "--prompts", str(prompts),
                     "--scores", str(scores), "--out", str(report)]) == 0
        summary = json.loads(report.read_text())["summary"]
        assert summary["overall"]["count"] == 2

    def test_eval_ppl_closed_form(self, tmp_path, capsys):
        prompts = tmp_path / "p.jsonl"
        scores = tmp_path / "s.jsonl"
        prompts.write_text(json.dumps(
            {"id": "e", "prompt": "x", "middle": "ab",
             "split": "Add", "lang": "py"}) + "\n")
        scores.write_text(json.dumps(
            {"id": "e",
             "tokens": [{"text": "ab", "logprob": math.log(0.5)}]}) + "\n")
        report = tmp_path / "r.json"
        assert main(["eval", "ppl", "--prompts", str(prompts),
                     "--scores", str(scores), "--out", str(report)]) == 0
        got = json.loads(report.read_text())["per_example"][0]["ppl"]
        assert got == pytest.approx(math.sqrt(2), abs=1e-12)

    def test_bench_empty_exit_2(self, tmp_path, capsys):
        pairs = tmp_path / "pairs.jsonl"
        pairs.write_text("")
        out = tmp_path / "bench.jsonl"
        assert main(["bench", "build", "--pairs", str(pairs),
                     "--out", str(out)]) == 2


class TestStats:
    def test_empty_dir_zero_counts_exit_0(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert main(["stats", str(empty)]) == 0
        out = capsys.readouterr().out
        assert "total files=0" in out

    def test_counts_and_validity(self, tmp_path, capsys):
        corpus = tmp_path / "corpus"
        synth_corpus(str(corpus), 3, seed=1, langs=("python", "rust"))
        (corpus / "broken.py").write_text("def broken(:\n  ((")
        report = tmp_path / "stats.json"
        assert main(["stats", str(corpus), "--out", str(report)]) == 0
        payload = json.loads(report.read_text())
        assert payload["files"] == 7
        assert payload["by_lang"]["python"]["parse_invalid"] == 1
        assert payload["parse_validity_rate"] == pytest.approx(6 / 7)
