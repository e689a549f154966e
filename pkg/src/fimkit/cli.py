"""Command-line surface: mask inspection, training-data generation,
benchmark building, perplexity evaluation, and corpus statistics.

Every command is deterministic given (inputs, seed, config) and emits a run
manifest (config, seed, input digests) next to its output. Exit codes:
0 success, 1 I/O or config error, 2 empty output.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

from . import __version__
from .benchgen import (BenchFilters, build_benchmark, iter_pairs_jsonl,
                       iter_repo_pairs)
from .corpus import iter_corpus
from .evalkit import evaluate_files, score_prompts_file, write_prompts
from .fimgen import MixConfig, generate_to_file
from .masking import (ALIGNED_SPAN, MaskConfig, RAND_CHAR, SINGLE_NODE,
                      aligned_span_mask, rand_char_mask, select_mask,
                      single_node_mask)
from .rng import Rng
from .syntax import (ParseUnsupported, SourceDocument, is_parse_valid,
                     language_for_path, parse)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_EMPTY = 2


def _sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _digest_input(path: str) -> dict:
    if os.path.isfile(path):
        return {"path": path, "sha256": _sha256_file(path)}
    h = hashlib.sha256()
    n_files = 0
    for root, dirs, names in os.walk(path):
        dirs.sort()
        for name in sorted(names):
            fp = os.path.join(root, name)
            try:
                digest = _sha256_file(fp)
            except OSError:
                continue
            h.update(os.path.relpath(fp, path).encode())
            h.update(digest.encode())
            n_files += 1
    return {"path": path, "sha256": h.hexdigest(), "files": n_files}


def _write_manifest(out_path: str, command: str, config: dict,
                    seed: int | None, inputs: list[str],
                    outputs: list[str]) -> None:
    manifest = {
        "tool": "fimkit", "version": __version__, "command": command,
        "seed": seed, "config": config,
        "inputs": [_digest_input(p) for p in inputs],
        "outputs": outputs,
    }
    with open(out_path + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_mix_config(args) -> MixConfig:
    row: dict = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            row.update(json.load(fh))
    overrides = {
        "fim_rate": getattr(args, "fim_rate", None),
        "ast_fraction": getattr(args, "ast_fraction", None),
        "psm_fraction": getattr(args, "psm_fraction", None),
        "single_node_fraction": getattr(args, "single_node_fraction", None),
        "context_budget": getattr(args, "context_budget", None),
    }
    row.update({k: v for k, v in overrides.items() if v is not None})
    return MixConfig.from_dict(row)


# ---------------------------------------------------------------------------
# mask


def cmd_mask(args) -> int:
    try:
        with open(args.file, encoding="utf-8") as fh:
            content = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        print(f"error: cannot read {args.file}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    lang = args.lang or language_for_path(args.file)
    doc = SourceDocument(args.file, lang, content)
    if not content:
        print("error: empty file has no maskable span", file=sys.stderr)
        return EXIT_ERROR

    tree = None
    try:
        tree = parse(doc)
    except ParseUnsupported:
        pass
    if args.strategy in (SINGLE_NODE, ALIGNED_SPAN):
        if tree is None or not is_parse_valid(tree):
            print(f"error: {args.file} does not parse cleanly as {lang}; "
                  f"use --strategy rand_char or auto", file=sys.stderr)
            return EXIT_ERROR

    cfg = MaskConfig()
    reports = []
    for i in range(args.n):
        # stream id is path-independent so the same file content and seed
        # print the same masks wherever the file lives
        rng = Rng(args.seed, f"mask:{i}")
        if args.strategy == SINGLE_NODE:
            mask = single_node_mask(tree, rng)
        elif args.strategy == ALIGNED_SPAN:
            mask = aligned_span_mask(tree, doc, rng, cfg.max_resample_attempts)
        elif args.strategy == RAND_CHAR:
            mask = rand_char_mask(doc, rng)
        else:
            mask = select_mask(doc, tree, cfg, rng)
        reports.append({
            "index": i, "strategy": mask.strategy,
            "start": mask.span.start, "end": mask.span.end,
            "kinds": list(mask.node_kinds),
            "middle": doc.slice_bytes(mask.span),
        })

    if args.json:
        for rep in reports:
            print(json.dumps(rep, ensure_ascii=False, separators=(",", ":")))
    else:
        print(f"# file={args.file} lang={lang} strategy={args.strategy} "
              f"seed={args.seed} n={args.n}")
        for rep in reports:
            kinds = ",".join(rep["kinds"]) or "-"
            print(f"mask {rep['index'] + 1}/{args.n} "
                  f"strategy={rep['strategy']} "
                  f"span=[{rep['start']},{rep['end']}) kinds={kinds}")
            print(f"  middle={json.dumps(rep['middle'], ensure_ascii=False)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# gen


def cmd_gen(args) -> int:
    try:
        cfg = _load_mix_config(args)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if not os.path.exists(args.corpus):
        print(f"error: corpus not found: {args.corpus}", file=sys.stderr)
        return EXIT_ERROR
    try:
        stats = generate_to_file(args.corpus, args.out, cfg,
                                 seed=args.seed, workers=args.workers)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    stats_path = args.out + ".stats.json"
    with open(stats_path, "w", encoding="utf-8") as fh:
        json.dump(stats.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_manifest(args.out, "gen",
                    {**cfg.to_dict(), "workers": args.workers},
                    args.seed, [args.corpus], [args.out, stats_path])
    print(f"wrote {stats.records} records to {args.out} "
          f"(fim={stats.fim_records}, l2r={stats.l2r_records}, "
          f"skipped_files={stats.skipped_files})")
    return EXIT_OK if stats.records else EXIT_EMPTY


# ---------------------------------------------------------------------------
# bench


def cmd_bench_build(args) -> int:
    filters = BenchFilters(
        langs=frozenset(args.langs.split(",")) if args.langs else None,
        min_middle_lines=args.min_middle_lines,
        max_middle_lines=args.max_middle_lines,
        since=args.since, until=args.until,
        context_lines=args.context_lines,
    )
    errors: list[str] = []

    def on_error(what, exc):
        errors.append(f"{what}: {exc}")

    if args.pairs:
        if not os.path.isfile(args.pairs):
            print(f"error: pairs file not found: {args.pairs}", file=sys.stderr)
            return EXIT_ERROR
        pairs = iter_pairs_jsonl(args.pairs)
        inputs = [args.pairs]
    elif args.repos:
        if not os.path.isdir(args.repos):
            print(f"error: repo not found: {args.repos}", file=sys.stderr)
            return EXIT_ERROR
        pairs = iter_repo_pairs(args.repos, args.since, args.until, on_error)
        inputs = []  # a live repo is not content-digestable in a useful way
    else:
        print("error: one of --pairs or --repos is required", file=sys.stderr)
        return EXIT_ERROR

    try:
        examples, stats = build_benchmark(pairs, filters)
    except Exception as exc:  # noqa: BLE001 - ingestion failure is fatal
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    with open(args.out, "w", encoding="utf-8") as out:
        for ex in examples:
            out.write(json.dumps(ex.to_dict(), ensure_ascii=False,
                                 separators=(",", ":")))
            out.write("\n")
    stats_path = args.out + ".stats.json"
    with open(stats_path, "w", encoding="utf-8") as fh:
        payload = stats.to_dict()
        payload["ingest_errors"] = len(errors)
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_manifest(args.out, "bench build",
                    {"filters": {"langs": sorted(filters.langs) if filters.langs else None,
                                 "min_middle_lines": filters.min_middle_lines,
                                 "max_middle_lines": filters.max_middle_lines,
                                 "since": filters.since, "until": filters.until,
                                 "context_lines": filters.context_lines}},
                    None, inputs, [args.out, stats_path])
    print(f"wrote {stats.examples} examples to {args.out} "
          f"(Add={stats.by_split.get('Add', 0)}, "
          f"Edit={stats.by_split.get('Edit', 0)}, "
          f"skipped_hunks={stats.hunks_skipped}, "
          f"failed_pairs={stats.pairs_failed})")
    return EXIT_OK if stats.examples else EXIT_EMPTY


# ---------------------------------------------------------------------------
# eval


def cmd_eval_prompts(args) -> int:
    from .benchgen import BenchExample
    if not os.path.isfile(args.bench):
        print(f"error: bench file not found: {args.bench}", file=sys.stderr)
        return EXIT_ERROR
    examples = []
    with open(args.bench, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                examples.append(BenchExample.from_dict(json.loads(line)))
    count = write_prompts(examples, args.out, style=args.style)
    _write_manifest(args.out, "eval prompts", {"style": args.style}, None,
                    [args.bench], [args.out])
    print(f"wrote {count} prompts to {args.out}")
    return EXIT_OK if count else EXIT_EMPTY


def cmd_eval_score(args) -> int:
    if not os.path.isfile(args.prompts):
        print(f"error: prompts file not found: {args.prompts}", file=sys.stderr)
        return EXIT_ERROR
    count = score_prompts_file(args.prompts, args.out,
                               order=args.order, smoothing=args.smoothing)
    _write_manifest(args.out, "eval score",
                    {"order": args.order, "smoothing": args.smoothing},
                    None, [args.prompts], [args.out])
    print(f"scored {count} middles to {args.out}")
    return EXIT_OK if count else EXIT_EMPTY


def cmd_eval_ppl(args) -> int:
    for path in (args.prompts, args.scores):
        if not os.path.isfile(path):
            print(f"error: file not found: {path}", file=sys.stderr)
            return EXIT_ERROR
    keys = tuple(k for k in args.group_by.split(",") if k)
    try:
        per_example, summary = evaluate_files(args.prompts, args.scores, keys)
    except Exception as exc:  # noqa: BLE001 - malformed exchange files
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump({"summary": summary, "per_example": per_example},
                      fh, indent=2, sort_keys=True)
            fh.write("\n")
        _write_manifest(args.out, "eval ppl", {"group_by": list(keys)}, None,
                        [args.prompts, args.scores], [args.out])
    header = f"{'group':32s} {'count':>7s} {'mean':>9s} {'median':>9s} {'pooled':>9s}"
    print(header)
    rows = list(summary["groups"].items()) + [("ALL", summary["overall"])]
    for name, cell in rows:
        if cell.get("count"):
            print(f"{name:32s} {cell['count']:7d} {cell['mean_ppl']:9.4f} "
                  f"{cell['median_ppl']:9.4f} "
                  f"{cell.get('pooled_ppl', float('nan')):9.4f}")
    if summary.get("unscored_prompts"):
        print(f"unscored prompts: {summary['unscored_prompts']}")
    return EXIT_OK if per_example else EXIT_EMPTY


# ---------------------------------------------------------------------------
# stats


def cmd_stats(args) -> int:
    if not os.path.exists(args.corpus):
        print(f"error: corpus not found: {args.corpus}", file=sys.stderr)
        return EXIT_ERROR
    table: dict[str, dict] = {}
    skipped = 0

    def on_error(path, exc):
        nonlocal skipped
        skipped += 1

    for doc in iter_corpus(args.corpus, on_error=on_error):
        row = table.setdefault(doc.lang, {
            "files": 0, "bytes": 0, "parse_valid": 0, "parse_invalid": 0,
            "unsupported": 0})
        row["files"] += 1
        row["bytes"] += doc.byte_len
        try:
            tree = parse(doc)
            row["parse_valid" if is_parse_valid(tree) else "parse_invalid"] += 1
        except ParseUnsupported:
            row["unsupported"] += 1
    parsed = sum(r["parse_valid"] + r["parse_invalid"] for r in table.values())
    valid = sum(r["parse_valid"] for r in table.values())
    payload = {
        "by_lang": dict(sorted(table.items())),
        "files": sum(r["files"] for r in table.values()),
        "bytes": sum(r["bytes"] for r in table.values()),
        "parse_validity_rate": valid / parsed if parsed else 0.0,
        "skipped_files": skipped,
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        _write_manifest(args.out, "stats", {}, None, [args.corpus], [args.out])
    print(f"{'lang':12s} {'files':>7s} {'bytes':>12s} {'valid':>7s} "
          f"{'invalid':>8s} {'unsup':>6s}")
    for lang, row in sorted(table.items()):
        print(f"{lang:12s} {row['files']:7d} {row['bytes']:12d} "
              f"{row['parse_valid']:7d} {row['parse_invalid']:8d} "
              f"{row['unsupported']:6d}")
    print(f"total files={payload['files']} bytes={payload['bytes']} "
          f"validity={payload['parse_validity_rate']:.4f} skipped={skipped}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fimkit",
        description="Syntax-aware FIM training data, commit benchmarks, "
                    "and char-level perplexity scoring.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mask", help="inspect sampled masks for one file")
    p.add_argument("file")
    p.add_argument("--lang", default=None)
    p.add_argument("--strategy", default="auto",
                   choices=["auto", SINGLE_NODE, ALIGNED_SPAN, RAND_CHAR])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("gen", help="generate FIM/L2R training records")
    p.add_argument("corpus", help="directory tree or JSONL of documents")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--config", default=None, help="JSON MixConfig file")
    p.add_argument("--fim-rate", type=float, dest="fim_rate")
    p.add_argument("--ast-fraction", type=float, dest="ast_fraction")
    p.add_argument("--psm-fraction", type=float, dest="psm_fraction")
    p.add_argument("--single-node-fraction", type=float,
                   dest="single_node_fraction")
    p.add_argument("--context-budget", type=int, dest="context_budget")
    p.set_defaults(func=cmd_gen)

    bench = sub.add_parser("bench", help="benchmark construction")
    bench_sub = bench.add_subparsers(dest="bench_command", required=True)
    p = bench_sub.add_parser("build", help="build Add/Edit examples")
    p.add_argument("--repos", default=None, help="local repository clone")
    p.add_argument("--pairs", default=None, help="JSONL of before/after pairs")
    p.add_argument("--out", required=True)
    p.add_argument("--since", default=None)
    p.add_argument("--until", default=None)
    p.add_argument("--langs", default=None, help="comma-separated allow-list")
    p.add_argument("--min-middle-lines", type=int, default=1)
    p.add_argument("--max-middle-lines", type=int, default=None)
    p.add_argument("--context-lines", type=int, default=None)
    p.set_defaults(func=cmd_bench_build)

    ev = sub.add_parser("eval", help="perplexity evaluation")
    ev_sub = ev.add_subparsers(dest="eval_command", required=True)
    p = ev_sub.add_parser("prompts", help="render prompts from bench examples")
    p.add_argument("--bench", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--style", default="fim", choices=["fim", "l2r"])
    p.set_defaults(func=cmd_eval_prompts)
    p = ev_sub.add_parser("score", help="score prompts with the n-gram model")
    p.add_argument("--prompts", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--smoothing", type=float, default=0.5)
    p.set_defaults(func=cmd_eval_score)
    p = ev_sub.add_parser("ppl", help="character-level perplexity report")
    p.add_argument("--prompts", required=True)
    p.add_argument("--scores", required=True)
    p.add_argument("--group-by", default="split,lang", dest="group_by")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval_ppl)

    p = sub.add_parser("stats", help="corpus language/validity statistics")
    p.add_argument("corpus")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
