"""Command-line interface: batch generation, fact inspection, rendering, serving.

Exit codes: 0 success, 1 domain errors, 2 usage errors (argparse default).
Story files written here use the same document format as the HTTP service.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .documents import (
    build_story_document,
    from_story_document_record,
    to_story_document_record,
)
from .errors import FactweaverError
from .facts import FactType, from_fact_record, validate
from .generation import enumerate_facts
from .scoring import importance
from .search import Goal, RewardWeights, SearchConfig, StorySearch
from .service import DATA_DIR_ENV, create_app, render_document
from .table import load_csv

WEIGHT_TOLERANCE = 1e-3


def _parse_weights_flag(text: str) -> RewardWeights:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--weights expects d,l,c")
    try:
        d, l, c = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError("--weights entries must be numbers") from None
    total = d + l + c
    if abs(total - 1.0) > WEIGHT_TOLERANCE:
        raise argparse.ArgumentTypeError(
            f"weights sum to {total:g}; expected 1 (tolerance {WEIGHT_TOLERANCE})"
        )
    if abs(total - 1.0) > 1e-12:
        print(f"warning: weights renormalized from sum {total:g}", file=sys.stderr)
    return RewardWeights.normalized(d, l, c)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="factweaver",
        description="Generate, inspect and render visual data stories from CSV files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a story document from a CSV")
    gen.add_argument("csv", type=Path)
    gen.add_argument("--length", type=int, default=6)
    gen.add_argument("--weights", type=_parse_weights_flag, default=RewardWeights())
    gen.add_argument("--chart-diversity", type=float, default=0.0)
    budget = gen.add_mutually_exclusive_group(required=True)
    budget.add_argument("--time-limit", type=float, help="wall-clock budget in seconds")
    budget.add_argument("--iterations", type=int, help="iteration budget")
    gen.add_argument("--min-bits", type=float, default=None)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", type=Path, required=True)

    facts = sub.add_parser("facts", help="rank candidate facts by importance")
    facts.add_argument("csv", type=Path)
    facts.add_argument("--type", dest="fact_type", choices=[t.value for t in FactType])
    facts.add_argument("--top", type=int, default=10)
    facts.add_argument("--limit", type=int, default=20000, help="enumeration cap per type")

    render = sub.add_parser("render", help="render a story document")
    render.add_argument("story", type=Path)
    render.add_argument("--csv", type=Path, help="dataset (defaults to path stored in document)")
    render.add_argument("--mode", choices=["storyline", "swiper", "factsheet"], default="factsheet")
    render.add_argument("--out", type=Path, required=True)

    score = sub.add_parser("score", help="score a single fact record against a CSV")
    score.add_argument("csv", type=Path)
    score.add_argument("fact", type=Path)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--port", type=int, default=8801)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument(
        "--data-dir", default=None, help=f"defaults to ${DATA_DIR_ENV} or ./factweaver-data"
    )

    return parser


def _load_table(path: Path):
    return load_csv(path.read_bytes())


def _cmd_generate(args) -> int:
    table = _load_table(args.csv)
    goal = Goal(
        max_length=args.length,
        min_information_bits=args.min_bits,
        time_budget=args.time_limit,
        iteration_budget=args.iterations,
    )
    search = StorySearch(table, goal, args.weights, SearchConfig(), args.seed)
    story = search.run()
    params = {
        "goal": {
            "max_length": args.length,
            "min_information_bits": args.min_bits,
            "time_budget": args.time_limit,
            "iteration_budget": args.iterations,
        },
        "weights": {
            "diversity": args.weights.diversity,
            "logicality": args.weights.logicality,
            "integrity": args.weights.integrity,
        },
        "chart_diversity": args.chart_diversity,
        "seed": args.seed,
        "source_csv": str(args.csv),
    }
    document = build_story_document(
        story, table, dataset_id=args.csv.name, params=params, scorer=search.scorer
    )
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(
        json.dumps(to_story_document_record(document), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    print(f"wrote {args.out} ({len(story.facts)} facts, reward {story.reward:.6f})")
    return 0


def _cmd_facts(args) -> int:
    table = _load_table(args.csv)
    types = [FactType(args.fact_type)] if args.fact_type else list(FactType)
    scored = []
    for fact_type in types:
        for fact in enumerate_facts(table, fact_type, limit=args.limit):
            score = importance(fact, table)
            scored.append((score.importance, fact, score))
    scored.sort(key=lambda item: -item[0])
    from .facts import to_fact_record

    out = []
    for imp, fact, score in scored[: args.top]:
        record = to_fact_record(fact)
        record["importance"] = imp
        record["significance"] = score.significance
        record["self_information_bits"] = score.self_information_bits
        out.append(record)
    json.dump(out, sys.stdout, indent=2)
    print()
    return 0


def _cmd_render(args) -> int:
    record = json.loads(args.story.read_text(encoding="utf-8"))
    csv_path = args.csv or Path(record.get("params", {}).get("source_csv", ""))
    if not csv_path or not Path(csv_path).exists():
        print("error: dataset CSV not found; pass --csv", file=sys.stderr)
        return 1
    table = _load_table(Path(csv_path))
    document = from_story_document_record(record, table)
    body, _ = render_document(document, table, args.mode)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(body, encoding="utf-8")
    print(f"wrote {args.out}")
    return 0


def _cmd_score(args) -> int:
    table = _load_table(args.csv)
    fact = from_fact_record(json.loads(args.fact.read_text(encoding="utf-8")))
    problems = validate(fact, table)
    if problems:
        print("invalid fact:", file=sys.stderr)
        for p in problems:
            print(f"  - {p}", file=sys.stderr)
        return 1
    score = importance(fact, table)
    json.dump(
        {
            "probability": score.probability,
            "self_information_bits": score.self_information_bits,
            "significance": score.significance,
            "importance": score.importance,
            "zero_support": score.zero_support,
        },
        sys.stdout,
        indent=2,
    )
    print()
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    data_dir = args.data_dir or os.environ.get(DATA_DIR_ENV)
    app = create_app(data_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def run(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "generate": _cmd_generate,
        "facts": _cmd_facts,
        "render": _cmd_render,
        "score": _cmd_score,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FactweaverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
