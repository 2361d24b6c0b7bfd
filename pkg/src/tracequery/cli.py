"""Command-line entry point.

Subcommands: `generate` builds an episode library, `query` searches one,
`serve` exposes the HTTP API, `selfcheck` runs the randomized
verification suites.  `query` goes through the same validation and
engine paths as the HTTP API, so both shells return identical clips for
identical (query, seed).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

from .abstraction import AGENT_KINDS, SimConfig, simulate
from .automata import StateBudgetExceeded
from .engine import SearchConfig, run_query
from .ltlf import FormulaSyntaxError, UnknownPredicateError
from .querylang import SchemaError, validate
from .selfcheck import run_all
from .store import StoreError, build_library, load_library, save_library
from .wire import query_result_payload


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tracequery",
        description="Generate, query and serve libraries of abstracted agent traces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="simulate episodes into a library file")
    gen.add_argument("--episodes", type=int, default=20)
    gen.add_argument("--steps", type=int, default=200)
    gen.add_argument("--agent", choices=AGENT_KINDS, default="plain")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--lanes", type=int, default=4)
    gen.add_argument("--npcs", type=int, default=6)
    gen.add_argument("--config", help="JSON file with extra SimConfig fields")
    gen.add_argument("--out", required=True)

    query = sub.add_parser("query", help="search a library for matching clips")
    query.add_argument("--library", required=True)
    query.add_argument("--start", help="comma-separated literals, e.g. lane-1,behind")
    query.add_argument("--end", help="comma-separated literals")
    query.add_argument(
        "--constraint-kind", choices=("changes", "stays_constant", "changes_into")
    )
    query.add_argument("--c", help="constraint literals")
    query.add_argument("--c-prime", help="changes_into target literals")
    query.add_argument("--ltlf", help="raw formula text instead of the template")
    query.add_argument("--min-len", type=int, default=5)
    query.add_argument("--max-len", type=int, default=60)
    query.add_argument("--max-results", type=int, default=4)
    query.add_argument("--seed", type=int)
    query.add_argument("--format", choices=("text", "structured"), default="text")

    serve = sub.add_parser("serve", help="run the HTTP API")
    serve.add_argument("--library", required=True)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--ui", help="directory with the built web UI to mount at /")

    check = sub.add_parser("selfcheck", help="run the randomized verification suites")
    check.add_argument("--fast", action="store_true", help="reduced case counts")

    return parser


def _literals(text: str | None) -> list[str]:
    if not text:
        return []
    return [part.strip() for part in text.split(",") if part.strip()]


def _cmd_generate(args: argparse.Namespace) -> int:
    overrides = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            overrides = json.load(fh)
        if "trigger" in overrides:
            overrides["trigger"] = tuple(overrides["trigger"])
    cfg = SimConfig(
        **{
            "lanes": args.lanes,
            "steps": args.steps,
            "npc_count": args.npcs,
            **overrides,
        }
    )
    episodes = [
        simulate(cfg, args.seed + i, args.agent, f"ep-{i:04d}")
        for i in range(args.episodes)
    ]
    library = build_library(
        episodes,
        provenance={
            "base_seed": args.seed,
            "agent_kind": args.agent,
            "config": asdict(cfg),
        },
    )
    save_library(library, args.out)
    total = sum(len(ep.steps) for ep in episodes)
    print(f"wrote {len(episodes)} episodes ({total} letters) to {args.out}")
    return 0


def _cmd_query(args: argparse.Namespace) -> int:
    library = load_library(args.library)
    if args.ltlf:
        if args.start or args.end or args.constraint_kind:
            print("error: give either --ltlf or the template flags, not both",
                  file=sys.stderr)
            return 1
        query = args.ltlf
    else:
        body: dict = {"start": _literals(args.start), "end": _literals(args.end)}
        if args.constraint_kind:
            body["constraint"] = {
                "kind": args.constraint_kind,
                "c": _literals(args.c),
                "c_prime": _literals(args.c_prime) or None,
            }
        else:
            body["constraint"] = None
        query = validate(body, library.vocab)

    cfg = SearchConfig(
        min_len=args.min_len,
        max_len=args.max_len,
        max_results=args.max_results,
        sample_seed=args.seed,
    )
    result = run_query(library, query, cfg)

    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)

    if args.format == "structured":
        print(json.dumps(query_result_payload(result), indent=2))
        return 0

    print(f"formula: {result.formula}")
    print(f"seed: {result.sample_seed}")
    print(f"matches: {result.total_matches} total, showing {len(result.clips)}")
    for clip in result.clips:
        print(f"clip {clip.clip_id} (k={clip.k}, ell={clip.ell}, len={len(clip.frames)})")
        for frame in clip.frames:
            letters = " ".join(sorted(frame.letter))
            print(f"  {frame.raw.step + 1:>4}: [{frame.active_policy}] {letters}")
    if not result.clips:
        print("no matching clips")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    library = load_library(args.library)
    app = create_app(library, ui_dir=args.ui)
    print(f"serving {len(library.episodes)} episodes on {args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _cmd_selfcheck(args: argparse.Namespace) -> int:
    results = run_all(fast=args.fast)
    failed = False
    for result in results:
        print(result.summary())
        for failure in result.failures[:10]:
            print(f"  {failure}")
        failed = failed or not result.ok
    return 1 if failed else 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "generate": _cmd_generate,
        "query": _cmd_query,
        "serve": _cmd_serve,
        "selfcheck": _cmd_selfcheck,
    }
    try:
        return handlers[args.command](args)
    except (
        SchemaError,
        UnknownPredicateError,
        FormulaSyntaxError,
        StateBudgetExceeded,
        StoreError,
        ValueError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
