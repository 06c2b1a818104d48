"""Command-line entry points.

Subcommands:
  validate-tree   check a career-tree JSON file, printing violations and
                  authoring warnings (for the people who curate trees)
  ingest-courses  filter a course CSV, generate outcomes, embed, and write
                  a collection snapshot
  serve           run the HTTP API
  report          render a profile's skill report to CSV files and charts
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .career_tree import load_tree_file
from .config import build_runtime, load_config
from .courses import DEFAULT_COURSE_KEYWORDS, index_courses, ingest_csv
from .errors import CoachError, InvalidTree
from .gateway import HttpProvider, LlmGateway, StubProvider
from .report import write_profile_report
from .store import ProfileStore
from .templates import TemplateSet


def _cmd_validate_tree(args) -> int:
    try:
        tree = load_tree_file(args.tree)
    except InvalidTree as exc:
        print(f"INVALID: {args.tree}")
        for violation in exc.detail.get("violations", []):
            print(f"  - {json.dumps(violation, sort_keys=True)}")
        return 1
    print(f"OK: {args.tree} ({len(tree.nodes)} nodes, roots={list(tree.roots)})")
    for warning in tree.warnings:
        print(f"  warning: {warning}")
    return 0


def _cmd_ingest_courses(args) -> int:
    gateway = LlmGateway()
    if args.stub_script:
        gateway.register_provider("stub", StubProvider.from_file(args.stub_script))
    else:
        gateway.register_provider("live", HttpProvider())
    templates = TemplateSet.load(args.templates_dir)

    keywords = ([k.strip() for k in args.keywords.split(",") if k.strip()]
                if args.keywords else list(DEFAULT_COURSE_KEYWORDS))
    records = ingest_csv(args.csv, keywords, gateway, templates)
    print(f"ingested {len(records)} courses from {args.csv}")

    if args.catalog_out:
        Path(args.catalog_out).write_text(
            json.dumps([r.to_dict() for r in records], indent=2,
                       ensure_ascii=False) + "\n",
            encoding="utf-8")
        print(f"wrote catalog to {args.catalog_out}")

    if args.snapshot_out:
        from .embeddings import DeterministicEmbedder, ServiceEmbedder

        if args.embedder == "deterministic":
            embedder = DeterministicEmbedder(seed=args.seed, dimension=args.dimension)
        else:
            embedder = ServiceEmbedder(dimension=args.dimension)
        collection = index_courses(records, args.collection, embedder)
        collection.save(args.snapshot_out)
        print(f"wrote snapshot {args.collection!r} "
              f"({len(collection)} vectors, dim {collection.dimension}) "
              f"to {args.snapshot_out}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    config = load_config(args.config)
    if args.store_dir:
        config.store_dir = Path(args.store_dir)
    pipeline, store = build_runtime(config)
    app = create_app(pipeline, store,
                     upload_limit_bytes=config.upload_limit_bytes)
    host, _, port = args.listen_addr.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def _cmd_report(args) -> int:
    store = ProfileStore(args.store_dir)
    profile = store.get(args.profile)
    paths = write_profile_report(profile, args.out_dir)
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="careercoach")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-tree", help="validate a career-tree JSON file")
    p.add_argument("tree", help="path to the tree JSON document")
    p.set_defaults(func=_cmd_validate_tree)

    p = sub.add_parser("ingest-courses",
                       help="filter a course CSV and build a vector snapshot")
    p.add_argument("--csv", required=True, help="course CSV (title, description, url, skills)")
    p.add_argument("--keywords", default="", help="comma-separated skills filter")
    p.add_argument("--collection", default="courses", help="collection name")
    p.add_argument("--catalog-out", default="", help="write ingested records as JSON")
    p.add_argument("--snapshot-out", default="", help="write the vector snapshot here")
    p.add_argument("--embedder", choices=["deterministic", "service"],
                   default="deterministic")
    p.add_argument("--dimension", type=int, default=32)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--stub-script", default="",
                   help="stub provider script for offline outcome generation")
    p.add_argument("--templates-dir", default=None)
    p.set_defaults(func=_cmd_ingest_courses)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--config", required=True, help="service config JSON")
    p.add_argument("--store-dir", default="", help="override the profile store directory")
    p.add_argument("--listen-addr", default="127.0.0.1:8000")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("report", help="render a profile's skill report to files")
    p.add_argument("--store-dir", required=True)
    p.add_argument("--profile", required=True, help="profile id")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_report)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CoachError as exc:
        print(f"error [{exc.code}]: {exc.message}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
