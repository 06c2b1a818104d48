"""Service configuration: one JSON file naming the tree, skills, templates,
collection snapshot, embedder, and provider. Relative paths resolve against
the config file's own directory so a config directory is relocatable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .career_tree import load_tree_file
from .courses import VectorCollection
from .embeddings import DETERMINISTIC_KIND, EmbedderConfig, build_embedder
from .gateway import HttpProvider, LlmGateway, StubProvider
from .pipeline import Pipeline
from .skills import SkillsStore
from .store import ProfileStore
from .templates import TemplateSet

DEFAULT_UPLOAD_LIMIT = 10 * 1024 * 1024  # bytes


@dataclass
class AppConfig:
    tree_path: Path
    skills_path: Path
    snapshot_path: Path | None = None
    templates_dir: Path | None = None
    store_dir: Path = Path("./store")
    embedder: EmbedderConfig = field(
        default_factory=lambda: EmbedderConfig(DETERMINISTIC_KIND, 32, seed=42))
    provider_kind: str = "stub"
    stub_script_path: Path | None = None
    retry_limit: int = 2
    chunk_budget: int = 3000
    chunk_overlap: int = 200
    mapping_threshold: float = 0.35
    recommend_k: int = 5
    upload_limit_bytes: int = DEFAULT_UPLOAD_LIMIT


def load_config(path: str | Path) -> AppConfig:
    path = Path(path)
    raw = json.loads(path.read_text(encoding="utf-8"))
    base = path.parent

    def resolve(key: str) -> Path | None:
        value = raw.get(key)
        return (base / value).resolve() if value else None

    embedder_raw = raw.get("embedder", {})
    embedder = EmbedderConfig(
        embedder_kind=embedder_raw.get("kind", DETERMINISTIC_KIND),
        dimension=int(embedder_raw.get("dimension", 32)),
        seed=int(embedder_raw.get("seed", 42)),
        endpoint=embedder_raw.get("endpoint", ""),
    )
    provider_raw = raw.get("provider", {})
    return AppConfig(
        tree_path=resolve("tree_path"),
        skills_path=resolve("skills_path"),
        snapshot_path=resolve("snapshot_path"),
        templates_dir=resolve("templates_dir"),
        store_dir=resolve("store_dir") or (base / "store"),
        embedder=embedder,
        provider_kind=provider_raw.get("kind", "stub"),
        stub_script_path=(base / provider_raw["script_path"]).resolve()
            if provider_raw.get("script_path") else None,
        retry_limit=int(raw.get("retry_limit", 2)),
        chunk_budget=int(raw.get("chunk_budget", 3000)),
        chunk_overlap=int(raw.get("chunk_overlap", 200)),
        mapping_threshold=float(raw.get("mapping_threshold", 0.35)),
        recommend_k=int(raw.get("recommend_k", 5)),
        upload_limit_bytes=int(raw.get("upload_limit_bytes", DEFAULT_UPLOAD_LIMIT)),
    )


def build_runtime(config: AppConfig) -> tuple[Pipeline, ProfileStore]:
    """Wire the whole service from a config: gateway, embedder, tree,
    benchmarks, collection, templates, pipeline, store."""
    gateway = LlmGateway(retry_limit=config.retry_limit)
    if config.provider_kind == "stub":
        if config.stub_script_path is None:
            raise ValueError("stub provider needs provider.script_path")
        gateway.register_provider("stub", StubProvider.from_file(
            str(config.stub_script_path)))
    elif config.provider_kind == "live":
        gateway.register_provider("live", HttpProvider())
    else:
        raise ValueError(f"unknown provider kind {config.provider_kind!r}")

    embedder = build_embedder(config.embedder)
    tree = load_tree_file(config.tree_path)
    skills_store = SkillsStore.load_file(config.skills_path, tree=tree)
    collection = (VectorCollection.load(config.snapshot_path)
                  if config.snapshot_path and Path(config.snapshot_path).exists()
                  else None)
    if collection is not None and collection.dimension != embedder.dimension:
        raise ValueError(
            f"snapshot dimension {collection.dimension} does not match "
            f"embedder dimension {embedder.dimension}")
    templates = TemplateSet.load(config.templates_dir)

    pipeline = Pipeline(
        gateway=gateway, embedder=embedder, tree=tree,
        skills_store=skills_store, collection=collection, templates=templates,
        chunk_budget=config.chunk_budget, chunk_overlap=config.chunk_overlap,
        mapping_threshold=config.mapping_threshold,
        recommend_k=config.recommend_k,
    )
    store = ProfileStore(config.store_dir, pipeline=pipeline)
    return pipeline, store
