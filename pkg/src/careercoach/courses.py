"""Course catalog ingestion, composite-vector indexing, and top-k cosine
retrieval for gap-derived queries.

Retrieval is an exact linear scan over an immutable collection snapshot.
At catalog scale exactness is cheap, results are reproducible (ties break
on course id), and the oracle tests stay meaningful. The snapshot records
the embedder configuration so a query can never be embedded in a different
space than the collection it searches.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .embeddings import EmbedderConfig, cosine
from .errors import (DimensionMismatch, EmptyCollection, MalformedCsv, NoGaps,
                     SchemaViolation)
from .gateway import LlmGateway, LlmRequest, Message
from .skills import SkillAssessmentReport, SkillGap
from .templates import TemplateSet

logger = logging.getLogger(__name__)

REQUIRED_CSV_COLUMNS = ("title", "description", "url", "skills")

# the keyword filter the shipped catalog was curated with
DEFAULT_COURSE_KEYWORDS = ("Python", "TensorFlow", "Agile", "Git", "DevOps", "SQL", "R")

DEFAULT_TOP_K = 5


@dataclass
class CourseRecord:
    course_id: str
    title: str
    description: str
    url: str
    skills_tags: list[str] = field(default_factory=list)
    outcomes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "course_id": self.course_id,
            "title": self.title,
            "description": self.description,
            "url": self.url,
            "skills_tags": list(self.skills_tags),
            "outcomes": list(self.outcomes),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CourseRecord":
        return cls(
            course_id=data["course_id"],
            title=data["title"],
            description=data.get("description", ""),
            url=data["url"],
            skills_tags=list(data.get("skills_tags", [])),
            outcomes=list(data.get("outcomes", [])),
        )


@dataclass
class VectorEntry:
    course_id: str
    vector: list[float]
    payload: CourseRecord


@dataclass
class VectorCollection:
    name: str
    dimension: int
    entries: dict[str, VectorEntry] = field(default_factory=dict)
    embedder_config: EmbedderConfig | None = None

    def __len__(self) -> int:
        return len(self.entries)

    def save(self, path: str | Path) -> None:
        document = {
            "name": self.name,
            "dimension": self.dimension,
            "embedder": self.embedder_config.to_dict() if self.embedder_config else None,
            "entries": [
                {"course_id": e.course_id, "vector": e.vector,
                 "payload": e.payload.to_dict()}
                for e in self.entries.values()
            ],
        }
        Path(path).write_text(
            json.dumps(document, sort_keys=True, ensure_ascii=False), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "VectorCollection":
        document = json.loads(Path(path).read_text(encoding="utf-8"))
        collection = cls(
            name=document["name"],
            dimension=document["dimension"],
            embedder_config=(EmbedderConfig.from_dict(document["embedder"])
                             if document.get("embedder") else None),
        )
        for raw in document["entries"]:
            entry = VectorEntry(raw["course_id"], list(raw["vector"]),
                                CourseRecord.from_dict(raw["payload"]))
            collection.entries[entry.course_id] = entry
        return collection


@dataclass
class RecommendationQuery:
    query_text: str
    target_role_title: str
    gap_list: list[SkillGap]
    k: int = DEFAULT_TOP_K

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


def course_id_for_url(url: str) -> str:
    return "course-" + hashlib.sha256(url.encode("utf-8")).hexdigest()[:12]


def build_outcomes_request(title: str, description: str, skills: str,
                           templates: TemplateSet) -> LlmRequest:
    user = f"Title: {title}\nSkills: {skills}\nDescription: {description}"
    return LlmRequest(
        messages=(Message("system", templates.outcomes_prompt), Message("user", user)),
        output_schema=templates.outcomes_schema,
        temperature=0.0,
        max_output_tokens=512,
    )


def ingest_csv(source: str | Path | io.TextIOBase, keyword_filter: list[str],
               gateway: LlmGateway, templates: TemplateSet) -> list[CourseRecord]:
    """Read a course CSV, keep rows whose skills column matches a keyword,
    and generate outcomes for each kept course.

    Duplicate URLs collapse to the first occurrence, so re-ingesting the
    same file is idempotent. A course whose outcome generation fails the
    schema is skipped with a warning rather than failing the batch.
    """
    if isinstance(source, (str, Path)):
        handle = open(source, newline="", encoding="utf-8")
        close = True
    else:
        handle, close = source, False
    try:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedCsv("CSV file is empty")
        columns = {name.strip().lower(): i for i, name in enumerate(header)}
        missing = [c for c in REQUIRED_CSV_COLUMNS if c not in columns]
        if missing:
            raise MalformedCsv(f"missing columns: {missing}", missing=missing)

        keywords = [k.lower() for k in keyword_filter]
        records: list[CourseRecord] = []
        seen_urls: set[str] = set()
        for row_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise MalformedCsv(
                    f"row {row_number} has {len(row)} fields, expected {len(header)}",
                    row=row_number)
            skills_value = row[columns["skills"]]
            haystack = skills_value.lower()
            if not any(k in haystack for k in keywords):
                continue
            url = row[columns["url"]].strip()
            if not url or url in seen_urls:
                continue
            seen_urls.add(url)
            title = row[columns["title"]].strip()
            description = row[columns["description"]].strip()
            try:
                exchange = gateway.complete_structured(
                    build_outcomes_request(title, description, skills_value, templates))
            except SchemaViolation:
                logger.warning("skipping %r: outcome generation failed schema", title)
                continue
            records.append(CourseRecord(
                course_id=course_id_for_url(url),
                title=title,
                description=description,
                url=url,
                skills_tags=[s.strip() for s in skills_value.split(";") if s.strip()],
                outcomes=list(exchange.parsed["outcomes"]),
            ))
        return records
    finally:
        if close:
            handle.close()


def composite_text(course: CourseRecord) -> str:
    """The text a course embeds as: title, description, then outcomes."""
    return "\n".join([course.title, course.description] + list(course.outcomes))


def index_courses(courses: list[CourseRecord], collection_name: str, embedder,
                  existing: VectorCollection | None = None) -> VectorCollection:
    """Embed composite texts into a new collection snapshot.

    When re-indexing into an existing collection the dimensions must match;
    existing entries carry over and same-id entries are replaced.
    """
    if not courses:
        raise ValueError("no courses to index")
    if existing is not None and existing.dimension != embedder.dimension:
        raise DimensionMismatch(
            f"collection has dim {existing.dimension}, embedder {embedder.dimension}")

    collection = VectorCollection(
        name=collection_name,
        dimension=embedder.dimension,
        embedder_config=getattr(embedder, "config", None),
    )
    if existing is not None:
        collection.entries.update(existing.entries)
    vectors = embedder.embed_texts([composite_text(c) for c in courses])
    fresh: dict[str, VectorEntry] = {}
    for course, vector in zip(courses, vectors):
        fresh.setdefault(course.course_id, VectorEntry(course.course_id, vector, course))
    collection.entries.update(fresh)
    return collection


def build_query(report: SkillAssessmentReport, target,
                k: int = DEFAULT_TOP_K) -> RecommendationQuery:
    """Render the gap list into the retrieval query text for a target role."""
    if not report.gaps:
        raise NoGaps("report has no gaps to query for")
    gaps = sorted(report.gaps, key=lambda g: (-g.severity, g.skill_name.lower()))
    rendered = ", ".join(f"{g.skill_name} ({g.required_level.label})" for g in gaps)
    title = getattr(target, "title", str(target))
    return RecommendationQuery(
        query_text=f"Skills and technologies required for {title}: {rendered}",
        target_role_title=title,
        gap_list=gaps,
        k=k,
    )


def search(collection: VectorCollection, query: RecommendationQuery,
           embedder) -> list[tuple[CourseRecord, float]]:
    """Exact top-k scan: cosine against every entry, score descending with
    course-id tie-break.

    Scoring goes through the same fsum-based cosine as everything else, so
    entries with identical vectors tie exactly and the id tie-break is
    meaningful. (BLAS-style batched matmul gives position-dependent float
    results and silently breaks exact ties.)
    """
    if not collection.entries:
        raise EmptyCollection(f"collection {collection.name!r} is empty")
    query_vector = embedder.embed_texts([query.query_text])[0]
    if len(query_vector) != collection.dimension:
        raise DimensionMismatch(
            f"query dim {len(query_vector)} vs collection {collection.dimension}")

    ranked = sorted(
        ((entry, cosine(query_vector, entry.vector))
         for entry in collection.entries.values()),
        key=lambda pair: (-pair[1], pair[0].course_id))
    return [(entry.payload, score) for entry, score in ranked[:query.k]]
