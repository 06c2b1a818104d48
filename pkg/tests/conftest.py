"""Shared fixtures: the sample tree/skills/resume/catalog universe, stub
provider scripts built from the same request builders the pipeline uses,
and a ready-to-call API client."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from careercoach.api import create_app
from careercoach.career_tree import RoleMapping, load_tree_file
from careercoach.coach import build_questions_request
from careercoach.courses import CourseRecord, build_outcomes_request, index_courses
from careercoach.embeddings import DeterministicEmbedder
from careercoach.gateway import LlmGateway, StubProvider, request_fingerprint
from careercoach.ingest import build_extraction_request, chunk_text
from careercoach.pipeline import Pipeline
from careercoach.skills import SkillsStore
from careercoach.store import ProfileStore
from careercoach.templates import TemplateSet

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
FIXTURES_DIR = Path(__file__).resolve().parent / "fixtures"

RESUME_TEXT = (DATA_DIR / "sample_resume.txt").read_text(encoding="utf-8")

# what the scripted extractor returns for the sample resume; mirrors
# sample_resume.txt so evidence collection sees consistent facts
PARSED_RESUME = {
    "name": "Jordan Rivera",
    "contacts": [
        {"kind": "email", "value": "jordan.rivera@example.com"},
        {"kind": "phone", "value": "(555) 201-3344"},
        {"kind": "url", "value": "github.com/jordanrivera"},
    ],
    "education": [
        {"institution": "State University", "credential": "B.S. Computer Science",
         "start": "2016", "end": "2020"},
    ],
    "experience": [
        {"title": "Software Engineer II", "organization": "Acme Analytics",
         "start": "March 2022", "end": "June 2025",
         "bullets": [
             "Built and shipped backend services for the reporting platform in Python, owning features end to end.",
             "Designed REST endpoints and tuned SQL queries powering customer dashboards.",
             "Reviewed code for two junior engineers and led the migration of batch jobs to Git-based CI.",
             "Debugged production incidents in the data pipeline and added regression tests in Python.",
         ]},
        {"title": "Software Engineer I", "organization": "Acme Analytics",
         "start": "January 2020", "end": "March 2022",
         "bullets": [
             "Implemented product features in Python under guidance from senior engineers.",
             "Wrote SQL reports and maintained Git workflows for the analytics team.",
             "Deployed services to a Kubernetes cluster during the platform migration.",
         ]},
    ],
    "technical_skills": [
        {"name": "Python", "context_snippets": [
            "Built and shipped backend services for the reporting platform in Python"]},
        {"name": "SQL", "context_snippets": [
            "Designed REST endpoints and tuned SQL queries powering customer dashboards."]},
        {"name": "Git", "context_snippets": [
            "led the migration of batch jobs to Git-based CI"]},
        {"name": "REST APIs", "context_snippets": ["Designed REST endpoints"]},
    ],
    "soft_skills": [
        {"name": "collaboration",
         "justification": "Worked across the reporting platform with junior engineers and the analytics team."},
        {"name": "communication",
         "justification": "Reviewed code and documented production incident fixes."},
    ],
    "certifications": [],
    "projects": [],
}

FIXTURE_QUESTIONS = [
    {"text": "Are you aiming for a senior engineering role next, or exploring other tracks?",
     "kind": "aspiration"},
    {"text": "How comfortable are you designing a service end to end without guidance?",
     "kind": "skill_probe"},
    {"text": "How deep is your operational experience with Kubernetes?",
     "kind": "skill_probe"},
    {"text": "Have you mentored or onboarded other engineers?",
     "kind": "skill_probe"},
    {"text": "Do you learn best from courses, documentation, or pairing?",
     "kind": "preference"},
]

# answer to the Kubernetes skill probe that carries the self-attested
# advanced-usage signal and thereby closes the kubernetes gap
KUBERNETES_PROMOTION_ANSWER = ("Yes - I run our production clusters and "
                               "consider myself advanced with Kubernetes.")

GENERIC_OUTCOMES = [
    "Apply the course material in a small project",
    "Explain the core concepts to a teammate",
    "Pass a practical assessment on the topic",
]

TIMESTAMP_KEYS = {"uploaded_at", "mapped_at", "generated_at", "created_at",
                  "updated_at", "at", "answered_at"}


def strip_timestamps(value):
    """Recursively drop timestamp fields so deterministic payloads compare
    byte-for-byte."""
    if isinstance(value, dict):
        return {k: strip_timestamps(v) for k, v in value.items()
                if k not in TIMESTAMP_KEYS}
    if isinstance(value, list):
        return [strip_timestamps(v) for v in value]
    return value


def canonical(value) -> str:
    return json.dumps(strip_timestamps(value), sort_keys=True, ensure_ascii=False)


def build_stub_script(templates: TemplateSet, tree) -> dict[str, list[str]]:
    """Stub responses for every model call the fixture flows make."""
    script: dict[str, list[str]] = {}

    chunks = chunk_text(RESUME_TEXT)
    assert len(chunks) == 1, "sample resume should fit one chunk"
    extraction = build_extraction_request(chunks[0], templates)
    script[request_fingerprint(extraction)] = [json.dumps(PARSED_RESUME)]

    mapping = RoleMapping("software-engineer-ii", 1.0, "", "")
    questions = build_questions_request(mapping, tree, templates)
    script[request_fingerprint(questions)] = [
        json.dumps({"questions": FIXTURE_QUESTIONS})]

    # outcome generation for every sample CSV row; unmatched rows are
    # simply never asked for
    with open(DATA_DIR / "courses_sample.csv", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        for title, description, url, skills in reader:
            request = build_outcomes_request(title.strip(), description.strip(),
                                             skills, templates)
            script[request_fingerprint(request)] = [
                json.dumps({"outcomes": GENERIC_OUTCOMES})]
    return script


@pytest.fixture(scope="session")
def templates() -> TemplateSet:
    return TemplateSet.load()


@pytest.fixture(scope="session")
def tree():
    return load_tree_file(DATA_DIR / "career_tree.json")


@pytest.fixture(scope="session")
def skills_store(tree) -> SkillsStore:
    return SkillsStore.load_file(DATA_DIR / "skills.json", tree=tree)


@pytest.fixture(scope="session")
def embedder() -> DeterministicEmbedder:
    return DeterministicEmbedder(seed=42, dimension=32)


@pytest.fixture(scope="session")
def catalog() -> list[CourseRecord]:
    raw = json.loads((DATA_DIR / "course_catalog.json").read_text(encoding="utf-8"))
    return [CourseRecord.from_dict(r) for r in raw]


@pytest.fixture(scope="session")
def collection(catalog, embedder):
    return index_courses(catalog, "courses", embedder)


@pytest.fixture()
def stub_gateway(templates, tree) -> LlmGateway:
    gateway = LlmGateway()
    gateway.register_provider("stub", StubProvider(build_stub_script(templates, tree)))
    return gateway


@pytest.fixture()
def pipeline(stub_gateway, embedder, tree, skills_store, collection, templates):
    return Pipeline(
        gateway=stub_gateway, embedder=embedder, tree=tree,
        skills_store=skills_store, collection=collection, templates=templates,
    )


@pytest.fixture()
def store(tmp_path, pipeline) -> ProfileStore:
    return ProfileStore(tmp_path / "store", pipeline=pipeline)


@pytest.fixture()
def make_client(tmp_path, templates, tree, skills_store, embedder, collection):
    """Factory for API clients; tests can extend the stub script with
    fingerprints of requests only they make."""
    counter = iter(range(1000))

    def _make(extra_script: dict | None = None) -> TestClient:
        script = build_stub_script(templates, tree)
        script.update(extra_script or {})
        gateway = LlmGateway()
        gateway.register_provider("stub", StubProvider(script))
        pipeline = Pipeline(
            gateway=gateway, embedder=embedder, tree=tree,
            skills_store=skills_store, collection=collection,
            templates=templates)
        store = ProfileStore(tmp_path / f"store-{next(counter)}",
                             pipeline=pipeline)
        app = create_app(pipeline, store)
        return TestClient(app, raise_server_exceptions=False)

    return _make


@pytest.fixture()
def client(make_client) -> TestClient:
    return make_client()
