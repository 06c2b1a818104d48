"""HTTP surface tying the pipeline together.

Versioned JSON API under ``/v1``. Handlers are synchronous and run on the
framework's worker pool, so slow pipeline stages never block other
requests; per-profile write ordering is the store's job. Every error body
carries a stable machine-readable code — module errors map one-to-one onto
codes, and malformed input never surfaces as an uncoded 500.
"""

from __future__ import annotations

import logging

from fastapi import FastAPI, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import coach
from .career_tree import recommend_paths
from .clock import now_iso
from .errors import CoachError, EmptyDocument, UnmappableRole
from .ingest import MEDIA_PDF, MEDIA_TEXT, extract_text
from .pipeline import Pipeline
from .store import COURSE_STATUSES, CandidateProfile, ProfileStore

logger = logging.getLogger(__name__)

API_PREFIX = "/v1"

# one status per error code; everything else is a coded 500
STATUS_BY_CODE = {
    "unknown_profile": 404,
    "unknown_course": 404,
    "unknown_node": 404,
    "unknown_question": 404,
    "unmappable_role": 409,
    "no_mapping_yet": 409,
    "no_report_yet": 409,
    "illegal_transition": 409,
    "duplicate_provider": 409,
    "missing_benchmarks": 409,
    "no_gaps": 409,
    "unreadable_document": 422,
    "empty_document": 422,
    "empty_text": 422,
    "no_experience": 422,
    "conflicting_identity": 422,
    "invalid_tree": 422,
    "malformed_csv": 422,
    "dimension_mismatch": 422,
    "empty_collection": 409,
    "upload_too_large": 413,
    "invalid_body": 400,
    "schema_violation": 502,
    "provider_unavailable": 502,
    "embedder_unavailable": 502,
    "storage_unavailable": 503,
}


class ApiFault(CoachError):
    """API-layer states that have no originating module error."""

    def __init__(self, code: str, message: str, **detail):
        super().__init__(message, **detail)
        self.code = code


class CreateProfileBody(BaseModel):
    display_name: str


class AnswerBody(BaseModel):
    question_id: str
    answer: str


class ChatBody(BaseModel):
    text: str


class StatusBody(BaseModel):
    status: str


def _error_response(code: str, message: str, detail: dict | None = None,
                    status: int | None = None) -> JSONResponse:
    body = {"error": {"code": code, "message": message}}
    if detail:
        body["error"]["detail"] = detail
    return JSONResponse(status_code=status or STATUS_BY_CODE.get(code, 500),
                        content=body)


def _node_view(node) -> dict:
    return {"node_id": node.node_id, "title": node.title,
            "description": node.description}


def _require_mapping(profile: CandidateProfile) -> None:
    if profile.mapping is None:
        raise ApiFault("no_mapping_yet",
                       "profile has no role mapping yet; upload a resume or "
                       "pick a role through the questionnaire")


def resume_bundle(profile: CandidateProfile) -> dict:
    return {
        "parsed": profile.current_parsed.to_dict() if profile.current_parsed else None,
        "mapping": profile.mapping.to_dict() if profile.mapping else None,
        "report": profile.latest_report.to_dict() if profile.latest_report else None,
        "recommendations": (profile.recommendations.to_dict()
                            if profile.recommendations else None),
    }


def create_app(pipeline: Pipeline, store: ProfileStore,
               upload_limit_bytes: int = 10 * 1024 * 1024) -> FastAPI:
    app = FastAPI(title="careercoach", version="1")
    app.state.pipeline = pipeline
    app.state.store = store

    @app.exception_handler(CoachError)
    async def coach_error_handler(request: Request, exc: CoachError):
        return _error_response(exc.code, exc.message, exc.detail or None)

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return _error_response("invalid_body", "request body failed validation",
                               {"errors": [str(e.get("msg", e)) for e in exc.errors()]})

    @app.exception_handler(StarletteHTTPException)
    async def http_exception_handler(request: Request, exc: StarletteHTTPException):
        code = {404: "not_found", 405: "method_not_allowed"}.get(
            exc.status_code, f"http_{exc.status_code}")
        return _error_response(code, str(exc.detail), status=exc.status_code)

    @app.exception_handler(Exception)
    async def fallback_handler(request: Request, exc: Exception):
        logger.exception("unhandled error on %s", request.url.path)
        return _error_response("internal", "internal error", status=500)

    @app.get(API_PREFIX + "/health")
    def health():
        return {"status": "ok"}

    @app.post(API_PREFIX + "/profiles", status_code=201)
    def create_profile(body: CreateProfileBody):
        if not body.display_name.strip():
            raise ApiFault("invalid_body", "display_name must be non-empty")
        profile = store.create_profile(body.display_name)
        return {"profile_id": profile.profile_id}

    @app.get(API_PREFIX + "/profiles/{profile_id}")
    def get_profile(profile_id: str):
        return store.get(profile_id).to_dict()

    @app.post(API_PREFIX + "/profiles/{profile_id}/resume")
    def upload_resume(profile_id: str, file: UploadFile):
        store.get(profile_id)  # 404 before reading the upload
        try:
            data = file.file.read(upload_limit_bytes + 1)
        finally:
            file.file.close()  # upload spool is temporary by contract
        if len(data) > upload_limit_bytes:
            raise ApiFault("upload_too_large",
                           f"upload exceeds {upload_limit_bytes} bytes")
        if not data:
            raise EmptyDocument("uploaded file is empty")
        filename = file.filename or "resume"
        is_pdf = (filename.lower().endswith(".pdf")
                  or file.content_type == "application/pdf"
                  or data[:5].lstrip().startswith(b"%PDF"))
        document = extract_text(data, MEDIA_PDF if is_pdf else MEDIA_TEXT,
                                filename=filename)
        try:
            profile = store.append_resume(profile_id, document)
        except UnmappableRole as exc:
            exc.detail["fallback"] = {
                "hint": "no role matched this resume; answer the questionnaire "
                        "to pick your current role",
                "qa_endpoint": f"{API_PREFIX}/profiles/{profile_id}/qa",
            }
            raise
        return resume_bundle(profile)

    @app.get(API_PREFIX + "/profiles/{profile_id}/career-path")
    def career_path(profile_id: str):
        profile = store.get(profile_id)
        _require_mapping(profile)
        immediate, advanced = recommend_paths(profile.mapping, pipeline.tree)
        current = pipeline.tree.nodes[profile.mapping.node_id]
        return {
            "current_node": _node_view(current),
            "similarity": profile.mapping.similarity,
            "immediate": [_node_view(n) for n in immediate],
            "advanced": [_node_view(n) for n in advanced],
        }

    @app.get(API_PREFIX + "/profiles/{profile_id}/skill-report")
    def skill_report(profile_id: str):
        profile = store.get(profile_id)
        if profile.latest_report is None:
            raise ApiFault("no_report_yet", "no skill report yet; upload a resume")
        return profile.latest_report.to_dict()

    @app.get(API_PREFIX + "/profiles/{profile_id}/recommendations")
    def recommendations(profile_id: str):
        profile = store.get(profile_id)
        if profile.recommendations is None:
            raise ApiFault("no_report_yet",
                           "no recommendations yet; upload a resume")
        payload = profile.recommendations.to_dict()
        payload["course_tracker"] = [e.to_dict() for e in profile.course_tracker]
        return payload

    @app.get(API_PREFIX + "/profiles/{profile_id}/qa")
    def get_questions(profile_id: str):
        profile = store.get(profile_id)
        if not profile.qa.questions:
            questions = coach.generate_questions(
                profile.mapping, pipeline.tree, pipeline.gateway,
                pipeline.templates)
            profile = store.set_questions(profile_id, questions)
        return profile.qa.to_dict()

    @app.post(API_PREFIX + "/profiles/{profile_id}/qa")
    def post_answer(profile_id: str, body: AnswerBody):
        profile = store.record_answer(profile_id, body.question_id, body.answer)
        return {
            "qa": profile.qa.to_dict(),
            "report": (profile.latest_report.to_dict()
                       if profile.latest_report else None),
            "recommendations": (profile.recommendations.to_dict()
                                if profile.recommendations else None),
        }

    @app.post(API_PREFIX + "/profiles/{profile_id}/chat")
    def post_chat(profile_id: str, body: ChatBody):
        profile = store.get(profile_id)
        turns = []
        if not profile.chat:
            turns.append(coach.greeting_turn(profile.display_name,
                                             pipeline.templates))
        resume = profile.current_parsed
        if resume is None:
            raise ApiFault("no_report_yet", "upload a resume before chatting")
        candidate_turn = coach.ChatTurn(coach.SPEAKER_CANDIDATE, body.text,
                                        now_iso())
        reply = coach.chat_reply(
            profile.display_name, resume, profile.mapping,
            profile.latest_report, pipeline.tree,
            profile.chat + turns, body.text,
            pipeline.gateway, pipeline.templates)
        turns.extend([candidate_turn, reply])
        store.append_chat_turns(profile_id, turns)
        return {"turn": reply.to_dict()}

    @app.get(API_PREFIX + "/profiles/{profile_id}/summary")
    def takeaway_summary(profile_id: str):
        profile = store.get(profile_id)
        if profile.latest_report is None:
            raise ApiFault("no_report_yet", "no skill report to summarize yet")
        summary = coach.summarize_takeaways(
            profile.latest_report, profile.mapping, pipeline.tree,
            pipeline.gateway, pipeline.templates)
        return summary.to_dict()

    @app.put(API_PREFIX + "/profiles/{profile_id}/courses/{course_id}/status")
    def set_course_status(profile_id: str, course_id: str, body: StatusBody):
        if body.status not in COURSE_STATUSES:
            raise ApiFault("invalid_body", f"unknown status {body.status!r}")
        profile = store.set_course_status(profile_id, course_id, body.status)
        entry = profile.tracker_entry(course_id)
        return entry.to_dict()

    return app
