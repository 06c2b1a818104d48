"""Candidate profile persistence plus the recalibration entry points.

One JSON document per profile, one JSONL event log per profile, canonical
serialization (sorted keys, fixed timestamp format) so round-trips are
byte-identical. Writes to the same profile serialize behind a per-profile
lock; distinct profiles proceed independently.

Mutations that change what the candidate told us (a new resume, a new or
revised answer) rerun the downstream pipeline through the injected
``pipeline`` object — appending to history is never rolled back even when
that rerun fails.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .clock import now_iso
from .coach import ChatTurn, QATranscript, record_answer
from .career_tree import RoleMapping
from .courses import CourseRecord
from .errors import (IllegalTransition, StorageUnavailable, UnknownCourse,
                     UnknownProfile)
from .ingest import ParsedResume, ResumeDocument
from .skills import SkillAssessmentReport

EVENT_KINDS = ("profile_upserted", "resume_uploaded", "answer_recorded",
               "recalibrated", "course_status_changed")

STATUS_RECOMMENDED = "recommended"
STATUS_IN_PROGRESS = "in_progress"
STATUS_COMPLETED = "completed"
COURSE_STATUSES = (STATUS_RECOMMENDED, STATUS_IN_PROGRESS, STATUS_COMPLETED)

LEGAL_TRANSITIONS = {
    (STATUS_RECOMMENDED, STATUS_IN_PROGRESS),
    (STATUS_IN_PROGRESS, STATUS_COMPLETED),
    (STATUS_RECOMMENDED, STATUS_COMPLETED),
}


@dataclass
class CourseTrackerEntry:
    course_id: str
    status: str
    updated_at: str

    def to_dict(self) -> dict:
        return {"course_id": self.course_id, "status": self.status,
                "updated_at": self.updated_at}

    @classmethod
    def from_dict(cls, data: dict) -> "CourseTrackerEntry":
        return cls(data["course_id"], data["status"], data["updated_at"])


@dataclass
class RecommendedCourse:
    course: CourseRecord
    score: float

    def to_dict(self) -> dict:
        return {"course": self.course.to_dict(), "score": self.score}

    @classmethod
    def from_dict(cls, data: dict) -> "RecommendedCourse":
        return cls(CourseRecord.from_dict(data["course"]), data["score"])


@dataclass
class RecommendationList:
    query_text: str = ""
    target_node_id: str = ""
    target_role_title: str = ""
    no_gaps: bool = False
    courses: list[RecommendedCourse] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "query_text": self.query_text,
            "target_node_id": self.target_node_id,
            "target_role_title": self.target_role_title,
            "no_gaps": self.no_gaps,
            "courses": [c.to_dict() for c in self.courses],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RecommendationList":
        return cls(
            query_text=data.get("query_text", ""),
            target_node_id=data.get("target_node_id", ""),
            target_role_title=data.get("target_role_title", ""),
            no_gaps=data.get("no_gaps", False),
            courses=[RecommendedCourse.from_dict(c) for c in data.get("courses", [])],
        )


@dataclass
class StoreEvent:
    event_id: int
    profile_id: str
    kind: str
    at: str
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"event_id": self.event_id, "profile_id": self.profile_id,
                "kind": self.kind, "at": self.at, "detail": self.detail}


@dataclass
class CandidateProfile:
    profile_id: str
    display_name: str
    resumes: list[ResumeDocument] = field(default_factory=list)
    current_parsed: ParsedResume | None = None
    mapping: RoleMapping | None = None
    latest_report: SkillAssessmentReport | None = None
    qa: QATranscript | None = None
    chat: list[ChatTurn] = field(default_factory=list)
    recommendations: RecommendationList | None = None
    course_tracker: list[CourseTrackerEntry] = field(default_factory=list)
    recommended_ever: list[str] = field(default_factory=list)
    created_at: str = ""
    updated_at: str = ""

    def __post_init__(self):
        if self.qa is None:
            self.qa = QATranscript(session_id=f"{self.profile_id}-qa")

    def tracker_entry(self, course_id: str) -> CourseTrackerEntry | None:
        for entry in self.course_tracker:
            if entry.course_id == course_id:
                return entry
        return None

    def to_dict(self) -> dict:
        return {
            "profile_id": self.profile_id,
            "display_name": self.display_name,
            "resumes": [r.to_dict() for r in self.resumes],
            "current_parsed": self.current_parsed.to_dict() if self.current_parsed else None,
            "mapping": self.mapping.to_dict() if self.mapping else None,
            "latest_report": self.latest_report.to_dict() if self.latest_report else None,
            "qa": self.qa.to_dict(),
            "chat": [t.to_dict() for t in self.chat],
            "recommendations": self.recommendations.to_dict() if self.recommendations else None,
            "course_tracker": [e.to_dict() for e in self.course_tracker],
            "recommended_ever": list(self.recommended_ever),
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CandidateProfile":
        return cls(
            profile_id=data["profile_id"],
            display_name=data["display_name"],
            resumes=[ResumeDocument.from_dict(r) for r in data.get("resumes", [])],
            current_parsed=(ParsedResume.from_dict(data["current_parsed"])
                            if data.get("current_parsed") else None),
            mapping=(RoleMapping.from_dict(data["mapping"])
                     if data.get("mapping") else None),
            latest_report=(SkillAssessmentReport.from_dict(data["latest_report"])
                           if data.get("latest_report") else None),
            qa=QATranscript.from_dict(data["qa"]) if data.get("qa") else None,
            chat=[ChatTurn.from_dict(t) for t in data.get("chat", [])],
            recommendations=(RecommendationList.from_dict(data["recommendations"])
                             if data.get("recommendations") else None),
            course_tracker=[CourseTrackerEntry.from_dict(e)
                            for e in data.get("course_tracker", [])],
            recommended_ever=list(data.get("recommended_ever", [])),
            created_at=data.get("created_at", ""),
            updated_at=data.get("updated_at", ""),
        )


def canonical_json(document: dict) -> str:
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


class ProfileStore:
    """File-backed profile store with per-profile write serialization.

    ``pipeline`` (optional) must offer ``parse_document(document)`` and
    ``refresh(profile)``; without one, mutations persist but nothing
    recalibrates — useful for storage-only tests.
    """

    def __init__(self, root: str | Path, pipeline=None):
        self.root = Path(root)
        self.profiles_dir = self.root / "profiles"
        self.events_dir = self.root / "events"
        try:
            self.profiles_dir.mkdir(parents=True, exist_ok=True)
            self.events_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageUnavailable(f"cannot create store at {self.root}: {exc}") from exc
        self.pipeline = pipeline
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock(self, profile_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(profile_id, threading.Lock())

    def _profile_path(self, profile_id: str) -> Path:
        return self.profiles_dir / f"{profile_id}.json"

    def _events_path(self, profile_id: str) -> Path:
        return self.events_dir / f"{profile_id}.jsonl"

    def _write(self, profile: CandidateProfile) -> None:
        profile.updated_at = now_iso()
        try:
            self._profile_path(profile.profile_id).write_text(
                canonical_json(profile.to_dict()), encoding="utf-8")
        except OSError as exc:
            raise StorageUnavailable(f"cannot write profile: {exc}") from exc

    def _append_event(self, profile_id: str, kind: str, **detail) -> StoreEvent:
        assert kind in EVENT_KINDS, kind
        path = self._events_path(profile_id)
        event_id = len(self.events(profile_id)) + 1
        event = StoreEvent(event_id, profile_id, kind, now_iso(), detail)
        try:
            with open(path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event.to_dict(), sort_keys=True) + "\n")
        except OSError as exc:
            raise StorageUnavailable(f"cannot append event: {exc}") from exc
        return event

    def events(self, profile_id: str) -> list[StoreEvent]:
        path = self._events_path(profile_id)
        if not path.exists():
            return []
        out = []
        for line in path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                raw = json.loads(line)
                out.append(StoreEvent(raw["event_id"], raw["profile_id"],
                                      raw["kind"], raw["at"], raw.get("detail", {})))
        return out

    # --- profile lifecycle ---------------------------------------------------

    def next_profile_id(self) -> str:
        existing = sorted(self.profiles_dir.glob("p-*.json"))
        highest = 0
        for path in existing:
            try:
                highest = max(highest, int(path.stem.split("-")[1]))
            except (IndexError, ValueError):
                continue
        return f"p-{highest + 1:06d}"

    def create_profile(self, display_name: str) -> CandidateProfile:
        if not display_name.strip():
            raise ValueError("display_name must be non-empty")
        with self._locks_guard:
            profile_id = self.next_profile_id()
            # reserve the id before releasing the guard
            profile = CandidateProfile(profile_id=profile_id,
                                       display_name=display_name.strip(),
                                       created_at=now_iso())
            self._write(profile)
        self._append_event(profile_id, "profile_upserted", created=True)
        return profile

    def exists(self, profile_id: str) -> bool:
        return self._profile_path(profile_id).exists()

    def get(self, profile_id: str) -> CandidateProfile:
        path = self._profile_path(profile_id)
        if not path.exists():
            raise UnknownProfile(f"no profile {profile_id!r}")
        try:
            return CandidateProfile.from_dict(
                json.loads(path.read_text(encoding="utf-8")))
        except OSError as exc:
            raise StorageUnavailable(f"cannot read profile: {exc}") from exc

    def upsert(self, profile: CandidateProfile) -> CandidateProfile:
        if not profile.profile_id:
            raise ValueError("profile_id must be non-empty")
        with self._lock(profile.profile_id):
            if not profile.created_at:
                profile.created_at = now_iso()
            self._write(profile)
            self._append_event(profile.profile_id, "profile_upserted")
        return profile

    # --- recalibrating mutations ---------------------------------------------

    def next_document_id(self, profile: CandidateProfile) -> str:
        return f"r-{len(profile.resumes) + 1:06d}"

    def append_resume(self, profile_id: str,
                      document: ResumeDocument) -> CandidateProfile:
        """Append a resume to history and rerun the pipeline.

        The history append is committed before the pipeline runs and is
        never rolled back; pipeline failures propagate to the caller.
        """
        with self._lock(profile_id):
            profile = self.get(profile_id)
            if not document.document_id:
                document.document_id = self.next_document_id(profile)
            profile.resumes.append(document)
            self._write(profile)
            self._append_event(profile_id, "resume_uploaded",
                               document_id=document.document_id)
            if self.pipeline is not None:
                profile.current_parsed = self.pipeline.parse_document(document)
                self._write(profile)
                profile = self._refresh(profile)
        return profile

    def record_answer(self, profile_id: str, question_id: str,
                      answer: str) -> CandidateProfile:
        """Record a Q&A answer (or revision) and rerun the pipeline."""
        with self._lock(profile_id):
            profile = self.get(profile_id)
            _, signal = record_answer(profile.qa, question_id, answer)
            self._write(profile)
            self._append_event(profile_id, "answer_recorded",
                               question_id=signal.question_id,
                               revision=signal.revision)
            if self.pipeline is not None and profile.current_parsed is not None:
                profile = self._refresh(profile)
        return profile

    def _refresh(self, profile: CandidateProfile) -> CandidateProfile:
        """Rerun the pipeline for a profile already under our lock. A failed
        mapping still persists the cleared state so the Q&A fallback can
        take over; the error propagates either way."""
        try:
            profile = self.pipeline.refresh(profile)
        except Exception:
            self._write(profile)
            raise
        self._write(profile)
        self._append_event(profile.profile_id, "recalibrated")
        return profile

    def set_questions(self, profile_id: str, questions) -> CandidateProfile:
        """Attach the generated question set, first writer wins."""
        with self._lock(profile_id):
            profile = self.get(profile_id)
            if not profile.qa.questions:
                profile.qa.questions = list(questions)
                self._write(profile)
                self._append_event(profile_id, "profile_upserted",
                                   questions=len(profile.qa.questions))
        return profile

    def append_chat_turns(self, profile_id: str, turns) -> CandidateProfile:
        with self._lock(profile_id):
            profile = self.get(profile_id)
            profile.chat.extend(turns)
            self._write(profile)
            self._append_event(profile_id, "profile_upserted",
                               chat_turns=len(turns))
        return profile

    # --- course tracker -------------------------------------------------------

    def set_course_status(self, profile_id: str, course_id: str,
                          status: str) -> CandidateProfile:
        if status not in COURSE_STATUSES:
            raise ValueError(f"unknown status {status!r}")
        with self._lock(profile_id):
            profile = self.get(profile_id)
            if course_id not in profile.recommended_ever:
                raise UnknownCourse(f"course {course_id!r} was never recommended",
                                    course_id=course_id)
            entry = profile.tracker_entry(course_id)
            current = entry.status if entry else STATUS_RECOMMENDED
            if (current, status) not in LEGAL_TRANSITIONS:
                raise IllegalTransition(
                    f"cannot move course from {current!r} to {status!r}",
                    from_status=current, to_status=status)
            if entry is None:
                entry = CourseTrackerEntry(course_id, status, now_iso())
                profile.course_tracker.append(entry)
            else:
                entry.status = status
                entry.updated_at = now_iso()
            self._write(profile)
            self._append_event(profile_id, "course_status_changed",
                               course_id=course_id, status=status)
        return profile
